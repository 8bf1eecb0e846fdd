#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dmfp/core_types.hpp"
#include "dmfp/errors.hpp"
#include "dmfp/sampler.hpp"

using namespace dmfp;

TEST_CASE("dirichlet_mean examples") {
    {
        const std::vector<double> alpha = {1.0, 1.0};
        const auto m = dirichlet_mean(alpha);
        CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-15));
    }
    {
        const std::vector<double> alpha = {2.0, 1.0, 1.0};
        const auto m = dirichlet_mean(alpha);
        CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m[1] == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(m[2] == doctest::Approx(0.25).epsilon(1e-15));
    }
    {
        const std::vector<double> alpha(4, 0.25);  // symmetric 1/N with N = 4
        const auto m = dirichlet_mean(alpha);
        for (double v : m) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    }
    {
        const std::vector<double> alpha = {0.7, 1.3, 2.0};
        const auto m = dirichlet_mean(alpha);
        double total = 0.0;
        for (double v : m) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(dirichlet_mean(std::vector<double>{1.0, 0.0}), invalid_prior_error);
}

TEST_CASE("dirichlet_covariance examples") {
    {
        const std::vector<double> alpha = {0.5, 0.5};  // symmetric 1/N, N = 2
        const auto c = dirichlet_covariance(alpha);
        CHECK(c[0] == doctest::Approx(0.125).epsilon(1e-15));
        CHECK(c[3] == doctest::Approx(0.125).epsilon(1e-15));
        CHECK(c[1] == doctest::Approx(-0.125).epsilon(1e-15));
        CHECK(c[2] == doctest::Approx(-0.125).epsilon(1e-15));
    }
    {
        const std::vector<double> alpha = {0.3, 1.1, 2.7, 0.9};
        const auto c = dirichlet_covariance(alpha);
        const size_t n = alpha.size();
        for (size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (size_t j = 0; j < n; ++j) {
                row_sum += c[i * n + j];
                CHECK(c[i * n + j] == doctest::Approx(c[j * n + i]).epsilon(1e-15));
            }
            CHECK(std::abs(row_sum) < 1e-14);
        }
    }
    {
        const std::vector<double> alpha = {1e6, 1e6};
        const auto c = dirichlet_covariance(alpha);
        for (double v : c) CHECK(std::abs(v) < 1e-6);
    }
    CHECK_THROWS_AS(dirichlet_covariance(std::vector<double>{-1.0, 2.0}), invalid_prior_error);
}

TEST_CASE("dirichlet_covariance is positive semidefinite as a quadratic form") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 2 + rng.next_below(6);
        std::vector<double> alpha(n);
        for (auto& v : alpha) v = 0.05 + 3.0 * rng.next_unit();
        const auto c = dirichlet_covariance(alpha);
        std::vector<double> m(n);
        for (auto& v : m) v = rng.next_normal();
        double quad = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) quad += m[i] * c[i * n + j] * m[j];
        CHECK(quad >= -1e-12);
    }
}

TEST_CASE("symmetric dirichlet closed-form variance and covariance") {
    // alpha = 1/N: Var = (N-1)/(N^2 (N alpha + 1)), Cov = -1/(N^2 (N alpha + 1))
    for (int n : {2, 3, 5, 8}) {
        const std::vector<double> alpha(n, 1.0 / n);
        const auto c = dirichlet_covariance(alpha);
        const double denom = n * static_cast<double>(n) * (n * (1.0 / n) + 1.0);
        const double var_expected = (n - 1.0) / denom;
        const double cov_expected = -1.0 / denom;
        CHECK(c[0] == doctest::Approx(var_expected).epsilon(1e-14));
        CHECK(c[1] == doctest::Approx(cov_expected).epsilon(1e-14));
    }
}

TEST_CASE("validate_prior flags violations with coordinates") {
    PriorSpec good = PriorSpec::symmetric(3, 2, 0.9, 0.5, 0.0, 1.0);
    CHECK(validate_prior(good).empty());

    PriorSpec bad_discount = good;
    bad_discount.discount = 1.0;
    const auto v1 = validate_prior(bad_discount);
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].message.find("discount") != std::string::npos);

    PriorSpec bad_alpha = good;
    bad_alpha.alpha(1, 0, 2) = 0.0;
    const auto v2 = validate_prior(bad_alpha);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].s == 1);
    CHECK(v2[0].a == 0);
    CHECK(v2[0].s2 == 2);

    PriorSpec bad_var = good;
    bad_var.reward_var(0, 1) = -0.5;
    const auto v3 = validate_prior(bad_var);
    REQUIRE(v3.size() == 1);
    CHECK(v3[0].message.find("variance") != std::string::npos);
}
