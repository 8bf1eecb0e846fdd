#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmfp/core_types.hpp"
#include "dmfp/errors.hpp"
#include "dmfp/numerics.hpp"
#include "dmfp/sampler.hpp"

using namespace dmfp;

TEST_CASE("derive_replicate_seed is deterministic and distinct") {
    CHECK(derive_replicate_seed(42, 7) == derive_replicate_seed(42, 7));
    CHECK(derive_replicate_seed(42, 0) != derive_replicate_seed(42, 1));
}

TEST_CASE("derive_replicate_seed collision scan over indices") {
    // one master seed, 10^6 consecutive indices
    std::vector<std::uint64_t> seen;
    seen.reserve(1000000);
    for (std::uint64_t i = 0; i < 1000000; ++i) seen.push_back(derive_replicate_seed(0x1234abcd, i));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("derive_replicate_seed collision scan over masters") {
    // 10^6 random masters at a fixed index
    Rng rng(99);
    std::vector<std::uint64_t> seen;
    seen.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) seen.push_back(derive_replicate_seed(rng.next_u64(), 5));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("rng uniform and normal sanity") {
    Rng rng(321);
    MomentAccumulator unit;
    MomentAccumulator normal;
    for (int i = 0; i < 200000; ++i) {
        const double u = rng.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        unit.push(u);
        normal.push(rng.next_normal());
    }
    CHECK(unit.mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(normal.mean == doctest::Approx(0.0).scale(1.0).epsilon(0.01));
    CHECK(normal.sample_variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma sampler matches mean and variance, including shape < 1") {
    Rng rng(5150);
    for (double shape : {0.1, 0.5, 1.0, 2.5}) {
        MomentAccumulator acc;
        for (int i = 0; i < 400000; ++i) acc.push(rng.next_gamma(shape));
        // Gamma(k, 1): mean k, variance k
        CHECK(acc.mean == doctest::Approx(shape).epsilon(0.02));
        CHECK(acc.sample_variance() == doctest::Approx(shape).epsilon(0.05));
    }
    CHECK_THROWS_AS(rng.next_gamma(0.0), std::invalid_argument);
}

TEST_CASE("sample_dirichlet_row lies on the simplex") {
    Rng rng(77);
    const std::vector<double> alpha = {0.02, 0.5, 1.7, 0.02, 3.0};
    for (int i = 0; i < 2000; ++i) {
        const auto row = sample_dirichlet_row(alpha, rng);
        double total = 0.0;
        for (double v : row) {
            REQUIRE(v >= 0.0);
            total += v;
        }
        REQUIRE(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("sample_dirichlet_row degenerate and concentrated cases") {
    Rng rng(123);
    const std::vector<double> single = {0.3};
    const auto row = sample_dirichlet_row(single, rng);
    REQUIRE(row.size() == 1);
    CHECK(row[0] == 1.0);

    const std::vector<double> heavy = {1e6, 1e6};
    for (int i = 0; i < 100; ++i) {
        const auto r = sample_dirichlet_row(heavy, rng);
        CHECK(std::abs(r[0] - 0.5) < 0.005);
    }
}

TEST_CASE("dirichlet empirical variance matches the closed form at alpha = 1/2") {
    // Var[p1] for symmetric alpha = 1/N with N = 2 is 1/8
    Rng rng(2024);
    const std::vector<double> alpha = {0.5, 0.5};
    MomentAccumulator acc;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) acc.push(sample_dirichlet_row(alpha, rng)[0]);
    const double expected = 0.125;
    // standard error of a sample variance of a bounded variable; 3 sigma band
    const double se = std::sqrt(2.0 / (draws - 1.0)) * expected * 2.0;
    CHECK(std::abs(acc.sample_variance() - expected) < 3.0 * se);
    CHECK(std::abs(acc.mean - 0.5) < 3.0 * std::sqrt(expected / draws));
}

TEST_CASE("dirichlet empirical covariance matches the closed form at alpha = 1/3") {
    // symmetric alpha = 1/N with N = 3: Cov[p_i, p_j] = -1/(N^2 (N alpha + 1)) = -1/18
    Rng rng(606);
    const std::vector<double> alpha(3, 1.0 / 3.0);
    const int draws = 1000000;
    MomentAccumulator prod, a0, a1;
    for (int i = 0; i < draws; ++i) {
        const auto row = sample_dirichlet_row(alpha, rng);
        prod.push(row[0] * row[1]);
        a0.push(row[0]);
        a1.push(row[1]);
    }
    const double emp_cov = prod.mean - a0.mean * a1.mean;
    const double expected = -1.0 / 18.0;
    // the product of simplex coordinates is bounded, so its SE is below
    // sqrt(Var[p0 p1] / draws) <= 0.25 / sqrt(draws)
    CHECK(std::abs(emp_cov - expected) < 3.0 * 0.25 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("dirichlet empirical mean matches dirichlet_mean via 10^6 draws") {
    Rng rng(101);
    const std::vector<double> alpha = {2.0, 1.0, 1.0};
    const auto expected = dirichlet_mean(alpha);
    std::vector<MomentAccumulator> acc(alpha.size());
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
        const auto row = sample_dirichlet_row(alpha, rng);
        for (size_t j = 0; j < row.size(); ++j) acc[j].push(row[j]);
    }
    for (size_t j = 0; j < alpha.size(); ++j) {
        const double se = std::sqrt(acc[j].sample_variance() / draws);
        CHECK(std::abs(acc[j].mean - expected[j]) < 3.0 * se);
    }
}

TEST_CASE("sample_mdp is deterministic and respects degenerate rewards") {
    const PriorSpec prior = PriorSpec::symmetric(4, 3, 0.9, 0.25, 1.5, 0.0);
    const SampledMdp a = sample_mdp(prior, 42);
    const SampledMdp b = sample_mdp(prior, 42);
    CHECK(a.transitions.data == b.transitions.data);
    CHECK(a.rewards.data == b.rewards.data);
    for (double r : a.rewards.data) CHECK(r == 1.5);  // zero reward variance

    const SampledMdp c = sample_mdp(prior, 43);
    CHECK(a.transitions.data != c.transitions.data);
}

TEST_CASE("sample_mdp transition rows are simplex rows") {
    const PriorSpec prior = PriorSpec::symmetric(10, 2, 0.5, 0.1, 0.0, 1.0);
    const SampledMdp mdp = sample_mdp(prior, 7);
    for (int s = 0; s < 10; ++s) {
        for (int a = 0; a < 2; ++a) {
            double total = 0.0;
            for (double v : mdp.transitions.row(s, a)) {
                REQUIRE(v >= 0.0);
                total += v;
            }
            REQUIRE(std::abs(total - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("sample_mdp empirical transition mean matches dirichlet_mean") {
    // N = 10, asymmetric concentrations on one row, 10^4 draws
    PriorSpec prior = PriorSpec::symmetric(10, 1, 0.5, 0.3, 0.0, 1.0);
    for (int s2 = 0; s2 < 10; ++s2) prior.alpha(0, 0, s2) = 0.1 + 0.15 * s2;
    const auto expected = dirichlet_mean(prior.alpha.row(0, 0));
    std::vector<MomentAccumulator> acc(10);
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
        const SampledMdp mdp = sample_mdp(prior, derive_replicate_seed(5, k));
        for (int s2 = 0; s2 < 10; ++s2) acc[s2].push(mdp.transitions(0, 0, s2));
    }
    for (int s2 = 0; s2 < 10; ++s2) {
        const double se = std::sqrt(acc[s2].sample_variance() / draws);
        CHECK(std::abs(acc[s2].mean - expected[s2]) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("rows for distinct state-action pairs are uncorrelated") {
    const PriorSpec prior = PriorSpec::symmetric(3, 2, 0.5, 0.4, 0.0, 1.0);
    const int draws = 10000;
    std::vector<double> x(draws), y(draws);
    for (int k = 0; k < draws; ++k) {
        const SampledMdp mdp = sample_mdp(prior, derive_replicate_seed(11, k));
        x[k] = mdp.transitions(0, 0, 0);
        y[k] = mdp.transitions(1, 1, 0);
    }
    double mx = 0.0, my = 0.0;
    for (int k = 0; k < draws; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= draws;
    my /= draws;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int k = 0; k < draws; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("sample_mdp rejects an invalid prior") {
    PriorSpec prior = PriorSpec::symmetric(2, 2, 0.9, 0.5, 0.0, 1.0);
    prior.alpha(0, 0, 1) = 0.0;
    CHECK_THROWS_AS(sample_mdp(prior, 1), invalid_prior_error);
}
