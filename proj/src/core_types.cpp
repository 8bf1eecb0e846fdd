#include "dmfp/core_types.hpp"

#include <cmath>
#include <string>

#include "dmfp/errors.hpp"

namespace dmfp {

PriorSpec PriorSpec::symmetric(int num_states, int num_actions, double discount, double alpha_scalar,
                               double reward_mean, double reward_var) {
    PriorSpec p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.discount = discount;
    p.alpha = Grid3(num_states, num_actions, num_states, alpha_scalar);
    p.reward_mean = Grid2(num_states, num_actions, reward_mean);
    p.reward_var = Grid2(num_states, num_actions, reward_var);
    return p;
}

PriorSpec PriorSpec::from_row_concentrations(int num_states, int num_actions, double discount,
                                             const Grid2& row_alpha, const Grid2& reward_mean,
                                             const Grid2& reward_var) {
    PriorSpec p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.discount = discount;
    p.alpha = Grid3(num_states, num_actions, num_states);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
            for (int s2 = 0; s2 < num_states; ++s2) p.alpha(s, a, s2) = row_alpha(s, a);
    p.reward_mean = reward_mean;
    p.reward_var = reward_var;
    return p;
}

std::vector<PriorViolation> validate_prior(const PriorSpec& prior) {
    std::vector<PriorViolation> out;
    if (prior.num_states < 1) out.push_back({"num_states must be positive"});
    if (prior.num_actions < 1) out.push_back({"num_actions must be positive"});
    if (!(prior.discount >= 0.0 && prior.discount < 1.0))
        out.push_back({"discount out of range [0, 1)"});
    const bool shapes_ok = prior.alpha.d0 == prior.num_states && prior.alpha.d1 == prior.num_actions &&
                           prior.alpha.d2 == prior.num_states &&
                           prior.reward_mean.rows == prior.num_states &&
                           prior.reward_mean.cols == prior.num_actions &&
                           prior.reward_var.rows == prior.num_states &&
                           prior.reward_var.cols == prior.num_actions;
    if (!shapes_ok) {
        out.push_back({"table shapes do not match (num_states, num_actions)"});
        return out;
    }
    for (int s = 0; s < prior.num_states; ++s) {
        for (int a = 0; a < prior.num_actions; ++a) {
            for (int s2 = 0; s2 < prior.num_states; ++s2) {
                const double v = prior.alpha(s, a, s2);
                if (!(v > 0.0) || !std::isfinite(v)) {
                    out.push_back({"alpha entry must be positive at (s=" + std::to_string(s) +
                                       ", a=" + std::to_string(a) + ", s'=" + std::to_string(s2) + ")",
                                   s, a, s2});
                }
            }
            const double rv = prior.reward_var(s, a);
            if (!(rv >= 0.0) || !std::isfinite(rv)) {
                out.push_back({"reward variance must be nonnegative at (s=" + std::to_string(s) +
                                   ", a=" + std::to_string(a) + ")",
                               s, a});
            }
            if (!std::isfinite(prior.reward_mean(s, a))) {
                out.push_back({"reward mean must be finite at (s=" + std::to_string(s) +
                                   ", a=" + std::to_string(a) + ")",
                               s, a});
            }
        }
    }
    return out;
}

namespace {
void check_positive(std::span<const double> alpha_row) {
    for (size_t i = 0; i < alpha_row.size(); ++i) {
        if (!(alpha_row[i] > 0.0) || !std::isfinite(alpha_row[i]))
            throw invalid_prior_error("dirichlet parameter must be positive (index " + std::to_string(i) +
                                      ")");
    }
}
}  // namespace

std::vector<double> dirichlet_mean(std::span<const double> alpha_row) {
    check_positive(alpha_row);
    double total = 0.0;
    for (double v : alpha_row) total += v;
    std::vector<double> out(alpha_row.size());
    for (size_t i = 0; i < alpha_row.size(); ++i) out[i] = alpha_row[i] / total;
    return out;
}

std::vector<double> dirichlet_covariance(std::span<const double> alpha_row) {
    check_positive(alpha_row);
    const size_t n = alpha_row.size();
    double total = 0.0;
    for (double v : alpha_row) total += v;
    const double denom = 1.0 + total;
    std::vector<double> mean(n);
    for (size_t i = 0; i < n; ++i) mean[i] = alpha_row[i] / total;
    std::vector<double> cov(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            cov[i * n + j] = i == j ? mean[i] * (1.0 - mean[i]) / denom : -mean[i] * mean[j] / denom;
        }
    }
    return cov;
}

}  // namespace dmfp
