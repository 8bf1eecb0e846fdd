#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmfp/tables.hpp"

namespace dmfp {

/// Bayesian belief state over an MDP: Dirichlet concentrations per (s,a) row,
/// Gaussian reward posteriors, and the discount factor. Immutable once built.
struct PriorSpec {
    int num_states = 0;
    int num_actions = 0;
    double discount = 0.0;
    Grid3 alpha;        // (s, a, s') concentration parameters, all > 0
    Grid2 reward_mean;  // (s, a)
    Grid2 reward_var;   // (s, a), >= 0

    /// Symmetric prior: every concentration equals alpha_scalar, identical
    /// Gaussian reward posterior everywhere.
    static PriorSpec symmetric(int num_states, int num_actions, double discount, double alpha_scalar,
                               double reward_mean, double reward_var);

    /// One concentration scalar per (s,a), broadcast across next states.
    static PriorSpec from_row_concentrations(int num_states, int num_actions, double discount,
                                             const Grid2& row_alpha, const Grid2& reward_mean,
                                             const Grid2& reward_var);
};

/// One concrete MDP draw from the prior.
struct SampledMdp {
    Grid3 transitions;  // (s, a, s'), each row on the probability simplex
    Grid2 rewards;      // (s, a)
    double discount = 0.0;

    int num_states() const { return transitions.d0; }
    int num_actions() const { return transitions.d1; }
};

/// State of value iteration.
struct QTable {
    Grid2 values;  // (s, a)

    static QTable zeros(int num_states, int num_actions) { return QTable{Grid2(num_states, num_actions)}; }
    int num_states() const { return values.rows; }
    int num_actions() const { return values.cols; }
};

/// Per-(s,a) posterior mean and variance of the Q-value.
struct MomentField {
    Grid2 mean;  // (s, a)
    Grid2 var;   // (s, a), >= 0

    static MomentField zeros(int num_states, int num_actions) {
        return MomentField{Grid2(num_states, num_actions), Grid2(num_states, num_actions)};
    }
    int num_states() const { return mean.rows; }
    int num_actions() const { return mean.cols; }
};

/// Deterministic stationary policy.
struct Policy {
    std::vector<int> action;  // one action index per state
};

struct PriorViolation {
    std::string message;
    int s = -1;
    int a = -1;
    int s2 = -1;
};

/// Collects every invariant violation with coordinates; empty result means ok.
std::vector<PriorViolation> validate_prior(const PriorSpec& prior);

/// E[p_i] = alpha_i / sum(alpha). Throws invalid_prior_error on non-positive entries.
std::vector<double> dirichlet_mean(std::span<const double> alpha_row);

/// Full covariance matrix (n x n, row-major):
///   C_ii = m_i (1 - m_i) / (1 + a0),  C_ij = -m_i m_j / (1 + a0),  a0 = sum(alpha).
/// Rows sum to zero. Throws invalid_prior_error on non-positive entries.
std::vector<double> dirichlet_covariance(std::span<const double> alpha_row);

}  // namespace dmfp
