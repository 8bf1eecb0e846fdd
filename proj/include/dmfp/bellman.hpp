#pragma once

#include <functional>
#include <vector>

#include "dmfp/core_types.hpp"

namespace dmfp {

/// One optimality backup: V(s') = max_a' Q(s',a') computed once, then
/// Q'(s,a) = r(s,a) + discount * <P(s,a,.), V>. Rows fan out over workers;
/// output is identical for any worker count.
QTable backup_step(const QTable& q, const SampledMdp& mdp, int workers = 1);

/// One policy-evaluation backup; the max is replaced by Q(s', pi(s')).
QTable policy_backup_step(const QTable& q, const SampledMdp& mdp, const Policy& pi, int workers = 1);

struct SolveResult {
    QTable q;
    int iterations = 0;
    double residual = 0.0;  // sup-norm Bellman residual of the returned table
    bool converged = false;
};

/// Called after each backup with (iteration index, table, sup-norm diff).
using IterationHook = std::function<void(int, const QTable&, double)>;

/// Value iteration from Q = 0 until the sup-norm step size falls below
/// eps * (1 - discount) / (2 * discount), which guarantees a final sup-norm
/// optimality gap of at most eps. Non-convergence within max_iters is
/// reported through `converged`; the last table is still returned.
SolveResult solve_q(const SampledMdp& mdp, double eps, int max_iters, int workers = 1);
SolveResult solve_q_traced(const SampledMdp& mdp, double eps, int max_iters, const IterationHook& hook,
                           int workers = 1);

/// Policy evaluation with the same stopping rule.
SolveResult solve_policy_q(const SampledMdp& mdp, const Policy& pi, double eps, int max_iters,
                           int workers = 1);
SolveResult solve_policy_q_traced(const SampledMdp& mdp, const Policy& pi, double eps, int max_iters,
                                  const IterationHook& hook, int workers = 1);

/// argmax_a Q(s, a); ties break to the lowest action index.
Policy greedy_policy(const QTable& q);

/// The first `horizon` iterates [Q^1, ..., Q^H] of value iteration from zero.
std::vector<QTable> finite_horizon(const SampledMdp& mdp, int horizon, int workers = 1);

}  // namespace dmfp
