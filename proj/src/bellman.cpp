#include "dmfp/bellman.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dmfp/parallel.hpp"

namespace dmfp {

namespace {

// V(s) = max_a Q(s, a)
void max_values(const QTable& q, std::vector<double>& v) {
    const int S = q.num_states();
    const int A = q.num_actions();
    v.resize(S);
    for (int s = 0; s < S; ++s) {
        const auto row = q.values.row(s);
        double best = row[0];
        for (int a = 1; a < A; ++a) best = std::max(best, row[a]);
        v[s] = best;
    }
}

// V(s) = Q(s, pi(s))
void policy_values(const QTable& q, const Policy& pi, std::vector<double>& v) {
    const int S = q.num_states();
    v.resize(S);
    for (int s = 0; s < S; ++s) v[s] = q.values(s, pi.action[s]);
}

// Q'(s,a) = r(s,a) + beta * <P(s,a,.), V>; rows are independent so the fan-out
// writes disjoint slots and is deterministic for any worker count.
void backup_into(const SampledMdp& mdp, const std::vector<double>& v, QTable& out, int workers) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double beta = mdp.discount;
    parallel_for_index(S, workers, [&](std::int64_t s) {
        for (int a = 0; a < A; ++a) {
            const auto p = mdp.transitions.row(static_cast<int>(s), a);
            double acc = 0.0;
            for (int s2 = 0; s2 < S; ++s2) acc += p[s2] * v[s2];
            out.values(static_cast<int>(s), a) = mdp.rewards(static_cast<int>(s), a) + beta * acc;
        }
    });
}

void check_shapes(const QTable& q, const SampledMdp& mdp) {
    if (q.num_states() != mdp.num_states() || q.num_actions() != mdp.num_actions())
        throw std::invalid_argument("Q table shape does not match the MDP");
}

double sup_diff(const QTable& a, const QTable& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values.data[i] - b.values.data[i]));
    return d;
}

enum class BackupKind { optimal, policy };

SolveResult solve_impl(const SampledMdp& mdp, const Policy* pi, double eps, int max_iters,
                       const IterationHook& hook, int workers) {
    if (!(mdp.discount >= 0.0 && mdp.discount < 1.0))
        throw std::invalid_argument("solve requires discount in [0, 1)");
    if (max_iters < 1) throw std::invalid_argument("solve requires max_iters >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("solve requires eps > 0");

    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double beta = mdp.discount;
    // Stop once the step size guarantees a sup-norm optimality gap <= eps via
    // the contraction bound ||Q^n - Q*|| <= beta/(1-beta) * ||Q^n - Q^{n-1}||.
    const double threshold = beta > 0.0 ? eps * (1.0 - beta) / (2.0 * beta)
                                        : std::numeric_limits<double>::infinity();

    QTable q = QTable::zeros(S, A);
    QTable next = QTable::zeros(S, A);
    std::vector<double> v;
    SolveResult result;
    for (int n = 1; n <= max_iters; ++n) {
        if (pi == nullptr)
            max_values(q, v);
        else
            policy_values(q, *pi, v);
        backup_into(mdp, v, next, workers);
        const double diff = sup_diff(next, q);
        std::swap(q, next);
        result.iterations = n;
        if (hook) hook(n, q, diff);
        if (diff <= threshold) {
            result.converged = true;
            break;
        }
    }
    // Exact Bellman residual of the returned table via one more backup.
    if (pi == nullptr)
        max_values(q, v);
    else
        policy_values(q, *pi, v);
    backup_into(mdp, v, next, workers);
    result.residual = sup_diff(next, q);
    result.q = std::move(q);
    return result;
}

}  // namespace

QTable backup_step(const QTable& q, const SampledMdp& mdp, int workers) {
    check_shapes(q, mdp);
    std::vector<double> v;
    max_values(q, v);
    QTable out = QTable::zeros(q.num_states(), q.num_actions());
    backup_into(mdp, v, out, workers);
    return out;
}

QTable policy_backup_step(const QTable& q, const SampledMdp& mdp, const Policy& pi, int workers) {
    check_shapes(q, mdp);
    if (static_cast<int>(pi.action.size()) != q.num_states())
        throw std::invalid_argument("policy size does not match the state count");
    std::vector<double> v;
    policy_values(q, pi, v);
    QTable out = QTable::zeros(q.num_states(), q.num_actions());
    backup_into(mdp, v, out, workers);
    return out;
}

SolveResult solve_q(const SampledMdp& mdp, double eps, int max_iters, int workers) {
    return solve_impl(mdp, nullptr, eps, max_iters, {}, workers);
}

SolveResult solve_q_traced(const SampledMdp& mdp, double eps, int max_iters, const IterationHook& hook,
                           int workers) {
    return solve_impl(mdp, nullptr, eps, max_iters, hook, workers);
}

SolveResult solve_policy_q(const SampledMdp& mdp, const Policy& pi, double eps, int max_iters,
                           int workers) {
    return solve_impl(mdp, &pi, eps, max_iters, {}, workers);
}

SolveResult solve_policy_q_traced(const SampledMdp& mdp, const Policy& pi, double eps, int max_iters,
                                  const IterationHook& hook, int workers) {
    return solve_impl(mdp, &pi, eps, max_iters, hook, workers);
}

Policy greedy_policy(const QTable& q) {
    const int S = q.num_states();
    const int A = q.num_actions();
    Policy pi;
    pi.action.resize(S);
    for (int s = 0; s < S; ++s) {
        const auto row = q.values.row(s);
        int best = 0;
        for (int a = 1; a < A; ++a) {
            if (row[a] > row[best]) best = a;  // ties keep the lowest index
        }
        pi.action[s] = best;
    }
    return pi;
}

std::vector<QTable> finite_horizon(const SampledMdp& mdp, int horizon, int workers) {
    if (horizon < 1) throw std::invalid_argument("finite_horizon requires horizon >= 1");
    std::vector<QTable> out;
    out.reserve(horizon);
    QTable q = QTable::zeros(mdp.num_states(), mdp.num_actions());
    for (int n = 0; n < horizon; ++n) {
        q = backup_step(q, mdp, workers);
        out.push_back(q);
    }
    return out;
}

}  // namespace dmfp
