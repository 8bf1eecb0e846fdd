#pragma once

// Test-side oracles, kept independent of the library implementation paths
// they check.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dmfp/core_types.hpp"

namespace oracles {

// High-precision normal CDF from the long-double libm erfc.
inline long double normal_cdf_ld(long double x) { return 0.5L * erfcl(-x / sqrtl(2.0L)); }

// Solves (I - beta * P_pi) V = r_pi by Gaussian elimination with partial
// pivoting; fine for the tiny systems the enumeration oracle visits.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const size_t n = rhs.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        if (m[col][col] == 0.0) throw std::runtime_error("singular system in enumeration oracle");
        for (size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (size_t ri = n; ri-- > 0;) {
        double acc = rhs[ri];
        for (size_t c = ri + 1; c < n; ++c) acc -= m[ri][c] * x[c];
        x[ri] = acc / m[ri][ri];
    }
    return x;
}

// Exhaustive policy enumeration: evaluates every deterministic policy by a
// direct linear solve and takes the per-state maximum, then forms Q*.
inline dmfp::QTable enumerate_optimal_q(const dmfp::SampledMdp& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double beta = mdp.discount;

    long long total = 1;
    for (int s = 0; s < S; ++s) total *= A;

    std::vector<double> v_star(S, -1e300);
    std::vector<int> policy(S, 0);
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (int s = 0; s < S; ++s) {
            policy[s] = static_cast<int>(c % A);
            c /= A;
        }
        std::vector<std::vector<double>> m(S, std::vector<double>(S, 0.0));
        std::vector<double> rhs(S);
        for (int s = 0; s < S; ++s) {
            rhs[s] = mdp.rewards(s, policy[s]);
            const auto p = mdp.transitions.row(s, policy[s]);
            for (int s2 = 0; s2 < S; ++s2) m[s][s2] = (s == s2 ? 1.0 : 0.0) - beta * p[s2];
        }
        const auto v = solve_linear(std::move(m), std::move(rhs));
        for (int s = 0; s < S; ++s) v_star[s] = std::max(v_star[s], v[s]);
    }

    dmfp::QTable q = dmfp::QTable::zeros(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const auto p = mdp.transitions.row(s, a);
            double acc = 0.0;
            for (int s2 = 0; s2 < S; ++s2) acc += p[s2] * v_star[s2];
            q.values(s, a) = mdp.rewards(s, a) + beta * acc;
        }
    }
    return q;
}

}  // namespace oracles
