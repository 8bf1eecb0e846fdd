#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "common/oracles.hpp"
#include "dmfp/bellman.hpp"
#include "dmfp/sampler.hpp"

using namespace dmfp;

namespace {

// single state, single action, P = 1, reward rho, discount beta
SampledMdp trivial_mdp(double rho, double beta) {
    SampledMdp mdp;
    mdp.discount = beta;
    mdp.transitions = Grid3(1, 1, 1, 1.0);
    mdp.rewards = Grid2(1, 1, rho);
    return mdp;
}

SampledMdp random_mdp(int S, int A, double beta, std::uint64_t seed) {
    const PriorSpec prior = PriorSpec::symmetric(S, A, beta, 1.0 / S, 0.0, 1.0);
    return sample_mdp(prior, seed);
}

double sup_diff(const QTable& a, const QTable& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
        d = std::max(d, std::abs(a.values.data[i] - b.values.data[i]));
    return d;
}

}  // namespace

TEST_CASE("backup_step basics") {
    const SampledMdp mdp = trivial_mdp(1.0, 0.5);

    QTable q = QTable::zeros(1, 1);
    CHECK(backup_step(q, mdp).values(0, 0) == doctest::Approx(1.0));

    q.values(0, 0) = 2.0;  // r / (1 - beta) = 2 is the fixed point
    CHECK(backup_step(q, mdp).values(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

    SampledMdp myopic = random_mdp(4, 3, 0.0, 9);
    QTable any = QTable::zeros(4, 3);
    for (auto& v : any.values.data) v = 17.0;
    const QTable backed = backup_step(any, myopic);
    for (size_t i = 0; i < backed.values.size(); ++i)
        CHECK(backed.values.data[i] == doctest::Approx(myopic.rewards.data[i]).epsilon(1e-15));
}

TEST_CASE("solve_q on the closed-form single-state problem") {
    const SampledMdp mdp = trivial_mdp(1.0, 0.5);
    const SolveResult r = solve_q(mdp, 1e-10, 500);
    CHECK(r.converged);
    CHECK(r.q.values(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.residual <= 1e-10);
}

TEST_CASE("solve_q converges in one iteration when the discount is zero") {
    const SampledMdp mdp = random_mdp(5, 2, 0.0, 3);
    const SolveResult r = solve_q(mdp, 1e-12, 100);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    for (size_t i = 0; i < r.q.values.size(); ++i)
        CHECK(r.q.values.data[i] == doctest::Approx(mdp.rewards.data[i]).epsilon(1e-15));
}

TEST_CASE("successive diffs decay with ratio at most the discount") {
    const SampledMdp mdp = random_mdp(20, 4, 0.9, 17);
    std::vector<double> diffs;
    solve_q_traced(mdp, 1e-9, 2000, [&](int, const QTable&, double d) { diffs.push_back(d); });
    // below ~1e-9 the diffs are dominated by rounding of O(1) Q entries
    for (size_t i = 3; i + 1 < diffs.size(); ++i) {
        if (diffs[i] < 1e-9) break;
        CHECK(diffs[i + 1] <= mdp.discount * diffs[i] * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("solve_q achieves the Bellman residual it reports") {
    const SampledMdp mdp = random_mdp(8, 3, 0.8, 23);
    const SolveResult r = solve_q(mdp, 1e-8, 2000);
    CHECK(r.converged);
    const QTable backed = backup_step(r.q, mdp);
    CHECK(sup_diff(backed, r.q) == doctest::Approx(r.residual).epsilon(1e-12));
}

TEST_CASE("contraction property on random table pairs") {
    const SampledMdp mdp = random_mdp(6, 3, 0.85, 31);
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        QTable qa = QTable::zeros(6, 3);
        QTable qb = QTable::zeros(6, 3);
        for (auto& v : qa.values.data) v = 5.0 * rng.next_normal();
        for (auto& v : qb.values.data) v = 5.0 * rng.next_normal();
        CHECK(sup_diff(backup_step(qa, mdp), backup_step(qb, mdp)) <=
              mdp.discount * sup_diff(qa, qb) + 1e-12);
    }
}

TEST_CASE("backup monotonicity") {
    const SampledMdp mdp = random_mdp(5, 2, 0.7, 41);
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        QTable lo = QTable::zeros(5, 2);
        QTable hi = QTable::zeros(5, 2);
        for (size_t i = 0; i < lo.values.size(); ++i) {
            lo.values.data[i] = rng.next_normal();
            hi.values.data[i] = lo.values.data[i] + rng.next_unit();
        }
        const QTable blo = backup_step(lo, mdp);
        const QTable bhi = backup_step(hi, mdp);
        for (size_t i = 0; i < blo.values.size(); ++i)
            CHECK(blo.values.data[i] <= bhi.values.data[i] + 1e-12);
    }
}

TEST_CASE("solve_q matches the policy-enumeration oracle on small instances") {
    for (int trial = 0; trial < 25; ++trial) {
        const int S = 1 + trial % 3;
        const int A = 1 + trial % 2;
        const SampledMdp mdp = random_mdp(S, A, 0.6 + 0.05 * (trial % 5), 100 + trial);
        const QTable expected = oracles::enumerate_optimal_q(mdp);
        const SolveResult got = solve_q(mdp, 1e-10, 5000);
        REQUIRE(got.converged);
        CHECK(sup_diff(got.q, expected) < 1e-8);
    }
}

TEST_CASE("greedy_policy tie-breaking and shift invariance") {
    QTable q = QTable::zeros(3, 3);
    q.values(0, 0) = 1.0;
    q.values(0, 1) = 3.0;
    q.values(0, 2) = 2.0;
    // all-equal row at s=1; shifted row at s=2
    q.values(2, 0) = -1.0;
    q.values(2, 1) = 1.0;
    q.values(2, 2) = 0.0;
    const Policy pi = greedy_policy(q);
    CHECK(pi.action[0] == 1);
    CHECK(pi.action[1] == 0);  // ties break low
    CHECK(pi.action[2] == 1);

    QTable shifted = q;
    for (int a = 0; a < 3; ++a) shifted.values(2, a) += 100.0;
    CHECK(greedy_policy(shifted).action[2] == pi.action[2]);
}

TEST_CASE("policy evaluation equals optimal control with a single action") {
    const SampledMdp mdp = random_mdp(6, 1, 0.8, 55);
    Policy pi;
    pi.action.assign(6, 0);
    const SolveResult opt = solve_q(mdp, 1e-10, 5000);
    const SolveResult pol = solve_policy_q(mdp, pi, 1e-10, 5000);
    CHECK(sup_diff(opt.q, pol.q) < 1e-9);
}

TEST_CASE("evaluating the greedy policy of Q* recovers Q* on its actions") {
    for (int trial = 0; trial < 10; ++trial) {
        const SampledMdp mdp = random_mdp(5, 3, 0.8, 200 + trial);
        const SolveResult opt = solve_q(mdp, 1e-11, 5000);
        const Policy pi = greedy_policy(opt.q);
        const SolveResult pol = solve_policy_q(mdp, pi, 1e-11, 5000);
        for (int s = 0; s < 5; ++s) {
            CHECK(pol.q.values(s, pi.action[s]) ==
                  doctest::Approx(opt.q.values(s, pi.action[s])).epsilon(1e-8));
        }
    }
}

TEST_CASE("policy backup with zero discount returns the reward table") {
    const SampledMdp mdp = random_mdp(4, 2, 0.0, 77);
    Policy pi;
    pi.action.assign(4, 1);
    const SolveResult r = solve_policy_q(mdp, pi, 1e-12, 10);
    for (size_t i = 0; i < r.q.values.size(); ++i)
        CHECK(r.q.values.data[i] == doctest::Approx(mdp.rewards.data[i]).epsilon(1e-15));
}

TEST_CASE("finite_horizon basics and prefix property") {
    const SampledMdp one = trivial_mdp(1.0, 0.5);
    const auto tables = finite_horizon(one, 3);
    REQUIRE(tables.size() == 3);
    CHECK(tables[0].values(0, 0) == doctest::Approx(1.0));
    CHECK(tables[2].values(0, 0) == doctest::Approx(1.75));  // 1 + 0.5 + 0.25

    const SampledMdp mdp = random_mdp(5, 2, 0.9, 404);
    const auto horizon = finite_horizon(mdp, 6);
    std::vector<QTable> iterates;
    solve_q_traced(mdp, 1e-9, 6, [&](int, const QTable& q, double) { iterates.push_back(q); });
    REQUIRE(iterates.size() == 6);
    for (int n = 0; n < 6; ++n) CHECK(sup_diff(horizon[n], iterates[n]) == 0.0);

    const auto h1 = finite_horizon(mdp, 1);
    for (size_t i = 0; i < h1[0].values.size(); ++i)
        CHECK(h1[0].values.data[i] == doctest::Approx(mdp.rewards.data[i]).epsilon(1e-15));
}

TEST_CASE("backup_step is identical across worker counts") {
    const SampledMdp mdp = random_mdp(30, 4, 0.9, 808);
    QTable q = QTable::zeros(30, 4);
    Rng rng(9);
    for (auto& v : q.values.data) v = rng.next_normal();
    const QTable w1 = backup_step(q, mdp, 1);
    const QTable w4 = backup_step(q, mdp, 4);
    CHECK(w1.values.data == w4.values.data);
}
