#include "dmfp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dmfp/bellman.hpp"
#include "dmfp/errors.hpp"
#include "dmfp/parallel.hpp"
#include "dmfp/sampler.hpp"

namespace dmfp {

namespace {

// Replicates are accumulated in fixed-size blocks and the blocks merged in
// index order, so the floating-point reduction tree never depends on the
// worker count.
constexpr int kReplicateBlock = 8;

// Seed-stream indices reserved for harness-level draws; replicate indices are
// always < 2^63 so these cannot collide with them.
constexpr std::uint64_t kRetainSelectionStream = (1ULL << 63);

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile_of(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t i = static_cast<size_t>(pos);
    if (i + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

}  // namespace

int EnsembleStats::pair_index(int s, int a) const {
    for (size_t i = 0; i < retained_pairs.size(); ++i) {
        if (retained_pairs[i].first == s && retained_pairs[i].second == a) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> default_snapshot_schedule(int max_iters) {
    std::vector<int> out;
    for (int i = 1; i <= 10 && i <= max_iters; ++i) out.push_back(i);
    for (int i = 16; i <= max_iters; i *= 2) out.push_back(i);
    return out;
}

std::vector<std::pair<int, int>> choose_retained_pairs(int num_states, int num_actions, int count,
                                                       std::uint64_t seed) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) pairs.emplace_back(s, a);
    Rng rng(derive_replicate_seed(seed, kRetainSelectionStream));
    for (size_t i = pairs.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(pairs[i - 1], pairs[j]);
    }
    const size_t keep = std::min<size_t>(static_cast<size_t>(std::max(count, 0)), pairs.size());
    pairs.resize(keep);
    return pairs;
}

EnsembleStats run_ensemble(const PriorSpec& prior, int replicates, std::uint64_t master_seed,
                           const EnsembleOptions& opts) {
    if (replicates < 2) throw std::invalid_argument("run_ensemble requires at least 2 replicates");
    const auto violations = validate_prior(prior);
    if (!violations.empty()) throw invalid_prior_error(violations.front().message);

    std::vector<int> schedule = opts.snapshot_iters;
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
    if (!schedule.empty() && schedule.front() < 1)
        throw std::invalid_argument("snapshot iterations must be >= 1");
    for (const auto& [s, a] : opts.retain_pairs) {
        if (s < 0 || s >= prior.num_states || a < 0 || a >= prior.num_actions)
            throw std::invalid_argument("retained pair out of range");
    }
    if (opts.policy && static_cast<int>(opts.policy->action.size()) != prior.num_states)
        throw std::invalid_argument("ensemble policy size does not match the state count");

    const int S = prior.num_states;
    const int A = prior.num_actions;
    const size_t table = static_cast<size_t>(S) * A;
    const size_t slots = schedule.size();
    const int blocks = (replicates + kReplicateBlock - 1) / kReplicateBlock;

    struct BlockStats {
        std::vector<std::vector<MomentAccumulator>> snapshot;  // [slot][(s,a)]
        std::vector<MomentAccumulator> converged;
    };
    std::vector<BlockStats> block_stats(blocks);

    EnsembleStats stats;
    stats.num_states = S;
    stats.num_actions = A;
    stats.replicates = replicates;
    stats.snapshot_iters = schedule;
    stats.retained_pairs = opts.retain_pairs;
    stats.retained_samples.assign(opts.retain_pairs.size(), std::vector<double>(replicates, 0.0));
    stats.iterations.assign(replicates, 0);
    stats.replicate_converged.assign(replicates, 0);

    parallel_for_index(blocks, std::max(opts.workers, 1), [&](std::int64_t bi) {
        BlockStats& local = block_stats[bi];
        local.snapshot.assign(slots, std::vector<MomentAccumulator>(table));
        local.converged.assign(table, MomentAccumulator{});
        const int k_begin = static_cast<int>(bi) * kReplicateBlock;
        const int k_end = std::min(k_begin + kReplicateBlock, replicates);
        for (int k = k_begin; k < k_end; ++k) {
            const SampledMdp mdp = sample_mdp(prior, derive_replicate_seed(master_seed, k));
            size_t next_slot = 0;
            auto hook = [&](int iter, const QTable& q, double) {
                while (next_slot < slots && schedule[next_slot] == iter) {
                    auto& accs = local.snapshot[next_slot];
                    for (size_t i = 0; i < table; ++i) accs[i].push(q.values.data[i]);
                    ++next_slot;
                }
            };
            const SolveResult result =
                opts.policy ? solve_policy_q_traced(mdp, *opts.policy, opts.eps, opts.max_iters, hook, 1)
                            : solve_q_traced(mdp, opts.eps, opts.max_iters, hook, 1);
            // snapshots past convergence record the converged table
            for (; next_slot < slots; ++next_slot) {
                auto& accs = local.snapshot[next_slot];
                for (size_t i = 0; i < table; ++i) accs[i].push(result.q.values.data[i]);
            }
            for (size_t i = 0; i < table; ++i) local.converged[i].push(result.q.values.data[i]);
            for (size_t p = 0; p < opts.retain_pairs.size(); ++p) {
                const auto [s, a] = opts.retain_pairs[p];
                stats.retained_samples[p][k] = result.q.values(s, a);
            }
            stats.iterations[k] = result.iterations;
            stats.replicate_converged[k] = result.converged ? 1 : 0;
        }
    });

    stats.snapshot_moments.assign(slots, std::vector<MomentAccumulator>(table));
    stats.converged_moments.assign(table, MomentAccumulator{});
    for (int b = 0; b < blocks; ++b) {
        for (size_t slot = 0; slot < slots; ++slot) {
            for (size_t i = 0; i < table; ++i)
                stats.snapshot_moments[slot][i].merge(block_stats[b].snapshot[slot][i]);
        }
        for (size_t i = 0; i < table; ++i) stats.converged_moments[i].merge(block_stats[b].converged[i]);
    }
    return stats;
}

std::vector<MomentField> sample_trajectory(const DmfpRun& run, const std::vector<int>& iters) {
    if (run.trajectory.empty()) throw std::invalid_argument("sample_trajectory: empty trajectory");
    std::vector<MomentField> out;
    out.reserve(iters.size() + 1);
    const int last = static_cast<int>(run.trajectory.size()) - 1;
    for (int iter : iters) {
        if (iter < 0) throw std::invalid_argument("sample_trajectory: negative iteration");
        out.push_back(run.trajectory[static_cast<size_t>(std::min(iter, last))]);
    }
    out.push_back(run.trajectory.back());
    return out;
}

ComparisonReport compare_theory(const EnsembleStats& stats,
                                const std::vector<MomentField>& theory_at_snapshots) {
    const size_t slots = stats.snapshot_iters.size();
    if (theory_at_snapshots.size() != slots + 1)
        throw std::invalid_argument("compare_theory: snapshot lists do not match");
    const size_t table = static_cast<size_t>(stats.num_states) * stats.num_actions;
    for (const auto& f : theory_at_snapshots) {
        if (f.num_states() != stats.num_states || f.num_actions() != stats.num_actions)
            throw std::invalid_argument("compare_theory: field shape mismatch");
    }

    ComparisonReport report;
    report.num_states = stats.num_states;
    report.num_actions = stats.num_actions;
    report.replicates = stats.replicates;

    auto compare_slot = [&](int iteration, const std::vector<MomentAccumulator>& accs,
                            const MomentField& theory) {
        SnapshotComparison cmp;
        cmp.iteration = iteration;
        cmp.emp_mean.resize(table);
        cmp.emp_var.resize(table);
        cmp.theory_mean.resize(table);
        cmp.theory_var.resize(table);
        cmp.rel_err_mean.resize(table);
        cmp.rel_err_var.resize(table);
        cmp.abs_err_mean.resize(table);
        cmp.abs_err_var.resize(table);
        std::vector<double> rel_mean_defined;
        std::vector<double> rel_var_defined;
        for (size_t i = 0; i < table; ++i) {
            const double em = accs[i].mean;
            const double ev = accs[i].sample_variance();
            const double tm = theory.mean.data[i];
            const double tv = theory.var.data[i];
            cmp.emp_mean[i] = em;
            cmp.emp_var[i] = ev;
            cmp.theory_mean[i] = tm;
            cmp.theory_var[i] = tv;
            cmp.abs_err_mean[i] = std::abs(em - tm);
            cmp.abs_err_var[i] = std::abs(ev - tv);
            if (std::abs(tm) > kRelErrFloor) {
                cmp.rel_err_mean[i] = std::abs(em - tm) / std::abs(tm);
                rel_mean_defined.push_back(cmp.rel_err_mean[i]);
            } else {
                cmp.rel_err_mean[i] = std::numeric_limits<double>::quiet_NaN();
            }
            if (std::abs(tv) > kRelErrFloor) {
                cmp.rel_err_var[i] = std::abs(ev - tv) / std::abs(tv);
                rel_var_defined.push_back(cmp.rel_err_var[i]);
            } else {
                cmp.rel_err_var[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
        cmp.median_rel_err_mean = median_of(rel_mean_defined);
        cmp.p90_rel_err_mean = quantile_of(rel_mean_defined, 0.9);
        cmp.max_rel_err_mean = rel_mean_defined.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                        : *std::max_element(rel_mean_defined.begin(),
                                                                            rel_mean_defined.end());
        cmp.median_rel_err_var = median_of(rel_var_defined);
        cmp.p90_rel_err_var = quantile_of(rel_var_defined, 0.9);
        cmp.max_rel_err_var = rel_var_defined.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                      : *std::max_element(rel_var_defined.begin(),
                                                                          rel_var_defined.end());
        return cmp;
    };

    for (size_t slot = 0; slot < slots; ++slot) {
        report.snapshots.push_back(compare_slot(stats.snapshot_iters[slot], stats.snapshot_moments[slot],
                                                theory_at_snapshots[slot]));
    }
    report.snapshots.push_back(compare_slot(-1, stats.converged_moments, theory_at_snapshots.back()));
    return report;
}

namespace {

// Asymptotic Kolmogorov tail: Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2),
// with the theta-transformed series used for small x where the direct sum
// converges slowly.
double kolmogorov_q(double x) {
    if (x <= 1e-8) return 1.0;
    if (x < 1.18) {
        const double t = std::exp(-0.5 * M_PI * M_PI / (4.0 * x * x));
        const double cdf = std::sqrt(2.0 * M_PI) / x *
                           (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
        return 1.0 - cdf;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsTest ks_normality(std::span<const double> samples) {
    const size_t n = samples.size();
    if (n < 8) throw std::invalid_argument("ks_normality requires at least 8 samples");
    MomentAccumulator acc;
    for (double x : samples) acc.push(x);
    const double mean = acc.mean;
    const double sd = std::sqrt(acc.sample_variance());
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    if (sd == 0.0) {
        // degenerate sample: the fitted CDF sits at 1/2 where the empirical
        // CDF jumps from 0 to 1
        return {0.5, kolmogorov_q(0.5 * sqrt_n)};
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f = std_normal_cdf((sorted[i] - mean) / sd);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        const double lo = f - static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(hi, lo));
    }
    return {d, kolmogorov_q(sqrt_n * d)};
}

std::vector<std::pair<double, double>> qq_points(std::span<const double> samples) {
    const size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("qq_points requires at least 2 samples");
    MomentAccumulator acc;
    for (double x : samples) acc.push(x);
    const double sd = std::sqrt(acc.sample_variance());
    if (sd == 0.0) throw degenerate_data_error("qq_points: zero sample variance");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out(n);
    for (size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        out[i] = {std_normal_quantile(p), (sorted[i] - acc.mean) / sd};
    }
    return out;
}

PairCorrelationSummary cross_pair_correlation(const EnsembleStats& stats,
                                              const std::vector<PairOfPairs>& pairs) {
    if (stats.replicates < 30)
        throw std::invalid_argument("cross_pair_correlation requires at least 30 replicates");
    PairCorrelationSummary summary;
    std::vector<double> abs_corrs;
    for (const auto& [first, second] : pairs) {
        const int i = stats.pair_index(first.first, first.second);
        const int j = stats.pair_index(second.first, second.second);
        if (i < 0 || j < 0)
            throw std::invalid_argument("cross_pair_correlation: pair not in the retained set");
        const auto& x = stats.retained_samples[i];
        const auto& y = stats.retained_samples[j];
        const size_t n = x.size();
        double mx = 0.0;
        double my = 0.0;
        for (size_t k = 0; k < n; ++k) {
            mx += x[k];
            my += y[k];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxx = 0.0;
        double syy = 0.0;
        double sxy = 0.0;
        for (size_t k = 0; k < n; ++k) {
            const double dx = x[k] - mx;
            const double dy = y[k] - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        const double denom = std::sqrt(sxx) * std::sqrt(syy);
        const double corr = denom > 0.0 ? sxy / denom : 0.0;
        summary.pairs.push_back(
            {first.first, first.second, second.first, second.second, corr});
        abs_corrs.push_back(std::abs(corr));
    }
    summary.median_abs = median_of(abs_corrs);
    return summary;
}

}  // namespace dmfp
