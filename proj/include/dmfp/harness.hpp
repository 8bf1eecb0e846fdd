#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dmfp/core_types.hpp"
#include "dmfp/engine.hpp"
#include "dmfp/numerics.hpp"

namespace dmfp {

struct EnsembleOptions {
    std::vector<int> snapshot_iters;               // sorted ascending, each >= 1
    std::vector<std::pair<int, int>> retain_pairs; // (s,a) pairs whose converged samples are kept
    double eps = 1e-8;
    int max_iters = 1000;
    int workers = 1;
    std::optional<Policy> policy;  // when set, replicates run policy evaluation instead
};

/// Streaming per-(s,a) moments at each snapshot iteration plus convergence,
/// with raw converged samples retained for the configured subset of pairs.
/// Accumulation runs over fixed-size replicate blocks merged in block order,
/// so results are identical for any worker count.
struct EnsembleStats {
    int num_states = 0;
    int num_actions = 0;
    int replicates = 0;
    std::vector<int> snapshot_iters;
    std::vector<std::vector<MomentAccumulator>> snapshot_moments;  // [slot][(s,a)]
    std::vector<MomentAccumulator> converged_moments;              // [(s,a)]
    std::vector<std::pair<int, int>> retained_pairs;
    std::vector<std::vector<double>> retained_samples;             // [pair][replicate]
    std::vector<int> iterations;                                   // per replicate
    std::vector<std::uint8_t> replicate_converged;                 // per replicate

    /// Index into retained_pairs, or -1 when (s,a) is not retained.
    int pair_index(int s, int a) const;
};

/// Runs K replicates: replicate k samples an MDP with
/// derive_replicate_seed(master_seed, k), runs value iteration recording the
/// table at each snapshot iteration and at convergence. Snapshots past a
/// replicate's convergence record its converged table (within eps of later
/// iterates). Requires K >= 2.
EnsembleStats run_ensemble(const PriorSpec& prior, int replicates, std::uint64_t master_seed,
                           const EnsembleOptions& opts);

/// Default schedule: every iteration up to 10, then powers of two up to
/// max_iters (the converged table is always recorded separately).
std::vector<int> default_snapshot_schedule(int max_iters);

/// Seeded shuffle of all (s,a) pairs; the first `count` become the retained set.
std::vector<std::pair<int, int>> choose_retained_pairs(int num_states, int num_actions, int count,
                                                       std::uint64_t seed);

/// Theory trajectory evaluated at the ensemble's snapshot iterations, with
/// the run's final field appended as the converged entry. Iterations beyond
/// the trajectory use its last field.
std::vector<MomentField> sample_trajectory(const DmfpRun& run, const std::vector<int>& iters);

struct SnapshotComparison {
    int iteration = 0;  // -1 marks the converged slot
    std::vector<double> emp_mean, emp_var, theory_mean, theory_var;
    std::vector<double> rel_err_mean, rel_err_var;  // NaN where |theory| <= floor
    std::vector<double> abs_err_mean, abs_err_var;
    double median_rel_err_mean = 0.0, p90_rel_err_mean = 0.0, max_rel_err_mean = 0.0;
    double median_rel_err_var = 0.0, p90_rel_err_var = 0.0, max_rel_err_var = 0.0;
};

struct KsResult {
    int s = 0, a = 0;
    double statistic = 0.0;
    double p_value = 0.0;
};

struct PairCorrelation {
    int s1 = 0, a1 = 0, s2 = 0, a2 = 0;
    double corr = 0.0;
};

struct ComparisonReport {
    int num_states = 0;
    int num_actions = 0;
    int replicates = 0;
    std::vector<SnapshotComparison> snapshots;  // converged slot last
    std::vector<KsResult> ks;
    std::vector<PairCorrelation> correlations;
    double median_abs_correlation = 0.0;
    std::vector<std::pair<double, double>> qq;  // (theoretical, sample) quantiles
    std::uint64_t seed = 0;
    std::string config_digest;
    double wall_seconds = 0.0;
};

/// Relative-error floor: relative errors are reported only where the theory
/// magnitude exceeds this.
inline constexpr double kRelErrFloor = 1e-9;

/// Elementwise empirical-vs-theory comparison. `theory_at_snapshots` must
/// hold one field per snapshot slot plus the converged field last; a size
/// mismatch is an error.
ComparisonReport compare_theory(const EnsembleStats& stats,
                                const std::vector<MomentField>& theory_at_snapshots);

struct KsTest {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov statistic against a Gaussian with the
/// sample's own mean and variance; p-value from the asymptotic Kolmogorov
/// distribution. Estimating the parameters from the same sample makes the
/// p-value approximate and conservative (Lilliefors caveat). Requires >= 8
/// samples. A zero-variance sample returns statistic 0.5.
KsTest ks_normality(std::span<const double> samples);

/// Standardized order statistics against normal plotting positions
/// Phi^-1((i - 0.5) / n). Requires >= 2 samples and nonzero sample variance.
std::vector<std::pair<double, double>> qq_points(std::span<const double> samples);

using PairOfPairs = std::pair<std::pair<int, int>, std::pair<int, int>>;

struct PairCorrelationSummary {
    std::vector<PairCorrelation> pairs;
    double median_abs = 0.0;
};

/// Pearson correlation of converged samples across replicates per requested
/// pair of retained (s,a) coordinates. Requires >= 30 replicates.
PairCorrelationSummary cross_pair_correlation(const EnsembleStats& stats,
                                              const std::vector<PairOfPairs>& pairs);

}  // namespace dmfp
