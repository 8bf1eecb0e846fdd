#include "dmfp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dmfp/bellman.hpp"
#include "dmfp/engine.hpp"
#include "dmfp/errors.hpp"
#include "dmfp/harness.hpp"
#include "dmfp/parallel.hpp"
#include "dmfp/report.hpp"
#include "dmfp/sampler.hpp"
#include "json.hpp"

namespace dmfp {

namespace fs = std::filesystem;

namespace {

// Harness-level seed streams; replicate indices stay below 2^63 so these
// cannot collide with them.
constexpr std::uint64_t kCorrelationSelectionStream = (1ULL << 63) + 1;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    return out;
}

std::vector<int> snapshot_schedule(const RunConfig& cfg) {
    if (cfg.default_snapshots) return default_snapshot_schedule(cfg.max_iters);
    auto s = cfg.snapshots;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

void cmd_sample(const RunConfig& cfg, int workers, std::chrono::steady_clock::time_point start) {
    const PriorSpec prior = build_prior(cfg);
    const SampledMdp mdp = sample_mdp(prior, derive_replicate_seed(cfg.seed, 0));
    fs::create_directories(cfg.output_dir);
    {
        auto out = open_out((fs::path(cfg.output_dir) / "transitions.csv").string());
        for (int s = 0; s < mdp.num_states(); ++s) {
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const auto row = mdp.transitions.row(s, a);
                for (int s2 = 0; s2 < mdp.num_states(); ++s2)
                    out << (s2 ? "," : "") << format_double(row[s2]);
                out << '\n';
            }
        }
    }
    {
        auto out = open_out((fs::path(cfg.output_dir) / "rewards.csv").string());
        for (int s = 0; s < mdp.num_states(); ++s) {
            for (int a = 0; a < mdp.num_actions(); ++a)
                out << (a ? "," : "") << format_double(mdp.rewards(s, a));
            out << '\n';
        }
    }
    write_manifest(cfg.output_dir, "sample", cfg.digest, cfg.seed, workers, seconds_since(start));
}

void cmd_solve(const RunConfig& cfg, int workers, std::chrono::steady_clock::time_point start) {
    const PriorSpec prior = build_prior(cfg);
    const SampledMdp mdp = sample_mdp(prior, derive_replicate_seed(cfg.seed, 0));
    const SolveResult result = solve_q(mdp, cfg.eps, cfg.max_iters, workers);
    fs::create_directories(cfg.output_dir);
    {
        auto out = open_out((fs::path(cfg.output_dir) / "qstar.csv").string());
        out << "s,a,q\n";
        for (int s = 0; s < mdp.num_states(); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a)
                out << s << ',' << a << ',' << format_double(result.q.values(s, a)) << '\n';
    }
    {
        nlohmann::json j;
        j["iterations"] = result.iterations;
        j["residual"] = result.residual;
        j["converged"] = result.converged;
        auto out = open_out((fs::path(cfg.output_dir) / "solve.json").string());
        out << j.dump(2) << '\n';
    }
    if (!result.converged)
        std::cerr << "warning: value iteration hit max_iters before tolerance\n";
    write_manifest(cfg.output_dir, "solve", cfg.digest, cfg.seed, workers, seconds_since(start));
}

void cmd_dmfp(const RunConfig& cfg, int workers, std::chrono::steady_clock::time_point start) {
    const PriorSpec prior = build_prior(cfg);
    DmfpOptions opts;
    opts.backend.variant = cfg.backend;
    opts.max_iters = cfg.max_iters;
    opts.tol = cfg.eps;
    opts.workers = workers;
    const DmfpRun run = run_dmfp(prior, opts);
    if (!run.converged) std::cerr << "warning: moment recursion hit max_iters before tolerance\n";

    fs::create_directories(cfg.output_dir);
    auto out = open_out((fs::path(cfg.output_dir) / "theory.csv").string());
    out << "iteration,s,a,theory_mean,theory_var\n";
    auto emit = [&](int label, const MomentField& f) {
        for (int s = 0; s < prior.num_states; ++s)
            for (int a = 0; a < prior.num_actions; ++a)
                out << label << ',' << s << ',' << a << ',' << format_double(f.mean(s, a)) << ','
                    << format_double(f.var(s, a)) << '\n';
    };
    const int last = static_cast<int>(run.trajectory.size()) - 1;
    for (int iter : snapshot_schedule(cfg)) {
        if (iter > last) break;
        emit(iter, run.trajectory[iter]);
    }
    emit(-1, run.trajectory.back());
    write_manifest(cfg.output_dir, "dmfp", cfg.digest, cfg.seed, workers, seconds_since(start));
}

void cmd_validate(const RunConfig& cfg, int workers, std::chrono::steady_clock::time_point start) {
    const PriorSpec prior = build_prior(cfg);
    const std::vector<int> snapshots = snapshot_schedule(cfg);

    EnsembleOptions opts;
    opts.snapshot_iters = snapshots;
    opts.retain_pairs =
        choose_retained_pairs(prior.num_states, prior.num_actions, cfg.retained_pairs, cfg.seed);
    opts.eps = cfg.eps;
    opts.max_iters = cfg.max_iters;
    opts.workers = workers;
    const EnsembleStats stats = run_ensemble(prior, cfg.replicates, cfg.seed, opts);

    DmfpOptions dopts;
    dopts.backend.variant = cfg.backend;
    dopts.max_iters = cfg.max_iters;
    dopts.tol = cfg.eps;
    dopts.workers = workers;
    const DmfpRun theory = run_dmfp(prior, dopts);

    ComparisonReport report = compare_theory(stats, sample_trajectory(theory, snapshots));
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;

    if (cfg.replicates >= 8) {
        for (size_t p = 0; p < stats.retained_pairs.size(); ++p) {
            const auto [s, a] = stats.retained_pairs[p];
            const KsTest ks = ks_normality(stats.retained_samples[p]);
            report.ks.push_back({s, a, ks.statistic, ks.p_value});
        }
    }
    if (!stats.retained_pairs.empty()) {
        try {
            report.qq = qq_points(stats.retained_samples.front());
        } catch (const degenerate_data_error&) {
            // deterministic samples have no Q-Q plot
        }
    }
    if (cfg.replicates >= 30 && stats.retained_pairs.size() >= 2) {
        const size_t n = stats.retained_pairs.size();
        Rng rng(derive_replicate_seed(cfg.seed, kCorrelationSelectionStream));
        std::vector<PairOfPairs> chosen;
        const size_t want = std::min<size_t>(100, n * (n - 1) / 2);
        while (chosen.size() < want) {
            const size_t i = static_cast<size_t>(rng.next_below(n));
            const size_t j = static_cast<size_t>(rng.next_below(n));
            if (i == j) continue;
            PairOfPairs cand{stats.retained_pairs[std::min(i, j)], stats.retained_pairs[std::max(i, j)]};
            if (std::find(chosen.begin(), chosen.end(), cand) == chosen.end()) chosen.push_back(cand);
        }
        const PairCorrelationSummary corr = cross_pair_correlation(stats, chosen);
        report.correlations = corr.pairs;
        report.median_abs_correlation = corr.median_abs;
    }

    report.wall_seconds = seconds_since(start);
    write_report(report, cfg.output_dir);
    write_manifest(cfg.output_dir, "validate", cfg.digest, cfg.seed, workers, report.wall_seconds);
}

void cmd_stability(const RunConfig& cfg, int workers, std::chrono::steady_clock::time_point start) {
    if (cfg.reward_mean.is_file || cfg.reward_std.is_file)
        throw std::invalid_argument("stability requires scalar reward_mean and reward_std");
    IidParams params;
    params.discount = cfg.discount;
    params.reward_mean = cfg.reward_mean.value;
    params.reward_var = cfg.reward_std.value * cfg.reward_std.value;
    params.action_count = cfg.num_actions;
    const GumbelConstants consts = gumbel_constants(cfg.num_actions);
    const auto [mu_star, nu_star] = iid_fixed_point(params, consts);
    const JacobianSpectrum spec = jacobian_spectrum(params, consts, nu_star);

    nlohmann::json j;
    j["action_count"] = cfg.num_actions;
    j["discount"] = cfg.discount;
    j["b"] = consts.b;
    j["a"] = consts.a;
    j["gamma_em"] = consts.gamma_em;
    j["mu_star"] = mu_star;
    j["nu_star"] = nu_star;
    j["jacobian"] = {{spec.jacobian[0][0], spec.jacobian[0][1]},
                     {spec.jacobian[1][0], spec.jacobian[1][1]}};
    j["eigenvalues"] = {spec.eigenvalues[0], spec.eigenvalues[1]};
    j["max_eigenvalue"] = spec.eigenvalues[0];
    fs::create_directories(cfg.output_dir);
    auto out = open_out((fs::path(cfg.output_dir) / "stability.json").string());
    out << j.dump(2) << '\n';
    write_manifest(cfg.output_dir, "stability", cfg.digest, cfg.seed, workers, seconds_since(start));
}

}  // namespace

int run_subcommand(const std::string& name, const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const int workers = worker_count();
    try {
        if (name == "sample")
            cmd_sample(config, workers, start);
        else if (name == "solve")
            cmd_solve(config, workers, start);
        else if (name == "dmfp")
            cmd_dmfp(config, workers, start);
        else if (name == "validate")
            cmd_validate(config, workers, start);
        else if (name == "stability")
            cmd_stability(config, workers, start);
        else {
            std::cerr << "unknown subcommand: " << name << '\n';
            return 1;
        }
    } catch (const config_error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace dmfp
