#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dmfp/cli.hpp"
#include "dmfp/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dmfp::io_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic mean field programming for Bayesian model-based RL"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string backend;
    std::uint64_t seed = 0;
    bool seed_set = false;

    const std::vector<std::string> names = {"sample", "solve", "dmfp", "validate", "stability"};
    const std::vector<std::string> descriptions = {
        "draw one MDP from the prior",
        "draw one MDP and run value iteration to the fixed point",
        "run the moment recursion and write the theory trajectory",
        "run the Monte-Carlo ensemble and compare against theory",
        "closed-form fixed point, Jacobian and eigenvalues",
    };
    for (size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "path to a JSON config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "master seed (overrides the config)")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--backend", backend, "gumbel | quadrature (overrides the config)")
            ->check(CLI::IsMember({"gumbel", "quadrature"}));
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        const std::string text = read_file(config_path);
        const std::string base_dir = std::filesystem::path(config_path).parent_path().string();
        dmfp::RunConfig cfg = dmfp::parse_config(text, base_dir.empty() ? "." : base_dir);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_set) cfg.seed = seed;
        if (backend == "gumbel") cfg.backend = dmfp::MaxMomentVariant::gumbel;
        if (backend == "quadrature") cfg.backend = dmfp::MaxMomentVariant::quadrature;
        return dmfp::run_subcommand(sub, cfg);
    } catch (const dmfp::config_error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
