#include "dmfp/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dmfp/errors.hpp"
#include "json.hpp"

namespace dmfp {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "num_states", "num_actions", "discount",  "alpha",          "reward_mean",
    "reward_std", "replicates",  "seed",      "eps",            "max_iters",
    "backend",    "snapshots",   "retained_pairs", "output_dir",
};

bool file_exists(const std::string& base_dir, const std::string& rel) {
    namespace fs = std::filesystem;
    return fs::exists(fs::path(base_dir) / rel);
}

std::vector<std::vector<double>> read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                throw io_error("non-numeric cell in " + path + ": '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    std::vector<std::string> errors;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw config_error({std::string("malformed JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw config_error({"config must be a JSON object"});

    for (const auto& [key, _] : doc.items()) {
        if (!kKnownKeys.count(key)) errors.push_back("unknown key '" + key + "'");
    }

    RunConfig cfg;
    cfg.base_dir = base_dir;

    auto require = [&](const char* key) -> const json* {
        if (!doc.contains(key)) {
            errors.push_back(std::string("missing required field '") + key + "'");
            return nullptr;
        }
        return &doc.at(key);
    };

    if (const json* v = require("num_states")) {
        if (!v->is_number_integer() || v->get<long long>() < 1)
            errors.push_back("num_states must be a positive integer");
        else
            cfg.num_states = v->get<int>();
    }
    if (const json* v = require("num_actions")) {
        if (!v->is_number_integer() || v->get<long long>() < 1)
            errors.push_back("num_actions must be a positive integer");
        else
            cfg.num_actions = v->get<int>();
    }
    if (const json* v = require("discount")) {
        if (!v->is_number() || !(v->get<double>() >= 0.0 && v->get<double>() < 1.0))
            errors.push_back("discount must lie in [0, 1)");
        else
            cfg.discount = v->get<double>();
    }
    if (const json* v = require("alpha")) {
        if (v->is_number()) {
            if (!(v->get<double>() > 0.0))
                errors.push_back("alpha scalar must be positive");
            else {
                cfg.alpha.kind = AlphaKind::scalar;
                cfg.alpha.value = v->get<double>();
            }
        } else if (v->is_string()) {
            const std::string s = v->get<std::string>();
            if (s == "1/N") {
                cfg.alpha.kind = AlphaKind::one_over_n;
            } else {
                cfg.alpha.kind = AlphaKind::file;
                cfg.alpha.path = s;
                if (!file_exists(base_dir, s)) errors.push_back("alpha file does not exist: " + s);
            }
        } else {
            errors.push_back("alpha must be a positive number, \"1/N\", or a file path");
        }
    }
    auto parse_reward = [&](const char* key, RewardFieldSpec& out, bool nonnegative) {
        if (const json* v = require(key)) {
            if (v->is_number()) {
                const double x = v->get<double>();
                if (nonnegative && !(x >= 0.0)) {
                    errors.push_back(std::string(key) + " must be nonnegative");
                } else {
                    out.is_file = false;
                    out.value = x;
                }
            } else if (v->is_string()) {
                out.is_file = true;
                out.path = v->get<std::string>();
                if (!file_exists(base_dir, out.path))
                    errors.push_back(std::string(key) + " file does not exist: " + out.path);
            } else {
                errors.push_back(std::string(key) + " must be a number or a file path");
            }
        }
    };
    parse_reward("reward_mean", cfg.reward_mean, false);
    parse_reward("reward_std", cfg.reward_std, true);

    if (const json* v = require("replicates")) {
        if (!v->is_number_integer() || v->get<long long>() < 1)
            errors.push_back("replicates must be a positive integer");
        else
            cfg.replicates = v->get<int>();
    }
    if (const json* v = require("seed")) {
        if (!v->is_number_unsigned() && !v->is_number_integer())
            errors.push_back("seed must be a nonnegative integer");
        else if (v->is_number_integer() && v->get<long long>() < 0)
            errors.push_back("seed must be a nonnegative integer");
        else
            cfg.seed = v->get<std::uint64_t>();
    }

    if (doc.contains("eps")) {
        const json& v = doc.at("eps");
        if (!v.is_number() || !(v.get<double>() > 0.0))
            errors.push_back("eps must be a positive number");
        else
            cfg.eps = v.get<double>();
    }
    if (doc.contains("max_iters")) {
        const json& v = doc.at("max_iters");
        if (!v.is_number_integer() || v.get<long long>() < 1)
            errors.push_back("max_iters must be a positive integer");
        else
            cfg.max_iters = v.get<int>();
    }
    if (doc.contains("backend")) {
        const json& v = doc.at("backend");
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "gumbel")
            cfg.backend = MaxMomentVariant::gumbel;
        else if (s == "quadrature")
            cfg.backend = MaxMomentVariant::quadrature;
        else
            errors.push_back("backend must be \"gumbel\" or \"quadrature\"");
    }
    if (doc.contains("snapshots")) {
        const json& v = doc.at("snapshots");
        if (v.is_string() && v.get<std::string>() == "default") {
            cfg.default_snapshots = true;
        } else if (v.is_array()) {
            cfg.default_snapshots = false;
            bool ok = true;
            for (const auto& e : v) {
                if (!e.is_number_integer() || e.get<long long>() < 1) {
                    ok = false;
                    break;
                }
                cfg.snapshots.push_back(e.get<int>());
            }
            if (!ok) {
                errors.push_back("snapshots must be \"default\" or an array of integers >= 1");
                cfg.snapshots.clear();
            }
        } else {
            errors.push_back("snapshots must be \"default\" or an array of integers >= 1");
        }
    }
    if (doc.contains("retained_pairs")) {
        const json& v = doc.at("retained_pairs");
        if (!v.is_number_integer() || v.get<long long>() < 1)
            errors.push_back("retained_pairs must be a positive integer");
        else
            cfg.retained_pairs = v.get<int>();
    }
    if (doc.contains("output_dir")) {
        const json& v = doc.at("output_dir");
        if (!v.is_string() || v.get<std::string>().empty())
            errors.push_back("output_dir must be a non-empty string");
        else
            cfg.output_dir = v.get<std::string>();
    }

    if (!errors.empty()) throw config_error(std::move(errors));

    cfg.canonical_json = doc.dump();  // nlohmann objects iterate in sorted key order
    cfg.digest = fnv1a_hex(cfg.canonical_json);
    return cfg;
}

PriorSpec build_prior(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const int S = cfg.num_states;
    const int A = cfg.num_actions;

    PriorSpec prior;
    prior.num_states = S;
    prior.num_actions = A;
    prior.discount = cfg.discount;

    switch (cfg.alpha.kind) {
        case AlphaKind::scalar:
            prior.alpha = Grid3(S, A, S, cfg.alpha.value);
            break;
        case AlphaKind::one_over_n:
            prior.alpha = Grid3(S, A, S, 1.0 / static_cast<double>(S));
            break;
        case AlphaKind::file: {
            const auto rows = read_csv_matrix((fs::path(cfg.base_dir) / cfg.alpha.path).string());
            if (rows.size() != static_cast<size_t>(S) * A)
                throw config_error({"alpha file must have num_states*num_actions rows"});
            prior.alpha = Grid3(S, A, S);
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    const auto& row = rows[static_cast<size_t>(s) * A + a];
                    if (row.size() != static_cast<size_t>(S))
                        throw config_error({"alpha file rows must have num_states columns"});
                    for (int s2 = 0; s2 < S; ++s2) prior.alpha(s, a, s2) = row[s2];
                }
            }
            break;
        }
    }

    auto load_field = [&](const RewardFieldSpec& spec, bool square) {
        Grid2 out(S, A);
        if (!spec.is_file) {
            const double v = square ? spec.value * spec.value : spec.value;
            for (auto& x : out.data) x = v;
            return out;
        }
        const auto rows = read_csv_matrix((fs::path(cfg.base_dir) / spec.path).string());
        if (rows.size() != static_cast<size_t>(S))
            throw config_error({"reward file must have num_states rows: " + spec.path});
        for (int s = 0; s < S; ++s) {
            if (rows[s].size() != static_cast<size_t>(A))
                throw config_error({"reward file rows must have num_actions columns: " + spec.path});
            for (int a = 0; a < A; ++a) out(s, a) = square ? rows[s][a] * rows[s][a] : rows[s][a];
        }
        return out;
    };
    prior.reward_mean = load_field(cfg.reward_mean, false);
    prior.reward_var = load_field(cfg.reward_std, true);

    const auto violations = validate_prior(prior);
    if (!violations.empty()) {
        std::vector<std::string> messages;
        for (const auto& v : violations) messages.push_back(v.message);
        throw config_error(std::move(messages));
    }
    return prior;
}

}  // namespace dmfp
