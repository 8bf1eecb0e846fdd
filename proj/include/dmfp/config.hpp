#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmfp/core_types.hpp"
#include "dmfp/engine.hpp"

namespace dmfp {

enum class AlphaKind { scalar, one_over_n, file };

struct AlphaSpec {
    AlphaKind kind = AlphaKind::one_over_n;
    double value = 0.0;  // scalar kind
    std::string path;    // file kind: S*A rows of S comma-separated concentrations
};

struct RewardFieldSpec {
    bool is_file = false;
    double value = 0.0;
    std::string path;  // S rows of A comma-separated values
};

/// Fully validated run configuration; built from a flat JSON document.
struct RunConfig {
    int num_states = 0;
    int num_actions = 0;
    double discount = 0.0;
    AlphaSpec alpha;
    RewardFieldSpec reward_mean;
    RewardFieldSpec reward_std;  // standard deviation, not variance
    int replicates = 0;
    std::uint64_t seed = 0;
    double eps = 1e-8;
    int max_iters = 1000;
    MaxMomentVariant backend = MaxMomentVariant::quadrature;
    bool default_snapshots = true;
    std::vector<int> snapshots;
    int retained_pairs = 32;
    std::string output_dir = "out";

    std::string base_dir = ".";       // directory file paths resolve against
    std::string canonical_json;       // sorted-key dump used for the digest
    std::string digest;               // FNV-1a 64 hex of canonical_json
};

/// Parses and validates a flat JSON config document. Unknown keys are
/// rejected; every field-level problem is collected and thrown together as a
/// config_error. Referenced files must exist under base_dir.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Materializes the prior (loading any referenced files).
PriorSpec build_prior(const RunConfig& config);

/// FNV-1a 64-bit hex digest.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace dmfp
