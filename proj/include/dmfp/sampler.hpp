#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dmfp/core_types.hpp"

namespace dmfp {

/// Identifies one replicate of a seeded ensemble.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate_index = 0;
};

/// Derives a per-replicate seed from the master seed by a splitmix64-style
/// avalanche of master + GOLDEN * (index + 1). The finalizer is a bijection
/// and GOLDEN is odd, so distinct indices always map to distinct seeds.
/// Constants (also documented in the README):
///   GOLDEN = 0x9E3779B97F4A7C15
///   mix:    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///           z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
std::uint64_t derive_replicate_seed(std::uint64_t master_seed, std::uint64_t index);

/// xoshiro256++ generator, state seeded through splitmix64. Fully specified,
/// platform-independent; no global state.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1), 53-bit resolution.
    double next_unit();

    /// Uniform on (0, 1]; safe under log().
    double next_unit_pos();

    /// Standard normal via the Marsaglia polar method (second value cached).
    double next_normal();

    /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boosting
    /// identity G(a) = G(a + 1) * U^(1/a).
    double next_gamma(double shape);

    /// Uniform integer in [0, n) (Lemire reduction).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// One Dirichlet(alpha) draw as normalized Gamma(alpha_i, 1) variates.
/// Output lies on the simplex: entries >= 0, sum within 1e-12 of 1.
std::vector<double> sample_dirichlet_row(std::span<const double> alpha_row, Rng& rng);

/// Draws a full MDP: each transition row Dirichlet(alpha_{sa}), each reward
/// Gaussian(reward_mean, reward_var). Fully determined by (prior, seed); rows
/// are drawn in row-major (s,a) order, then all rewards.
SampledMdp sample_mdp(const PriorSpec& prior, std::uint64_t seed);

}  // namespace dmfp
