#include "dmfp/sampler.hpp"

#include <cmath>
#include <string>

#include "dmfp/errors.hpp"

namespace dmfp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_next(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_replicate_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + kGolden * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix_next(sm);
    bool all_zero = true;
    for (auto word : state_) all_zero = all_zero && word == 0;
    if (all_zero) state_[0] = 1;  // xoshiro forbids the all-zero state
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++ (Blackman & Vigna)
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_unit_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

double Rng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    for (;;) {
        const double u = 2.0 * next_unit() - 1.0;
        const double v = 2.0 * next_unit() - 1.0;
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }
}

double Rng::next_gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be positive");
    if (shape < 1.0) {
        // boosting identity: G(a) = G(a + 1) * U^(1/a)
        const double boost = std::pow(next_unit_pos(), 1.0 / shape);
        return next_gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = next_unit_pos();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    // Lemire's multiply-shift rejection; unbiased and branch-light.
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<double> sample_dirichlet_row(std::span<const double> alpha_row, Rng& rng) {
    const size_t n = alpha_row.size();
    if (n == 0) throw invalid_prior_error("dirichlet row must be non-empty");
    for (size_t i = 0; i < n; ++i) {
        if (!(alpha_row[i] > 0.0))
            throw invalid_prior_error("dirichlet parameter must be positive (index " + std::to_string(i) +
                                      ")");
    }
    if (n == 1) return {1.0};
    std::vector<double> out(n);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        out[i] = rng.next_gamma(alpha_row[i]);
        total += out[i];
    }
    if (total <= 0.0) throw std::runtime_error("sample_dirichlet_row: all gamma draws underflowed");
    for (double& v : out) v /= total;
    return out;
}

SampledMdp sample_mdp(const PriorSpec& prior, std::uint64_t seed) {
    const auto violations = validate_prior(prior);
    if (!violations.empty()) throw invalid_prior_error(violations.front().message);

    SampledMdp mdp;
    mdp.discount = prior.discount;
    mdp.transitions = Grid3(prior.num_states, prior.num_actions, prior.num_states);
    mdp.rewards = Grid2(prior.num_states, prior.num_actions);

    Rng rng(seed);
    for (int s = 0; s < prior.num_states; ++s) {
        for (int a = 0; a < prior.num_actions; ++a) {
            const auto row = sample_dirichlet_row(prior.alpha.row(s, a), rng);
            auto dst = mdp.transitions.row(s, a);
            for (int s2 = 0; s2 < prior.num_states; ++s2) dst[s2] = row[s2];
        }
    }
    for (int s = 0; s < prior.num_states; ++s) {
        for (int a = 0; a < prior.num_actions; ++a) {
            const double sd2 = prior.reward_var(s, a);
            mdp.rewards(s, a) = sd2 > 0.0 ? prior.reward_mean(s, a) + std::sqrt(sd2) * rng.next_normal()
                                          : prior.reward_mean(s, a);
        }
    }
    return mdp;
}

}  // namespace dmfp
