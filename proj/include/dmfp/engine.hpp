#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "dmfp/core_types.hpp"

namespace dmfp {

/// Normalizing constants for the Type-I (Gumbel) approximation to the
/// maximum of `action_count` i.i.d. Gaussians:
///   b solves b * sqrt(2*pi) * exp(b^2 / 2) = action_count  (residual <= 1e-12)
///   a = b / (b^2 + 1)
/// b is strictly increasing in the action count.
struct GumbelConstants {
    int action_count = 0;
    double b = 0.0;
    double a = 0.0;
    double gamma_em = 0.5772156649015329;  // Euler-Mascheroni
};

GumbelConstants gumbel_constants(int action_count);

/// Scalar parameters for the identically-distributed moment recursion.
struct IidParams {
    double discount = 0.0;
    double reward_mean = 0.0;
    double reward_var = 0.0;
    int action_count = 1;
};

enum class MaxMomentVariant { gumbel, quadrature };

/// Selects how max moments are computed: the closed-form Gumbel recursion or
/// product-of-CDFs quadrature (reference route).
struct MaxMomentBackend {
    MaxMomentVariant variant = MaxMomentVariant::quadrature;
    double tail_width = 8.0;  // integration half-width in standard deviations, >= 6
    double tol = 1e-10;       // quadrature tolerance
};

struct MaxMoments {
    double mean = 0.0;
    double var = 0.0;
};

/// Mean and variance of max_i X_i for independent Gaussians X_i ~ N(means[i],
/// vars[i]). The CDF of the maximum is the product of the component CDFs;
/// moments come from tail integrals over [L, U] with
///   L = min_i(mean_i - w * sd_i), U = max_i(mean_i + w * sd_i):
///   E[M]   = L   + int_L^U (1 - F(u)) du
///   E[M^2] = L^2 + int_L^U 2u (1 - F(u)) du
/// Zero-variance components contribute step factors 1{u >= mean_i}.
/// Always uses quadrature; `backend` supplies tail width and tolerance.
MaxMoments max_moments_general(std::span<const double> means, std::span<const double> vars,
                               const MaxMomentBackend& backend);

/// Same for `action_count` identical components N(mu, nu). The gumbel variant
/// returns the closed-form increments
///   mean = mu + sqrt(nu) * (b + a * gamma),  var = (pi^2 / 12) * a * nu;
/// the quadrature variant delegates to max_moments_general.
MaxMoments max_moments_identical(double mu, double nu, int action_count,
                                 const MaxMomentBackend& backend);

/// One step of the scalar identically-distributed moment recursion:
///   mu'  = reward_mean + discount * (mu + sqrt(nu) * (b + a * gamma))
///   nu'  = reward_var  + discount^2 * (pi^2 / 12) * a * nu
std::pair<double, double> iid_dmfp_step(double mu, double nu, const IidParams& params,
                                        const GumbelConstants& consts);

/// Closed-form fixed point of iid_dmfp_step: solve the variance equation
/// first, then the mean equation. Throws instability_error if the variance
/// contraction factor reaches 1 (unreachable for discount < 1).
std::pair<double, double> iid_fixed_point(const IidParams& params, const GumbelConstants& consts);

/// Jacobian of the scalar (mu, nu) map at a fixed point with variance
/// nu_star > 0. The matrix is upper triangular:
///   [ beta   beta * (b + a*gamma) / (2 * sqrt(nu_star)) ]
///   [ 0      beta^2 * (pi^2 / 12) * a                   ]
/// so the eigenvalues are the diagonal, returned in descending order; the
/// leading one equals the discount factor.
struct JacobianSpectrum {
    std::array<double, 2> eigenvalues{};               // descending
    std::array<std::array<double, 2>, 2> jacobian{};   // row-major
};

JacobianSpectrum jacobian_spectrum(const IidParams& params, const GumbelConstants& consts,
                                   double nu_star);

/// One field-level moment-propagation step.
///
/// Quadrature variant: per next-state s', (m(s'), v(s')) are the moments of
/// the maximum over that state's action ensemble; then for each (s,a) with
/// Dirichlet row mean p and concentration total a0:
///   mean'(s,a) = reward_mean + discount * sum_{s'} p_{s'} m(s')
///   var'(s,a)  = reward_var + discount^2 * [ sum_{s'} p_{s'}(1-p_{s'})/(1+a0) * v(s')
///                + (sum_{s'} p_{s'} m(s')^2 - (sum_{s'} p_{s'} m(s'))^2) / (1+a0) ]
/// which is the covariance double sum collapsed to O(S) per (s,a): the
/// expectation of a product of maxima factorizes across distinct next states,
/// and the diagonal carries the max's second moment.
///
/// Gumbel variant: the closed-form recursion applied field-wide with each
/// state's action ensemble summarized by its action-averaged moments
/// (exact when moments are identical across the field):
///   m(s') = avg_mu(s') + sqrt(avg_nu(s')) * (b + a * gamma)
///   mean'(s,a) = reward_mean + discount * sum_{s'} p_{s'} m(s')
///   var'(s,a)  = reward_var + discount^2 * (pi^2 / 12) * a * sum_{s'} p_{s'} avg_nu(s')
MomentField general_dmfp_step(const MomentField& field, const PriorSpec& prior,
                              const MaxMomentBackend& backend, int workers = 1);

/// Policy-evaluation step: (m(s'), v(s')) = (mean(s', pi(s')), var(s', pi(s')));
/// no max-moment backend involved.
MomentField dmfp_policy_step(const MomentField& field, const PriorSpec& prior, const Policy& pi,
                             int workers = 1);

struct DmfpOptions {
    MaxMomentBackend backend;
    int max_iters = 1000;
    double tol = 1e-8;
    int workers = 1;
};

/// Full moment trajectory from (mean, var) = (0, 0); trajectory[n] is the
/// n-th iterate, so finite-horizon theory is a trajectory prefix.
struct DmfpRun {
    std::vector<MomentField> trajectory;
    bool converged = false;
    int iterations = 0;
};

DmfpRun run_dmfp(const PriorSpec& prior, const DmfpOptions& opts);
DmfpRun run_dmfp_policy(const PriorSpec& prior, const Policy& pi, const DmfpOptions& opts);

}  // namespace dmfp
