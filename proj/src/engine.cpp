#include "dmfp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dmfp/errors.hpp"
#include "dmfp/numerics.hpp"
#include "dmfp/parallel.hpp"

namespace dmfp {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kPi2Over12 = 0.8224670334241132;  // pi^2 / 12

void check_backend(const MaxMomentBackend& backend) {
    if (!(backend.tail_width >= 6.0))
        throw std::invalid_argument("max-moment backend tail width must be >= 6");
    if (!(backend.tol > 0.0)) throw std::invalid_argument("max-moment backend tolerance must be positive");
}

}  // namespace

GumbelConstants gumbel_constants(int action_count) {
    if (action_count < 1) throw std::invalid_argument("gumbel_constants requires action_count >= 1");

    static std::mutex cache_mutex;
    static std::unordered_map<int, GumbelConstants> cache;
    {
        std::scoped_lock lock(cache_mutex);
        auto it = cache.find(action_count);
        if (it != cache.end()) return it->second;
    }

    const double target = static_cast<double>(action_count);
    auto f = [&](double b) { return b * kSqrt2Pi * std::exp(0.5 * b * b) - target; };
    // residual measured in long double: near b ~ 3 the double evaluation of f
    // carries ~A*eps of rounding noise, comparable to the 1e-12 bound itself
    auto residual = [&](double b) {
        const long double bl = b;
        return fabsl(bl * sqrtl(2.0L * M_PIl) * expl(0.5L * bl * bl) - static_cast<long double>(target));
    };
    double b = bisect_root(f, 1e-8, 10.0, 0.0);
    // Newton then nearest-neighbor polish so b is the closest representable
    // root; the residual bound A*(1+b^2)*2^-53 stays under 1e-12 up to
    // |A| = 1024
    for (int i = 0; i < 2; ++i) {
        const double deriv = kSqrt2Pi * std::exp(0.5 * b * b) * (1.0 + b * b);
        b -= f(b) / deriv;
    }
    for (double cand : {std::nextafter(b, 0.0), std::nextafter(b, 10.0)}) {
        if (residual(cand) < residual(b)) b = cand;
    }
    if (residual(b) > 1e-12)
        throw std::runtime_error("gumbel_constants: defining equation residual above 1e-12");

    GumbelConstants consts;
    consts.action_count = action_count;
    consts.b = b;
    consts.a = b / (b * b + 1.0);

    std::scoped_lock lock(cache_mutex);
    cache.emplace(action_count, consts);
    return consts;
}

MaxMoments max_moments_general(std::span<const double> means, std::span<const double> vars,
                               const MaxMomentBackend& backend) {
    check_backend(backend);
    const size_t n = means.size();
    if (n == 0) throw std::invalid_argument("max_moments_general requires at least one component");
    if (vars.size() != n) throw std::invalid_argument("max_moments_general: means/vars length mismatch");
    for (size_t i = 0; i < n; ++i) {
        if (!(vars[i] >= 0.0)) throw std::invalid_argument("max_moments_general: negative variance");
    }
    if (n == 1) return {means[0], vars[0]};

    const double w = backend.tail_width;
    double lo = means[0];
    double hi = means[0];
    std::vector<double> sd(n);
    for (size_t i = 0; i < n; ++i) {
        sd[i] = std::sqrt(vars[i]);
        lo = std::min(lo, means[i] - w * sd[i]);
        hi = std::max(hi, means[i] + w * sd[i]);
    }

    // Components whose spread is invisible at the integration scale act as
    // point masses; collectively they contribute one step factor at the
    // largest such mean. This keeps the integrand smooth.
    const double sigma_floor = 1e-9 * std::max(hi - lo, 1e-300);
    double step_at = -std::numeric_limits<double>::infinity();
    std::vector<double> sm_mean;
    std::vector<double> sm_sd;
    sm_mean.reserve(n);
    sm_sd.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (sd[i] <= sigma_floor)
            step_at = std::max(step_at, means[i]);
        else {
            sm_mean.push_back(means[i]);
            sm_sd.push_back(sd[i]);
        }
    }

    // All deterministic: the maximum is the largest mean.
    if (sm_mean.empty()) return {step_at, 0.0};

    // F(u) = prod_i Phi((u - mean_i) / sd_i) for u >= step_at, zero below, so
    //   E[M]   = d + int_d^U (1 - F) du
    //   E[M^2] = d^2 + int_d^U 2u (1 - F) du        with d = clamp(step_at, L, U).
    const double d = std::isfinite(step_at) ? std::clamp(step_at, lo, hi) : lo;
    auto tail_pair = [&](double u) -> std::pair<double, double> {
        double prod = 1.0;
        for (size_t i = 0; i < sm_mean.size(); ++i) {
            prod *= std_normal_cdf((u - sm_mean[i]) / sm_sd[i]);
            if (prod == 0.0) break;
        }
        const double t = 1.0 - prod;
        return {t, 2.0 * u * t};
    };

    double i1 = 0.0;
    double i2 = 0.0;
    if (d < hi) {
        const auto both = detail::integrate_pair(tail_pair, d, hi, backend.tol);
        i1 = both.first;
        i2 = both.second;
    }
    const double mean = d + i1;
    const double second = d * d + i2;
    double var = second - mean * mean;
    if (var < 0.0) {
        if (var < -1e-8 * std::max(1.0, std::abs(second)))
            throw quadrature_error("max_moments_general produced a materially negative variance");
        var = 0.0;
    }
    return {mean, var};
}

MaxMoments max_moments_identical(double mu, double nu, int action_count,
                                 const MaxMomentBackend& backend) {
    if (action_count < 1) throw std::invalid_argument("max_moments_identical requires action_count >= 1");
    if (!(nu >= 0.0)) throw std::invalid_argument("max_moments_identical: negative variance");
    if (action_count == 1 || nu == 0.0) {
        if (nu == 0.0) return {mu, 0.0};
        return {mu, nu};
    }
    if (backend.variant == MaxMomentVariant::gumbel) {
        const GumbelConstants c = gumbel_constants(action_count);
        return {mu + std::sqrt(nu) * (c.b + c.a * c.gamma_em), kPi2Over12 * c.a * nu};
    }
    std::vector<double> means(action_count, mu);
    std::vector<double> vars(action_count, nu);
    return max_moments_general(means, vars, backend);
}

std::pair<double, double> iid_dmfp_step(double mu, double nu, const IidParams& params,
                                        const GumbelConstants& consts) {
    if (!(nu >= 0.0)) throw std::invalid_argument("iid_dmfp_step: negative variance");
    const double beta = params.discount;
    const double mu_next =
        params.reward_mean + beta * (mu + std::sqrt(nu) * (consts.b + consts.a * consts.gamma_em));
    const double nu_next = params.reward_var + beta * beta * kPi2Over12 * consts.a * nu;
    return {mu_next, nu_next};
}

std::pair<double, double> iid_fixed_point(const IidParams& params, const GumbelConstants& consts) {
    const double beta = params.discount;
    const double contraction = beta * beta * kPi2Over12 * consts.a;
    if (!(contraction < 1.0))
        throw instability_error("iid_fixed_point: variance recursion is not a contraction");
    const double nu_star = params.reward_var / (1.0 - contraction);
    const double mu_star =
        (params.reward_mean + beta * std::sqrt(nu_star) * (consts.b + consts.a * consts.gamma_em)) /
        (1.0 - beta);
    return {mu_star, nu_star};
}

JacobianSpectrum jacobian_spectrum(const IidParams& params, const GumbelConstants& consts,
                                   double nu_star) {
    if (!(nu_star > 0.0)) throw std::invalid_argument("jacobian_spectrum requires nu_star > 0");
    const double beta = params.discount;
    JacobianSpectrum out;
    out.jacobian[0][0] = beta;
    out.jacobian[0][1] = beta * (consts.b + consts.a * consts.gamma_em) / (2.0 * std::sqrt(nu_star));
    out.jacobian[1][0] = 0.0;
    out.jacobian[1][1] = beta * beta * kPi2Over12 * consts.a;
    // Triangular, so the eigenvalues are the diagonal entries.
    out.eigenvalues = {std::max(out.jacobian[0][0], out.jacobian[1][1]),
                       std::min(out.jacobian[0][0], out.jacobian[1][1])};
    return out;
}

namespace {

void check_field(const MomentField& field, const PriorSpec& prior) {
    if (field.num_states() != prior.num_states || field.num_actions() != prior.num_actions)
        throw std::invalid_argument("moment field shape does not match the prior");
}

// Shared propagation of per-state summaries (m, v) through the Dirichlet row
// structure; O(S) per (s,a).
MomentField propagate_collapsed(const PriorSpec& prior, const std::vector<double>& m,
                                const std::vector<double>& v, int workers) {
    const int S = prior.num_states;
    const int A = prior.num_actions;
    MomentField next = MomentField::zeros(S, A);
    const double beta = prior.discount;
    parallel_for_index(S, workers, [&](std::int64_t si) {
        const int s = static_cast<int>(si);
        for (int a = 0; a < A; ++a) {
            const auto alpha = prior.alpha.row(s, a);
            double alpha0 = 0.0;
            for (int s2 = 0; s2 < S; ++s2) alpha0 += alpha[s2];
            const double inv_alpha0 = 1.0 / alpha0;
            const double denom = 1.0 + alpha0;
            double mean_m = 0.0;    // sum_s' p m
            double mean_m2 = 0.0;   // sum_s' p m^2
            double diag_term = 0.0; // sum_s' p(1-p)/(1+a0) v
            for (int s2 = 0; s2 < S; ++s2) {
                const double p = alpha[s2] * inv_alpha0;
                mean_m += p * m[s2];
                mean_m2 += p * m[s2] * m[s2];
                diag_term += p * (1.0 - p) * v[s2];
            }
            diag_term /= denom;
            const double quad_form = (mean_m2 - mean_m * mean_m) / denom;
            next.mean(s, a) = prior.reward_mean(s, a) + beta * mean_m;
            double nv = prior.reward_var(s, a) + beta * beta * (diag_term + quad_form);
            // quad_form is a variance under p, so only rounding can push below 0
            if (nv < 0.0) {
                if (nv < -1e-12) throw std::runtime_error("dmfp step produced a negative variance");
                nv = 0.0;
            }
            next.var(s, a) = nv;
        }
    });
    return next;
}

MomentField evt_field_step(const MomentField& field, const PriorSpec& prior, int workers) {
    const int S = prior.num_states;
    const int A = prior.num_actions;
    const GumbelConstants c = gumbel_constants(A);
    const double beta = prior.discount;

    // Closed-form recursion applied field-wide; each state's action ensemble
    // is summarized by action-averaged moments (exact when identical).
    std::vector<double> m(S);
    std::vector<double> nu_avg(S);
    for (int s = 0; s < S; ++s) {
        double mu_bar = 0.0;
        double nu_bar = 0.0;
        for (int a = 0; a < A; ++a) {
            mu_bar += field.mean(s, a);
            nu_bar += field.var(s, a);
        }
        mu_bar /= A;
        nu_bar /= A;
        m[s] = mu_bar + std::sqrt(nu_bar) * (c.b + c.a * c.gamma_em);
        nu_avg[s] = nu_bar;
    }

    MomentField next = MomentField::zeros(S, A);
    parallel_for_index(S, workers, [&](std::int64_t si) {
        const int s = static_cast<int>(si);
        for (int a = 0; a < A; ++a) {
            const auto alpha = prior.alpha.row(s, a);
            double alpha0 = 0.0;
            for (int s2 = 0; s2 < S; ++s2) alpha0 += alpha[s2];
            const double inv_alpha0 = 1.0 / alpha0;
            double mean_m = 0.0;
            double mean_nu = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                const double p = alpha[s2] * inv_alpha0;
                mean_m += p * m[s2];
                mean_nu += p * nu_avg[s2];
            }
            next.mean(s, a) = prior.reward_mean(s, a) + beta * mean_m;
            next.var(s, a) = prior.reward_var(s, a) + beta * beta * kPi2Over12 * c.a * mean_nu;
        }
    });
    return next;
}

}  // namespace

MomentField general_dmfp_step(const MomentField& field, const PriorSpec& prior,
                              const MaxMomentBackend& backend, int workers) {
    check_field(field, prior);
    if (backend.variant == MaxMomentVariant::gumbel) return evt_field_step(field, prior, workers);

    check_backend(backend);
    const int S = prior.num_states;
    std::vector<double> m(S);
    std::vector<double> v(S);
    parallel_for_index(S, workers, [&](std::int64_t si) {
        const int s = static_cast<int>(si);
        const MaxMoments mm = max_moments_general(field.mean.row(s), field.var.row(s), backend);
        m[s] = mm.mean;
        v[s] = mm.var;
    });
    return propagate_collapsed(prior, m, v, workers);
}

MomentField dmfp_policy_step(const MomentField& field, const PriorSpec& prior, const Policy& pi,
                             int workers) {
    check_field(field, prior);
    if (static_cast<int>(pi.action.size()) != prior.num_states)
        throw std::invalid_argument("policy size does not match the state count");
    const int S = prior.num_states;
    std::vector<double> m(S);
    std::vector<double> v(S);
    for (int s = 0; s < S; ++s) {
        const int a = pi.action[s];
        if (a < 0 || a >= prior.num_actions) throw std::invalid_argument("policy action out of range");
        m[s] = field.mean(s, a);
        v[s] = field.var(s, a);
    }
    return propagate_collapsed(prior, m, v, workers);
}

namespace {

double field_sup_diff(const MomentField& a, const MomentField& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.mean.size(); ++i) {
        d = std::max(d, std::abs(a.mean.data[i] - b.mean.data[i]));
        d = std::max(d, std::abs(a.var.data[i] - b.var.data[i]));
    }
    return d;
}

template <typename Step>
DmfpRun run_impl(const PriorSpec& prior, const DmfpOptions& opts, Step&& step) {
    const auto violations = validate_prior(prior);
    if (!violations.empty()) throw invalid_prior_error(violations.front().message);
    if (opts.max_iters < 1) throw std::invalid_argument("run_dmfp requires max_iters >= 1");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("run_dmfp requires tol > 0");

    DmfpRun run;
    run.trajectory.push_back(MomentField::zeros(prior.num_states, prior.num_actions));
    for (int n = 1; n <= opts.max_iters; ++n) {
        MomentField next = step(run.trajectory.back());
        const double diff = field_sup_diff(next, run.trajectory.back());
        run.trajectory.push_back(std::move(next));
        run.iterations = n;
        // a zero discount makes the step map constant: one step reaches the fixed point
        if (diff <= opts.tol || prior.discount == 0.0) {
            run.converged = true;
            break;
        }
    }
    return run;
}

}  // namespace

DmfpRun run_dmfp(const PriorSpec& prior, const DmfpOptions& opts) {
    return run_impl(prior, opts, [&](const MomentField& f) {
        return general_dmfp_step(f, prior, opts.backend, opts.workers);
    });
}

DmfpRun run_dmfp_policy(const PriorSpec& prior, const Policy& pi, const DmfpOptions& opts) {
    return run_impl(prior, opts,
                    [&](const MomentField& f) { return dmfp_policy_step(f, prior, pi, opts.workers); });
}

}  // namespace dmfp
