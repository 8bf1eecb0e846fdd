#pragma once

#include <cstdint>
#include <functional>
#include <utility>

namespace dmfp {

/// Standard normal CDF, absolute error below 1e-12. Self-contained
/// (series + continued fraction for the complementary error function;
/// nothing beyond elementary functions).
double std_normal_cdf(double x);

/// Standard normal density.
double std_normal_pdf(double x);

/// Inverse standard normal CDF on (0, 1); rational initial guess refined by
/// one Newton step against std_normal_cdf.
double std_normal_quantile(double p);

/// Bisection on [lo, hi]; returns x with |f(x)| <= tol or bracket width <= tol
/// (whichever first), stopping early once the bracket hits double resolution.
/// Throws bracketing_error unless f(lo) and f(hi) have opposite signs.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Composite Simpson with panel doubling; accepts once successive estimates
/// differ by <= tol. Throws quadrature_error after 22 doublings (>= 4M panels).
double integrate(const std::function<double(double)>& g, double lo, double hi, double tol);

namespace detail {
/// Same doubling scheme for two integrands sharing one (expensive) point
/// evaluation; converges when both estimates settle.
std::pair<double, double> integrate_pair(const std::function<std::pair<double, double>(double)>& g,
                                         double lo, double hi, double tol);
}  // namespace detail

/// Streaming mean/variance accumulator (Welford). Mergeable without loss:
/// merging disjoint accumulators equals pooled accumulation.
struct MomentAccumulator {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const MomentAccumulator& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count);
        const double n2 = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double n = n1 + n2;
        mean += delta * (n2 / n);
        m2 += other.m2 + delta * delta * (n1 * n2 / n);
        count += other.count;
    }

    /// Sample variance m2/(count-1); zero when fewer than two observations.
    double sample_variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

MomentAccumulator welford_push(MomentAccumulator acc, double x);
MomentAccumulator welford_merge(MomentAccumulator a, const MomentAccumulator& b);

}  // namespace dmfp
