#include "dmfp/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <vector>

#include "dmfp/errors.hpp"

namespace dmfp {

namespace {

constexpr double kInvSqrtPi = 0.5641895835477563;   // 1/sqrt(pi)
constexpr double kSqrtHalf = 0.7071067811865476;    // 1/sqrt(2)
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2*pi)

// erf via the non-alternating series
//   erf(x) = 2x * exp(-x^2)/sqrt(pi) * sum_n (2x^2)^n / (1*3*...*(2n+1)),
// all terms positive so there is no cancellation; fast for |x| <= 2.
double erf_series(double x) {
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return 2.0 * x * std::exp(-x2) * kInvSqrtPi * sum;
}

// erfc via the Legendre continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm; accurate for x >= 2.
double erfc_cf(double x) {
    const double tiny = 1e-300;
    double f = x;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 1; k < 300; ++k) {
        const double ak = 0.5 * k;
        d = x + ak * d;
        if (d == 0.0) d = tiny;
        c = x + ak / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) * kInvSqrtPi / f;
}

double erfc_scalar(double x) {
    if (x < 0.0) return 2.0 - erfc_scalar(-x);
    if (x < 2.0) return 1.0 - erf_series(x);
    if (x > 27.0) return 0.0;  // below double underflow
    return erfc_cf(x);
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * erfc_scalar(-x * kSqrtHalf); }

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("std_normal_quantile: p must lie in (0, 1)");
    // Acklam's rational approximation, then one Newton step against our CDF.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double err = std_normal_cdf(x) - p;
    const double pdf = std_normal_pdf(x);
    if (pdf > 0.0) x -= err / pdf;
    return x;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_root: requires lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw bracketing_error("bisect_root: f(lo) and f(hi) have the same sign");
    double mid = lo;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // bracket at double resolution
        const double fmid = f(mid);
        if (std::abs(fmid) <= tol || (hi - lo) <= tol) return mid;
        if ((fmid > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return mid;
}

namespace {

// Trapezoid refinement shared by both integrators: Simpson estimates arise as
// S_k = (4 T_k - T_{k-1}) / 3, with T_k reusing all previous evaluations.
// Accepts when successive Simpson values differ by <= tol, requiring a
// minimum of 64 intervals so coarse agreement on unresolved features does not
// terminate early. 22 doublings corresponds to >= 4M Simpson panels.
constexpr int kMaxDoublings = 22;
constexpr int kMinLevel = 6;  // accept no earlier than 64 intervals

template <typename Eval, typename Value>
Value simpson_doubling(Eval&& eval_sum, Value first_trap, double lo, double hi, double tol,
                       const Value& zero) {
    // Value is double or pair<double,double>; eval_sum(k) returns the sum of
    // integrand values at the 2^(k-1) new midpoints of level k.
    const double width = hi - lo;
    Value trap_prev = first_trap;
    Value simpson_prev = zero;
    bool have_prev = false;
    std::int64_t intervals = 1;
    for (int level = 1; level <= kMaxDoublings + 1; ++level) {
        intervals *= 2;
        const double h = width / static_cast<double>(intervals);
        const Value mid_sum = eval_sum(intervals, lo, h);
        Value trap;
        Value simpson;
        if constexpr (std::is_same_v<Value, double>) {
            trap = 0.5 * trap_prev + h * mid_sum;
            simpson = (4.0 * trap - trap_prev) / 3.0;
        } else {
            trap = {0.5 * trap_prev.first + h * mid_sum.first, 0.5 * trap_prev.second + h * mid_sum.second};
            simpson = {(4.0 * trap.first - trap_prev.first) / 3.0,
                       (4.0 * trap.second - trap_prev.second) / 3.0};
        }
        if (have_prev && level >= kMinLevel) {
            bool ok;
            if constexpr (std::is_same_v<Value, double>) {
                ok = std::abs(simpson - simpson_prev) <= tol;
            } else {
                ok = std::abs(simpson.first - simpson_prev.first) <= tol &&
                     std::abs(simpson.second - simpson_prev.second) <= tol;
            }
            if (ok) return simpson;
        }
        trap_prev = trap;
        simpson_prev = simpson;
        have_prev = true;
    }
    throw quadrature_error("quadrature failed to converge after 22 grid doublings");
}

}  // namespace

double integrate(const std::function<double(double)>& g, double lo, double hi, double tol) {
    if (!(lo < hi)) throw std::invalid_argument("integrate: requires lo < hi");
    const double first_trap = 0.5 * (hi - lo) * (g(lo) + g(hi));
    auto eval_sum = [&](std::int64_t intervals, double a, double h) {
        double sum = 0.0;
        for (std::int64_t i = 1; i < intervals; i += 2) sum += g(a + h * static_cast<double>(i));
        return sum;
    };
    return simpson_doubling(eval_sum, first_trap, lo, hi, tol, 0.0);
}

namespace detail {

std::pair<double, double> integrate_pair(const std::function<std::pair<double, double>(double)>& g,
                                         double lo, double hi, double tol) {
    if (!(lo < hi)) throw std::invalid_argument("integrate_pair: requires lo < hi");
    const auto glo = g(lo);
    const auto ghi = g(hi);
    const std::pair<double, double> first_trap{0.5 * (hi - lo) * (glo.first + ghi.first),
                                               0.5 * (hi - lo) * (glo.second + ghi.second)};
    auto eval_sum = [&](std::int64_t intervals, double a, double h) {
        std::pair<double, double> sum{0.0, 0.0};
        for (std::int64_t i = 1; i < intervals; i += 2) {
            const auto v = g(a + h * static_cast<double>(i));
            sum.first += v.first;
            sum.second += v.second;
        }
        return sum;
    };
    return simpson_doubling(eval_sum, first_trap, lo, hi, tol, std::pair<double, double>{0.0, 0.0});
}

}  // namespace detail

MomentAccumulator welford_push(MomentAccumulator acc, double x) {
    acc.push(x);
    return acc;
}

MomentAccumulator welford_merge(MomentAccumulator a, const MomentAccumulator& b) {
    a.merge(b);
    return a;
}

}  // namespace dmfp
