#pragma once

// Deterministic double-precision math.
//
// The library routes every log/exp/pow it computes through these functions
// instead of libm, so that results are reproducible bit-for-bit across
// platforms and libm versions, and so that the SIMD kernel variants can
// perform exactly the same IEEE operations lane-wise as the scalar
// reference.  The algorithms are the classic fdlibm argument reductions
// with a single polynomial path (no small-argument shortcuts), which keeps
// the scalar and vector code structurally identical.
//
// Accuracy: log and exp are correct to <= 2 ulp over the full range,
// log1p to <= 4 ulp, pow to ~(1 + |y log x|) ulp.  These files must be
// compiled with FP contraction disabled (no implicit FMA).

#include <bit>
#include <cstdint>
#include <limits>

namespace evtc::dmath {

namespace detail {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;  // 0x3FE62E42FEE00000
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;  // 0x3DEA39EF35793C76
inline constexpr double kInvLn2 = 1.44269504088896338700e+00;

// log polynomial (fdlibm e_log.c)
inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;

// exp polynomial (fdlibm e_exp.c)
inline constexpr double kP1 = 1.66666666666666019037e-01;
inline constexpr double kP2 = -2.77777777770155933842e-03;
inline constexpr double kP3 = 6.61375632143793436117e-05;
inline constexpr double kP4 = -1.65339022054652515390e-06;
inline constexpr double kP5 = 4.13813679705723846039e-08;

inline constexpr double kExpOverflow = 709.782712893383973096;   // > this: +inf
inline constexpr double kExpUnderflow = -745.133219101941108420; // < this: 0

// Core of log(x) for finite, positive, normal x.  Returns the fdlibm
// polynomial result; callers deal with specials.
inline double log_core(double x, int kbias) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(x);
    std::int64_t k = static_cast<std::int64_t>(u >> 52) - 1023 + kbias;
    const std::uint64_t mant = u & 0x000fffffffffffffULL;
    // pick m in [sqrt(2)/2, sqrt(2)): i is 2^20 when the mantissa is large
    const std::uint64_t i = ((mant >> 32) + 0x95f64ULL) & 0x100000ULL;
    const std::uint64_t mbits = mant | ((i ^ 0x3ff00000ULL) << 32);
    const double m = std::bit_cast<double>(mbits);
    k += static_cast<std::int64_t>(i >> 20);

    const double f = m - 1.0;
    const double s = f / (2.0 + f);
    const double z = s * s;
    const double w = z * z;
    const double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
    const double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
    const double r = t2 + t1;
    const double hfsq = 0.5 * f * f;
    const double dk = static_cast<double>(k);
    return dk * kLn2Hi - ((hfsq - (s * (hfsq + r) + dk * kLn2Lo)) - f);
}

}  // namespace detail

// Natural logarithm. log(0) = -inf, log(x<0) = NaN, propagates inf/NaN.
inline double log(double x) {
    if (x == 1.0) return 0.0;  // keep the +0 sign
    if (x <= 0.0)
        return x == 0.0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::quiet_NaN();
    int kbias = 0;
    if (x < 0x1p-1022) {  // subnormal: rescale
        x *= 0x1p54;
        kbias = -54;
    }
    if (std::bit_cast<std::uint64_t>(x) >= 0x7ff0000000000000ULL) return x;  // +inf, NaN
    return detail::log_core(x, kbias);
}

// exp(x) with the fdlibm reduction x = k ln2 + r, |r| <= ln2/2.
inline double exp(double x) {
    if (x != x) return x;
    if (x > detail::kExpOverflow) return std::numeric_limits<double>::infinity();
    if (x < detail::kExpUnderflow) return 0.0;

    const double dk = __builtin_nearbyint(x * detail::kInvLn2);
    const double hi = x - dk * detail::kLn2Hi;  // exact: |k| < 2^11, ln2Hi has 21 mantissa bits
    const double lo = dk * detail::kLn2Lo;
    const double r = hi - lo;
    const double t = r * r;
    const double c =
        r - t * (detail::kP1 +
                 t * (detail::kP2 + t * (detail::kP3 + t * (detail::kP4 + t * detail::kP5))));
    const double y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);

    // scale by 2^k in two exact power-of-two steps so k down to -1074 works
    const std::int64_t k = static_cast<std::int64_t>(dk);
    const std::int64_t k1 = k >> 1;
    const std::int64_t k2 = k - k1;
    const double s1 = std::bit_cast<double>(static_cast<std::uint64_t>(k1 + 1023) << 52);
    const double s2 = std::bit_cast<double>(static_cast<std::uint64_t>(k2 + 1023) << 52);
    return (y * s1) * s2;
}

// log(1+x) via the correction trick: compensates the rounding of 1+x.
// -inf at x == -1, NaN below, same as log.
inline double log1p(double x) {
    if (x != x) return x;
    if (x == std::numeric_limits<double>::infinity()) return x;
    const double u = 1.0 + x;
    const double d = u - 1.0;
    const double r = evtc::dmath::log(u);
    return d == 0.0 ? x : r * (x / d);
}

// exp(x) - 1 without cancellation for small x: the rounding of w = exp(x)
// cancels in the ratio (w - 1) / log(w).
inline double expm1(double x) {
    if (x != x) return x;
    const double w = evtc::dmath::exp(x);
    if (w == 0.0) return -1.0;
    if (w == std::numeric_limits<double>::infinity()) return w;
    const double d = w - 1.0;
    if (d == 0.0) return x;
    const double l = evtc::dmath::log(w);
    return l == 0.0 ? x : d * (x / l);
}

// pow restricted to x >= 0 (all the library needs). exp(y log x) with the
// usual special cases.
inline double pow(double x, double y) {
    if (y == 0.0 || x == 1.0) return 1.0;
    if (x != x || y != y) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return y > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return evtc::dmath::exp(y * evtc::dmath::log(x));
}

// Inverse standard normal CDF, Acklam's rational approximation
// (absolute error < 1.2e-8, plenty for confidence levels).
inline double normal_quantile(double p) {
    if (p != p) return p;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = __builtin_sqrt(-2.0 * evtc::dmath::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = __builtin_sqrt(-2.0 * evtc::dmath::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace evtc::dmath
