// Scalar reference kernels. The reductions accumulate in four interleaved
// partial sums (the layout of one AVX2 register) and combine them as
// (s0+s2)+(s1+s3) plus a sequential tail, exactly like the SIMD variant.

#include "evtc/dmath.hpp"
#include "evtc/kernels.hpp"

namespace evtc::kernels {
namespace {

void log_array_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = dmath::log(x[i]);
}

void log1p_array_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = dmath::log1p(x[i]);
}

void exp_array_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = dmath::exp(x[i]);
}

void excess_moments_scalar(const double* logz, std::size_t n, double log_thr, double* sum_d,
                           double* sum_d2) {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        const double d0 = logz[i] - log_thr;
        const double d1 = logz[i + 1] - log_thr;
        const double d2 = logz[i + 2] - log_thr;
        const double d3 = logz[i + 3] - log_thr;
        a0 += d0;
        a1 += d1;
        a2 += d2;
        a3 += d3;
        b0 += d0 * d0;
        b1 += d1 * d1;
        b2 += d2 * d2;
        b3 += d3 * d3;
    }
    double ta = 0, tb = 0;
    for (std::size_t i = n4; i < n; ++i) {
        const double d = logz[i] - log_thr;
        ta += d;
        tb += d * d;
    }
    *sum_d = ((a0 + a2) + (a1 + a3)) + ta;
    *sum_d2 = ((b0 + b2) + (b1 + b3)) + tb;
}

double sum_log1p_scaled_scalar(const double* e, std::size_t n, double theta, bool* support_ok) {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    bool violated = false;
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        const double t0 = theta * e[i];
        const double t1 = theta * e[i + 1];
        const double t2 = theta * e[i + 2];
        const double t3 = theta * e[i + 3];
        violated = violated || t0 <= -1.0 || t1 <= -1.0 || t2 <= -1.0 || t3 <= -1.0;
        a0 += dmath::log1p(t0);
        a1 += dmath::log1p(t1);
        a2 += dmath::log1p(t2);
        a3 += dmath::log1p(t3);
    }
    double ta = 0;
    for (std::size_t i = n4; i < n; ++i) {
        const double t = theta * e[i];
        violated = violated || t <= -1.0;
        ta += dmath::log1p(t);
    }
    *support_ok = !violated;
    return ((a0 + a2) + (a1 + a3)) + ta;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar",          log_array_scalar,      log1p_array_scalar,
                         exp_array_scalar,  excess_moments_scalar, sum_log1p_scaled_scalar};
    return ops;
}

}  // namespace evtc::kernels
