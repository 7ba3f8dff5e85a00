// AVX2 kernels. Lane arithmetic mirrors evtc/dmath.hpp operation for
// operation (same fdlibm reduction, same polynomial, no FMA), so each lane
// produces the same bits as the scalar reference. Compiled with -mavx2 and
// dispatched at runtime; see kernels_dispatch.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstdint>
#include <limits>

#include "evtc/dmath.hpp"
#include "evtc/kernels.hpp"

namespace evtc::kernels {
namespace {

using dmath::detail::kInvLn2;
using dmath::detail::kLn2Hi;
using dmath::detail::kLn2Lo;

inline __m256d vset(double v) { return _mm256_set1_pd(v); }

// int64 lanes (small range) -> double lanes
inline __m256d cvt_i64_pd(__m256i k) {
    const __m256i idx = _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
    const __m128i k32 = _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(k, idx));
    return _mm256_cvtepi32_pd(k32);
}

// Full log with specials; mirrors dmath::log.
inline __m256d vlog(__m256d x) {
    const __m256d m_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    const __m256d m_one = _mm256_cmp_pd(x, vset(1.0), _CMP_EQ_OQ);
    const __m256d m_zero = _mm256_cmp_pd(x, vset(0.0), _CMP_EQ_OQ);
    const __m256d m_neg = _mm256_cmp_pd(x, vset(0.0), _CMP_LT_OQ);
    const __m256d m_pinf = _mm256_cmp_pd(x, vset(std::numeric_limits<double>::infinity()),
                                         _CMP_EQ_OQ);
    // positive subnormal lanes get rescaled by 2^54 with a -54 exponent bias
    const __m256d m_sub = _mm256_andnot_pd(
        m_zero, _mm256_and_pd(_mm256_cmp_pd(x, vset(0x1p-1022), _CMP_LT_OQ),
                              _mm256_cmp_pd(x, vset(0.0), _CMP_GT_OQ)));
    const __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, vset(0x1p54)), m_sub);
    const __m256i kbias =
        _mm256_and_si256(_mm256_castpd_si256(m_sub), _mm256_set1_epi64x(-54));

    const __m256i u = _mm256_castpd_si256(xs);
    __m256i k = _mm256_add_epi64(
        _mm256_sub_epi64(_mm256_srli_epi64(u, 52), _mm256_set1_epi64x(1023)), kbias);
    const __m256i mant = _mm256_and_si256(u, _mm256_set1_epi64x(0x000fffffffffffffLL));
    const __m256i i_sel = _mm256_and_si256(
        _mm256_add_epi64(_mm256_srli_epi64(mant, 32), _mm256_set1_epi64x(0x95f64LL)),
        _mm256_set1_epi64x(0x100000LL));
    const __m256i mbits = _mm256_or_si256(
        mant, _mm256_slli_epi64(_mm256_xor_si256(i_sel, _mm256_set1_epi64x(0x3ff00000LL)), 32));
    const __m256d m = _mm256_castsi256_pd(mbits);
    k = _mm256_add_epi64(k, _mm256_srli_epi64(i_sel, 20));

    const __m256d f = _mm256_sub_pd(m, vset(1.0));
    const __m256d s = _mm256_div_pd(f, _mm256_add_pd(vset(2.0), f));
    const __m256d z = _mm256_mul_pd(s, s);
    const __m256d w = _mm256_mul_pd(z, z);
    using namespace dmath::detail;
    const __m256d t1 = _mm256_mul_pd(
        w, _mm256_add_pd(vset(kLg2),
                         _mm256_mul_pd(w, _mm256_add_pd(vset(kLg4), _mm256_mul_pd(w, vset(kLg6))))));
    const __m256d t2 = _mm256_mul_pd(
        z, _mm256_add_pd(
               vset(kLg1),
               _mm256_mul_pd(
                   w, _mm256_add_pd(vset(kLg3),
                                    _mm256_mul_pd(w, _mm256_add_pd(vset(kLg5),
                                                                   _mm256_mul_pd(w, vset(kLg7))))))));
    const __m256d r = _mm256_add_pd(t2, t1);
    const __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(vset(0.5), f), f);
    const __m256d dk = cvt_i64_pd(k);
    // dk*ln2hi - ((hfsq - (s*(hfsq+r) + dk*ln2lo)) - f)
    const __m256d inner = _mm256_add_pd(_mm256_mul_pd(s, _mm256_add_pd(hfsq, r)),
                                        _mm256_mul_pd(dk, vset(kLn2Lo)));
    __m256d res = _mm256_sub_pd(_mm256_mul_pd(dk, vset(kLn2Hi)),
                                _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));

    res = _mm256_blendv_pd(res, vset(0.0), m_one);
    res = _mm256_blendv_pd(res, vset(-std::numeric_limits<double>::infinity()), m_zero);
    res = _mm256_blendv_pd(res, vset(std::numeric_limits<double>::quiet_NaN()), m_neg);
    res = _mm256_blendv_pd(res, x, m_pinf);
    res = _mm256_blendv_pd(res, x, m_nan);
    return res;
}

// Mirrors dmath::exp.
inline __m256d vexp(__m256d x) {
    using namespace dmath::detail;
    const __m256d m_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    const __m256d m_over = _mm256_cmp_pd(x, vset(kExpOverflow), _CMP_GT_OQ);
    const __m256d m_under = _mm256_cmp_pd(x, vset(kExpUnderflow), _CMP_LT_OQ);

    const __m256d dk = _mm256_round_pd(_mm256_mul_pd(x, vset(kInvLn2)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d hi = _mm256_sub_pd(x, _mm256_mul_pd(dk, vset(kLn2Hi)));
    const __m256d lo = _mm256_mul_pd(dk, vset(kLn2Lo));
    const __m256d r = _mm256_sub_pd(hi, lo);
    const __m256d t = _mm256_mul_pd(r, r);
    const __m256d poly = _mm256_add_pd(
        vset(kP1),
        _mm256_mul_pd(
            t, _mm256_add_pd(
                   vset(kP2),
                   _mm256_mul_pd(t, _mm256_add_pd(vset(kP3),
                                                  _mm256_mul_pd(t, _mm256_add_pd(
                                                                       vset(kP4),
                                                                       _mm256_mul_pd(t, vset(kP5)))))))));
    const __m256d c = _mm256_sub_pd(r, _mm256_mul_pd(t, poly));
    const __m256d y = _mm256_sub_pd(
        vset(1.0),
        _mm256_sub_pd(
            _mm256_sub_pd(lo, _mm256_div_pd(_mm256_mul_pd(r, c), _mm256_sub_pd(vset(2.0), c))),
            hi));

    // clamp dk on special lanes so the exponent arithmetic below stays valid
    const __m256d special = _mm256_or_pd(_mm256_or_pd(m_nan, m_over), m_under);
    const __m256d dk_safe = _mm256_blendv_pd(dk, vset(0.0), special);
    const __m128i k32 = _mm256_cvtpd_epi32(dk_safe);
    const __m128i k1_32 = _mm_srai_epi32(k32, 1);
    const __m256i k1 = _mm256_cvtepi32_epi64(k1_32);
    const __m256i k2 = _mm256_cvtepi32_epi64(_mm_sub_epi32(k32, k1_32));
    const __m256d s1 = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(k1, _mm256_set1_epi64x(1023)), 52));
    const __m256d s2 = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(k2, _mm256_set1_epi64x(1023)), 52));
    __m256d res = _mm256_mul_pd(_mm256_mul_pd(y, s1), s2);

    res = _mm256_blendv_pd(res, vset(std::numeric_limits<double>::infinity()), m_over);
    res = _mm256_blendv_pd(res, vset(0.0), m_under);
    res = _mm256_blendv_pd(res, x, m_nan);
    return res;
}

// Mirrors dmath::log1p.
inline __m256d vlog1p(__m256d x) {
    const __m256d m_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    const __m256d m_pinf =
        _mm256_cmp_pd(x, vset(std::numeric_limits<double>::infinity()), _CMP_EQ_OQ);
    const __m256d u = _mm256_add_pd(vset(1.0), x);
    const __m256d d = _mm256_sub_pd(u, vset(1.0));
    const __m256d r = vlog(u);
    const __m256d m_d0 = _mm256_cmp_pd(d, vset(0.0), _CMP_EQ_OQ);
    __m256d res = _mm256_mul_pd(r, _mm256_div_pd(x, d));
    res = _mm256_blendv_pd(res, x, m_d0);
    res = _mm256_blendv_pd(res, x, m_pinf);
    res = _mm256_blendv_pd(res, x, m_nan);
    return res;
}

void log_array_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vlog(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = dmath::log(x[i]);
}

void log1p_array_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vlog1p(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = dmath::log1p(x[i]);
}

void exp_array_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vexp(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = dmath::exp(x[i]);
}

// (s0+s2)+(s1+s3), the scalar reference's combine order
inline double hsum(__m256d acc) {
    const __m128d lov = _mm256_castpd256_pd128(acc);
    const __m128d hiv = _mm256_extractf128_pd(acc, 1);
    const __m128d s = _mm_add_pd(lov, hiv);  // [s0+s2, s1+s3]
    return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

void excess_moments_avx2(const double* logz, std::size_t n, double log_thr, double* sum_d,
                         double* sum_d2) {
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    const __m256d thr = vset(log_thr);
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(logz + i), thr);
        acc1 = _mm256_add_pd(acc1, d);
        acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(d, d));
    }
    double ta = 0, tb = 0;
    for (std::size_t i = n4; i < n; ++i) {
        const double d = logz[i] - log_thr;
        ta += d;
        tb += d * d;
    }
    *sum_d = hsum(acc1) + ta;
    *sum_d2 = hsum(acc2) + tb;
}

double sum_log1p_scaled_avx2(const double* e, std::size_t n, double theta, bool* support_ok) {
    __m256d acc = _mm256_setzero_pd();
    __m256d viol = _mm256_setzero_pd();
    const __m256d th = vset(theta);
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d t = _mm256_mul_pd(th, _mm256_loadu_pd(e + i));
        viol = _mm256_or_pd(viol, _mm256_cmp_pd(t, vset(-1.0), _CMP_LE_OQ));
        const __m256d u = _mm256_add_pd(vset(1.0), t);
        const __m256d d = _mm256_sub_pd(u, vset(1.0));
        const __m256d r = vlog(u);
        __m256d v = _mm256_mul_pd(r, _mm256_div_pd(t, d));
        v = _mm256_blendv_pd(v, t, _mm256_cmp_pd(d, vset(0.0), _CMP_EQ_OQ));
        acc = _mm256_add_pd(acc, v);
    }
    bool violated = _mm256_movemask_pd(viol) != 0;
    double ta = 0;
    for (std::size_t i = n4; i < n; ++i) {
        const double t = theta * e[i];
        violated = violated || t <= -1.0;
        ta += dmath::log1p(t);
    }
    *support_ok = !violated;
    return hsum(acc) + ta;
}

}  // namespace

const Ops& avx2_ops_impl() {
    static const Ops ops{"avx2",          log_array_avx2,      log1p_array_avx2,
                         exp_array_avx2,  excess_moments_avx2, sum_log1p_scaled_avx2};
    return ops;
}

}  // namespace evtc::kernels

#endif  // x86_64
