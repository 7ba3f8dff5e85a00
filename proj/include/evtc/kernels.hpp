#pragma once

// Runtime-dispatched array kernels for the hot inner loops: batch
// log/log1p/exp transforms (samplers, tail log-moments) and the two
// reductions that dominate estimator cost.
//
// Every backend performs the identical sequence of IEEE operations (the
// scalar reference uses the same blocked-4 accumulation order as one AVX2
// register), so backends agree bit-for-bit; the kernel tests assert it.

#include <cstddef>

namespace evtc::kernels {

struct Ops {
    const char* name;

    void (*log_array)(const double* x, double* out, std::size_t n);
    void (*log1p_array)(const double* x, double* out, std::size_t n);
    void (*exp_array)(const double* x, double* out, std::size_t n);

    // Sums of d_i = logz[i] - log_thr and d_i^2 over i < n, blocked-4 order.
    void (*excess_moments)(const double* logz, std::size_t n, double log_thr, double* sum_d,
                           double* sum_d2);

    // Sum of log1p(theta * e[i]); *support_ok is cleared when any
    // 1 + theta * e[i] <= 0 (the returned sum is then meaningless).
    double (*sum_log1p_scaled)(const double* e, std::size_t n, double theta, bool* support_ok);
};

enum class Backend { Auto, Scalar, Avx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or the CPU lacks AVX2

// Active backend. Auto prefers AVX2 when available; the EVTC_KERNELS
// environment variable ("scalar" / "avx2") overrides at startup.
const Ops& active();

// Force a backend (mainly for the equivalence tests). Returns false and
// leaves the selection unchanged if the backend is unavailable.
bool set_backend(Backend b);

}  // namespace evtc::kernels
