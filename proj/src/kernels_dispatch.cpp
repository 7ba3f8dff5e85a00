// Backend selection: AVX2 when the CPU has it, scalar otherwise.
// EVTC_KERNELS=scalar|avx2 overrides, and tests can switch at runtime.

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "evtc/kernels.hpp"

namespace evtc::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops_impl();  // defined in kernels_avx2.cpp when built
#endif

const Ops* avx2_ops() {
#if defined(EVTC_HAVE_AVX2_BUILD) && (defined(__x86_64__) || defined(_M_X64))
    static const Ops* ops = __builtin_cpu_supports("avx2") ? &avx2_ops_impl() : nullptr;
    return ops;
#else
    return nullptr;
#endif
}

namespace {

const Ops* initial_backend() {
    const char* env = std::getenv("EVTC_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (env != nullptr && std::strcmp(env, "avx2") == 0 && avx2_ops() != nullptr)
        return avx2_ops();
    return avx2_ops() != nullptr ? avx2_ops() : &scalar_ops();
}

std::atomic<const Ops*>& current() {
    static std::atomic<const Ops*> ops{initial_backend()};
    return ops;
}

}  // namespace

const Ops& active() { return *current().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
    switch (b) {
        case Backend::Scalar:
            current().store(&scalar_ops(), std::memory_order_relaxed);
            return true;
        case Backend::Avx2:
            if (avx2_ops() == nullptr) return false;
            current().store(avx2_ops(), std::memory_order_relaxed);
            return true;
        case Backend::Auto:
            current().store(avx2_ops() != nullptr ? avx2_ops() : &scalar_ops(),
                            std::memory_order_relaxed);
            return true;
    }
    return false;
}

}  // namespace evtc::kernels
