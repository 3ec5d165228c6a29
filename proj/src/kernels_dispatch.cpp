#include "atlaslab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace atlaslab::kern {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

const KernelOps* select() {
    const char* env = std::getenv("ATLASLAB_KERNEL");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return &avx2_ops;
#endif
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return &avx2_ops;
#endif
    return &scalar_ops;
}

}  // namespace

const KernelOps& active() {
    static const KernelOps* ops = select();
    return *ops;
}

}  // namespace atlaslab::kern
