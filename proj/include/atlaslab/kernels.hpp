#pragma once

#include <cstddef>
#include <cstdint>

// Hot arithmetic kernels, provided as a scalar reference implementation plus
// an AVX2 variant selected at runtime. Both variants are required to produce
// bit-identical output: only IEEE-exact operations (+,-,*,/,sqrt) and a shared
// deterministic log are used, and the build disables FP contraction. This is
// what makes runs reproducible regardless of which variant the host picks.

namespace atlaslab::kern {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// One block of four 32-bit words per (key, counter) pair.
struct PhiloxBlock {
    uint32_t x[4];
};

PhiloxBlock philox4x32_10(const uint32_t ctr[4], const uint32_t key[2]);

// Maps a 64-bit word to an odd multiple of 2^-53 in (0,1). All operations are
// exact, so scalar and SIMD paths cannot diverge here.
inline double u01_from_bits(uint64_t u) {
    return (static_cast<double>(u >> 12) * 2.0 + 1.0) * 0x1.0p-53;
}

// Deterministic natural log (atanh series after mantissa reduction).
// Accurate to a few ulp; NOT correctly rounded, but identical across the
// scalar and AVX2 paths, which libm cannot promise.
double det_log(double x);

// Inverse normal CDF (Acklam's rational approximation, |err| < 1.2e-9),
// tails via det_log. Input must lie in (0,1).
double det_norminv(double p);

struct KernelOps {
    const char* name;

    // Fills out[0 .. 2*nblocks) with U(0,1) doubles from the philox stream
    // keyed by (seed, replica, substream), blocks block0 .. block0+nblocks.
    void (*fill_u01)(uint64_t seed, uint32_t replica, uint32_t substream,
                     uint64_t block0, std::size_t nblocks, double* out);

    // In-place transforms of a U(0,1) buffer.
    void (*normal_from_u01)(double* buf, std::size_t n);
    void (*exp_from_u01)(double* buf, std::size_t n, double rate);

    // y[i] += drift_dt[i] + sqrt_dt * xi[i]
    void (*euler_update)(double* y, const double* drift_dt, double sqrt_dt,
                         const double* xi, std::size_t n);

    // occ[i*ne + e] += dt * 1{z[i] <= eps[e]}
    void (*occupation_accumulate)(const double* z, std::size_t k,
                                  const double* eps, std::size_t ne, double dt,
                                  double* occ);
};

extern const KernelOps scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelOps avx2_ops;
#endif

bool avx2_available();

// Active kernel set: AVX2 when the CPU has it, scalar otherwise.
// ATLASLAB_KERNEL=scalar|avx2 overrides (used by the equivalence tests).
const KernelOps& active();

}  // namespace atlaslab::kern
