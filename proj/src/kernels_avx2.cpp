// AVX2 variants of the hot kernels. Arithmetic is kept op-for-op identical to
// kernels_scalar.cpp (no FMA, same Horner order, same blend conditions) so the
// two paths produce bit-identical streams; test_kernels.cpp enforces this.

#if defined(__x86_64__) || defined(_M_X64)

#include "atlaslab/kernels.hpp"

#include <immintrin.h>

#include <cstring>

namespace atlaslab::kern {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline __m256i mulhi_epu32(__m256i a, __m256i b) {
    const __m256i even = _mm256_mul_epu32(a, b);
    const __m256i odd =
        _mm256_mul_epu32(_mm256_srli_epi64(a, 32), _mm256_srli_epi64(b, 32));
    const __m256i hi_mask =
        _mm256_set1_epi64x(static_cast<long long>(0xFFFFFFFF00000000ull));
    return _mm256_blend_epi32(_mm256_srli_epi64(even, 32),
                              _mm256_and_si256(odd, hi_mask), 0xAA);
}

// Eight philox blocks at once, structure-of-arrays.
inline void philox8_rounds(__m256i& x0, __m256i& x1, __m256i& x2, __m256i& x3,
                           uint32_t k0s, uint32_t k1s) {
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kPhiloxM1));
    const __m256i w0 = _mm256_set1_epi32(static_cast<int>(kPhiloxW0));
    const __m256i w1 = _mm256_set1_epi32(static_cast<int>(kPhiloxW1));
    __m256i k0 = _mm256_set1_epi32(static_cast<int>(k0s));
    __m256i k1 = _mm256_set1_epi32(static_cast<int>(k1s));
    for (int round = 0; round < 10; ++round) {
        const __m256i hi0 = mulhi_epu32(x0, m0);
        const __m256i lo0 = _mm256_mullo_epi32(x0, m0);
        const __m256i hi1 = mulhi_epu32(x2, m1);
        const __m256i lo1 = _mm256_mullo_epi32(x2, m1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), k0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), k1);
        x0 = n0;
        x1 = lo1;
        x2 = n2;
        x3 = lo0;
        k0 = _mm256_add_epi32(k0, w0);
        k1 = _mm256_add_epi32(k1, w1);
    }
}

void fill_u01_avx2(uint64_t seed, uint32_t replica, uint32_t substream,
                   uint64_t block0, std::size_t nblocks, double* out) {
    const uint32_t k0 = static_cast<uint32_t>(seed);
    const uint32_t k1 = static_cast<uint32_t>(seed >> 32);
    const __m256i c2 = _mm256_set1_epi32(static_cast<int>(replica));
    const __m256i c3 = _mm256_set1_epi32(static_cast<int>(substream));

    std::size_t j = 0;
    alignas(32) uint32_t lanes[4][8];
    for (; j + 8 <= nblocks; j += 8) {
        alignas(32) uint32_t blo[8];
        alignas(32) uint32_t bhi[8];
        for (int l = 0; l < 8; ++l) {
            const uint64_t blk = block0 + j + static_cast<uint64_t>(l);
            blo[l] = static_cast<uint32_t>(blk);
            bhi[l] = static_cast<uint32_t>(blk >> 32);
        }
        __m256i x0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(blo));
        __m256i x1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(bhi));
        __m256i x2 = c2;
        __m256i x3 = c3;
        philox8_rounds(x0, x1, x2, x3, k0, k1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[0]), x0);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[1]), x1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[2]), x2);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[3]), x3);
        for (int l = 0; l < 8; ++l) {
            const uint64_t u0 =
                (static_cast<uint64_t>(lanes[1][l]) << 32) | lanes[0][l];
            const uint64_t u1 =
                (static_cast<uint64_t>(lanes[3][l]) << 32) | lanes[2][l];
            out[2 * (j + l)] = u01_from_bits(u0);
            out[2 * (j + l) + 1] = u01_from_bits(u1);
        }
    }
    if (j < nblocks) {
        scalar_ops.fill_u01(seed, replica, substream, block0 + j, nblocks - j,
                            out + 2 * j);
    }
}

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kSqrt2 = 1.41421356237309514547;

// Exponent bits, converted exactly to double via the 2^52 bias trick.
inline __m256d small_u64_to_pd(__m256i v) {
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic)),
                         _mm256_set1_pd(0x1.0p52));
}

inline __m256d det_log_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256d e_raw =
        _mm256_sub_pd(small_u64_to_pd(_mm256_srli_epi64(bits, 52)),
                      _mm256_set1_pd(1023.0));
    const __m256i mant = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
        _mm256_set1_epi64x(0x3FF0000000000000ll));
    __m256d m = _mm256_castsi256_pd(mant);
    const __m256d adj = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), adj);
    const __m256d e =
        _mm256_add_pd(e_raw, _mm256_and_pd(adj, _mm256_set1_pd(1.0)));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s =
        _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);
    __m256d p = _mm256_set1_pd(1.0 / 19.0);
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(1.0 / 3.0));
    const __m256d t1 = _mm256_mul_pd(_mm256_set1_pd(2.0), s);
    const __m256d t2 = _mm256_mul_pd(s2, p);
    const __m256d log_m = _mm256_add_pd(t1, _mm256_mul_pd(t1, t2));
    const __m256d a = _mm256_mul_pd(e, _mm256_set1_pd(kLn2Hi));
    const __m256d b = _mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo));
    return _mm256_add_pd(a, _mm256_add_pd(log_m, b));
}

constexpr double kA[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                          -2.759285104469687e+02, 1.383577518672690e+02,
                          -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                          -1.556989798598866e+02, 6.680131188771972e+01,
                          -1.328068155288572e+01};
constexpr double kC[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                          -2.400758277161838e+00, -2.549732539343734e+00,
                          4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                          2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kPLow = 0.02425;
constexpr double kPHigh = 1.0 - 0.02425;

inline __m256d norminv_pd(__m256d pin) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);

    // central branch
    const __m256d q = _mm256_sub_pd(pin, half);
    const __m256d r = _mm256_mul_pd(q, q);
    __m256d num = _mm256_set1_pd(kA[0]);
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kA[1]));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kA[2]));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kA[3]));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kA[4]));
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kA[5]));
    __m256d den = _mm256_set1_pd(kB[0]);
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(kB[1]));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(kB[2]));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(kB[3]));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(kB[4]));
    den = _mm256_add_pd(_mm256_mul_pd(den, r), one);
    const __m256d central = _mm256_div_pd(_mm256_mul_pd(q, num), den);

    // tail branch (both tails through min(p, 1-p))
    const __m256d one_minus = _mm256_sub_pd(one, pin);
    const __m256d pt = _mm256_min_pd(pin, one_minus);
    const __m256d qt = _mm256_sqrt_pd(
        _mm256_mul_pd(_mm256_set1_pd(-2.0), det_log_pd(pt)));
    __m256d tn = _mm256_set1_pd(kC[0]);
    tn = _mm256_add_pd(_mm256_mul_pd(tn, qt), _mm256_set1_pd(kC[1]));
    tn = _mm256_add_pd(_mm256_mul_pd(tn, qt), _mm256_set1_pd(kC[2]));
    tn = _mm256_add_pd(_mm256_mul_pd(tn, qt), _mm256_set1_pd(kC[3]));
    tn = _mm256_add_pd(_mm256_mul_pd(tn, qt), _mm256_set1_pd(kC[4]));
    tn = _mm256_add_pd(_mm256_mul_pd(tn, qt), _mm256_set1_pd(kC[5]));
    __m256d td = _mm256_set1_pd(kD[0]);
    td = _mm256_add_pd(_mm256_mul_pd(td, qt), _mm256_set1_pd(kD[1]));
    td = _mm256_add_pd(_mm256_mul_pd(td, qt), _mm256_set1_pd(kD[2]));
    td = _mm256_add_pd(_mm256_mul_pd(td, qt), _mm256_set1_pd(kD[3]));
    td = _mm256_add_pd(_mm256_mul_pd(td, qt), one);
    const __m256d t = _mm256_div_pd(tn, td);
    const __m256d lower = _mm256_cmp_pd(pin, half, _CMP_LT_OQ);
    const __m256d tail =
        _mm256_blendv_pd(_mm256_sub_pd(_mm256_setzero_pd(), t), t, lower);

    const __m256d in_central = _mm256_and_pd(
        _mm256_cmp_pd(pin, _mm256_set1_pd(kPLow), _CMP_GE_OQ),
        _mm256_cmp_pd(pin, _mm256_set1_pd(kPHigh), _CMP_LE_OQ));
    return _mm256_blendv_pd(tail, central, in_central);
}

void normal_from_u01_avx2(double* buf, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(buf + i, norminv_pd(_mm256_loadu_pd(buf + i)));
    }
    if (i < n) scalar_ops.normal_from_u01(buf + i, n - i);
}

void exp_from_u01_avx2(double* buf, std::size_t n, double rate) {
    const __m256d rv = _mm256_set1_pd(rate);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u = _mm256_loadu_pd(buf + i);
        const __m256d neg_log = _mm256_sub_pd(zero, det_log_pd(u));
        _mm256_storeu_pd(buf + i, _mm256_div_pd(neg_log, rv));
    }
    if (i < n) scalar_ops.exp_from_u01(buf + i, n - i, rate);
}

void euler_update_avx2(double* y, const double* drift_dt, double sqrt_dt,
                       const double* xi, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(sqrt_dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d incr = _mm256_add_pd(
            _mm256_loadu_pd(drift_dt + i),
            _mm256_mul_pd(sv, _mm256_loadu_pd(xi + i)));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), incr));
    }
    if (i < n) {
        scalar_ops.euler_update(y + i, drift_dt + i, sqrt_dt, xi + i, n - i);
    }
}

void occupation_accumulate_avx2(const double* z, std::size_t k,
                                const double* eps, std::size_t ne, double dt,
                                double* occ) {
    const __m256d dtv = _mm256_set1_pd(dt);
    for (std::size_t i = 0; i < k; ++i) {
        const __m256d zi = _mm256_set1_pd(z[i]);
        std::size_t e = 0;
        for (; e + 4 <= ne; e += 4) {
            const __m256d ev = _mm256_loadu_pd(eps + e);
            const __m256d mask = _mm256_cmp_pd(zi, ev, _CMP_LE_OQ);
            double* slot = occ + i * ne + e;
            _mm256_storeu_pd(
                slot, _mm256_add_pd(_mm256_loadu_pd(slot),
                                    _mm256_and_pd(mask, dtv)));
        }
        for (; e < ne; ++e) {
            if (z[i] <= eps[e]) occ[i * ne + e] += dt;
        }
    }
}

}  // namespace

const KernelOps avx2_ops = {
    "avx2",          fill_u01_avx2,     normal_from_u01_avx2,
    exp_from_u01_avx2, euler_update_avx2, occupation_accumulate_avx2,
};

}  // namespace atlaslab::kern

#endif  // x86_64
