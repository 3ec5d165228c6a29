#include "atlaslab/kernels.hpp"

#include <bit>
#include <cmath>

namespace atlaslab::kern {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

}  // namespace

PhiloxBlock philox4x32_10(const uint32_t ctr[4], const uint32_t key[2]) {
    uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c0;
        const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c2;
        const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
        const uint32_t lo0 = static_cast<uint32_t>(p0);
        const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
        const uint32_t lo1 = static_cast<uint32_t>(p1);
        const uint32_t n0 = hi1 ^ c1 ^ k0;
        const uint32_t n1 = lo1;
        const uint32_t n2 = hi0 ^ c3 ^ k1;
        const uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return PhiloxBlock{{c0, c1, c2, c3}};
}

namespace {

// log(1+s)/(1-s) tail coefficients: 1/3, 1/5, ..., 1/19. The reduced mantissa
// keeps |s| <= sqrt(2)-1 over (sqrt(2)+1), so the s^21 truncation term is
// below 1e-16 relative.
constexpr double kLn2Hi = 6.93147180369123816490e-01;  // 0x3FE62E42FEE00000
constexpr double kLn2Lo = 1.90821492927058770002e-10;  // 0x3DEA39EF35793C76
constexpr double kSqrt2 = 1.41421356237309514547;      // nextafter(sqrt(2))

}  // namespace

double det_log(double x) {
    const uint64_t bits = std::bit_cast<uint64_t>(x);
    double e = static_cast<double>(static_cast<int64_t>(bits >> 52)) - 1023.0;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) |
                                     0x3FF0000000000000ull);
    if (m > kSqrt2) {
        m = m * 0.5;
        e = e + 1.0;
    }
    const double s = (m - 1.0) / (m + 1.0);
    const double s2 = s * s;
    double p = 1.0 / 19.0;
    p = p * s2 + 1.0 / 17.0;
    p = p * s2 + 1.0 / 15.0;
    p = p * s2 + 1.0 / 13.0;
    p = p * s2 + 1.0 / 11.0;
    p = p * s2 + 1.0 / 9.0;
    p = p * s2 + 1.0 / 7.0;
    p = p * s2 + 1.0 / 5.0;
    p = p * s2 + 1.0 / 3.0;
    const double t1 = 2.0 * s;
    const double t2 = s2 * p;
    const double log_m = t1 + t1 * t2;
    const double a = e * kLn2Hi;
    const double b = e * kLn2Lo;
    return a + (log_m + b);
}

namespace {

// Acklam's coefficients.
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

}  // namespace

double det_norminv(double p) {
    if (p >= kPLow && p <= kPHigh) {
        const double q = p - 0.5;
        const double r = q * q;
        double num = kA[0];
        num = num * r + kA[1];
        num = num * r + kA[2];
        num = num * r + kA[3];
        num = num * r + kA[4];
        num = num * r + kA[5];
        double den = kB[0];
        den = den * r + kB[1];
        den = den * r + kB[2];
        den = den * r + kB[3];
        den = den * r + kB[4];
        den = den * r + 1.0;
        return q * num / den;
    }
    const double one_minus = 1.0 - p;
    const double pt = p < one_minus ? p : one_minus;
    const double q = std::sqrt(-2.0 * det_log(pt));
    double num = kC[0];
    num = num * q + kC[1];
    num = num * q + kC[2];
    num = num * q + kC[3];
    num = num * q + kC[4];
    num = num * q + kC[5];
    double den = kD[0];
    den = den * q + kD[1];
    den = den * q + kD[2];
    den = den * q + kD[3];
    den = den * q + 1.0;
    const double t = num / den;
    return p < 0.5 ? t : -t;
}

namespace {

void fill_u01_scalar(uint64_t seed, uint32_t replica, uint32_t substream,
                     uint64_t block0, std::size_t nblocks, double* out) {
    const uint32_t key[2] = {static_cast<uint32_t>(seed),
                             static_cast<uint32_t>(seed >> 32)};
    for (std::size_t j = 0; j < nblocks; ++j) {
        const uint64_t blk = block0 + j;
        const uint32_t ctr[4] = {static_cast<uint32_t>(blk),
                                 static_cast<uint32_t>(blk >> 32), replica,
                                 substream};
        const PhiloxBlock b = philox4x32_10(ctr, key);
        const uint64_t u0 =
            (static_cast<uint64_t>(b.x[1]) << 32) | b.x[0];
        const uint64_t u1 =
            (static_cast<uint64_t>(b.x[3]) << 32) | b.x[2];
        out[2 * j] = u01_from_bits(u0);
        out[2 * j + 1] = u01_from_bits(u1);
    }
}

void normal_from_u01_scalar(double* buf, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = det_norminv(buf[i]);
}

void exp_from_u01_scalar(double* buf, std::size_t n, double rate) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = -det_log(buf[i]) / rate;
}

void euler_update_scalar(double* y, const double* drift_dt, double sqrt_dt,
                         const double* xi, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y[i] + (drift_dt[i] + sqrt_dt * xi[i]);
    }
}

void occupation_accumulate_scalar(const double* z, std::size_t k,
                                  const double* eps, std::size_t ne, double dt,
                                  double* occ) {
    for (std::size_t i = 0; i < k; ++i) {
        const double zi = z[i];
        for (std::size_t e = 0; e < ne; ++e) {
            if (zi <= eps[e]) occ[i * ne + e] += dt;
        }
    }
}

}  // namespace

const KernelOps scalar_ops = {
    "scalar",          fill_u01_scalar,     normal_from_u01_scalar,
    exp_from_u01_scalar, euler_update_scalar, occupation_accumulate_scalar,
};

}  // namespace atlaslab::kern
