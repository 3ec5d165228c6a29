#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "atlaslab/kernels.hpp"
#include "atlaslab/rng.hpp"
#include "doctest.h"

using namespace atlaslab;

namespace {

// Salmon et al. known-answer vectors for philox4x32-10, cross-checked against
// an independent implementation.
struct Kat {
    uint32_t ctr[4];
    uint32_t key[2];
    uint32_t expect[4];
};

const Kat kKat[] = {
    {{0u, 0u, 0u, 0u}, {0u, 0u},
     {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
    {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
     {0xffffffffu, 0xffffffffu},
     {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
    {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
     {0xa4093822u, 0x299f31d0u},
     {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
    for (const auto& kat : kKat) {
        const auto block = kern::philox4x32_10(kat.ctr, kat.key);
        for (int i = 0; i < 4; ++i) CHECK(block.x[i] == kat.expect[i]);
    }
}

TEST_CASE("u01 mapping stays inside the open interval") {
    CHECK(kern::u01_from_bits(0) == 0x1.0p-53);
    CHECK(kern::u01_from_bits(~uint64_t{0}) < 1.0);
    CHECK(kern::u01_from_bits(~uint64_t{0}) > 0.999999999999999);
}

TEST_CASE("det_log accuracy") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> mant(1e-12, 1.0);
    for (int q = 0; q < 20000; ++q) {
        const double x = mant(gen);
        const double got = kern::det_log(x);
        const double want = std::log(x);
        CHECK(std::abs(got - want) <=
              1e-13 * std::max(1.0, std::abs(want)));
    }
    CHECK(kern::det_log(1.0) == 0.0);
}

TEST_CASE("det_norminv round trip through the normal CDF") {
    auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int q = 0; q < 20000; ++q) {
        double p = unif(gen);
        if (p <= 0.0 || p >= 1.0) continue;
        const double x = kern::det_norminv(p);
        CHECK(std::abs(normal_cdf(x) - p) < 2e-9);
    }
    // extreme tails stay finite
    CHECK(std::isfinite(kern::det_norminv(0x1.0p-53)));
    CHECK(std::isfinite(kern::det_norminv(1.0 - 0x1.0p-53)));
    CHECK(kern::det_norminv(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scalar and avx2 kernels agree bitwise") {
    if (!kern::avx2_available()) return;
    const auto& s = kern::scalar_ops;
    const auto& v = kern::avx2_ops;

    for (std::size_t n : {1ul, 2ul, 7ul, 8ul, 17ul, 64ul, 1001ul}) {
        std::vector<double> a(2 * n), b(2 * n);
        s.fill_u01(0x12345678abcdef01ull, 3, 1, 42, n, a.data());
        v.fill_u01(0x12345678abcdef01ull, 3, 1, 42, n, b.data());
        CHECK(bitwise_equal(a, b));

        auto an = a, bn = b;
        s.normal_from_u01(an.data(), an.size());
        v.normal_from_u01(bn.data(), bn.size());
        CHECK(bitwise_equal(an, bn));

        auto ae = a, be = b;
        s.exp_from_u01(ae.data(), ae.size(), 2.5);
        v.exp_from_u01(be.data(), be.size(), 2.5);
        CHECK(bitwise_equal(ae, be));
    }

    // euler update + occupation
    std::mt19937_64 gen(3);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t n : {3ul, 8ul, 33ul}) {
        std::vector<double> y1(n), drift(n), xi(n);
        for (std::size_t i = 0; i < n; ++i) {
            y1[i] = noise(gen);
            drift[i] = 1e-4 * noise(gen);
            xi[i] = noise(gen);
        }
        auto y2 = y1;
        s.euler_update(y1.data(), drift.data(), 0.01, xi.data(), n);
        v.euler_update(y2.data(), drift.data(), 0.01, xi.data(), n);
        CHECK(bitwise_equal(y1, y2));

        const std::vector<double> eps = {0.04, 0.08, 0.16, 0.32, 0.5};
        std::vector<double> z(n);
        for (auto& x : z) x = std::abs(noise(gen)) * 0.2;
        std::vector<double> o1(n * eps.size(), 0.0), o2(n * eps.size(), 0.0);
        for (int rep = 0; rep < 3; ++rep) {
            s.occupation_accumulate(z.data(), n, eps.data(), eps.size(), 1e-4,
                                    o1.data());
            v.occupation_accumulate(z.data(), n, eps.data(), eps.size(), 1e-4,
                                    o2.data());
        }
        CHECK(bitwise_equal(o1, o2));
    }
}

TEST_CASE("stream consumption order is call-pattern independent") {
    RngStream a(99, 5, 1);
    RngStream b(99, 5, 1);
    std::vector<double> one(13);
    a.fill_u01(one);
    std::vector<double> parts(13);
    b.fill_u01(std::span<double>(parts.data(), 4));
    parts[4] = b.next_u01();
    b.fill_u01(std::span<double>(parts.data() + 5, 8));
    CHECK(bitwise_equal(one, parts));

    // distinct substreams and replicas decorrelate
    RngStream c(99, 5, 2);
    RngStream d(99, 6, 1);
    CHECK(c.next_u01() != a.next_u01());
    CHECK(d.next_u01() != b.next_u01());
}

TEST_CASE("normal batch moments are sane") {
    RngStream rng(2024, 0, 1);
    const std::size_t n = 200000;
    std::vector<double> buf(n);
    rng.fill_normals(buf);
    double mean = 0.0, var = 0.0;
    for (double x : buf) mean += x;
    mean /= static_cast<double>(n);
    for (double x : buf) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}
