#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "atlaslab/errors.hpp"

namespace atlaslab::drift_model {

// A drift vector as a finite prefix with zero tail. The zero tail makes every
// spec square-summable (class D) and keeps the running-average analysis
// closed form.
struct DriftSpec {
    std::vector<double> prefix;  // g_0 .. g_{m-1}
    std::string name;

    double g(std::size_t i) const {
        return i < prefix.size() ? prefix[i] : 0.0;
    }

    // h_i = g_i - g_{i-1}, i >= 1 (the drift of gap i)
    double h(std::size_t i) const { return g(i) - g(i - 1); }

    // g_0 + ... + g_{n-1}
    double prefix_sum(std::size_t n) const;

    // bar g_n = (g_0 + ... + g_{n-1}) / n, n >= 1
    double bar_g(std::size_t n) const;

    // inf_n bar g_n. For a zero tail: bar g_n -> 0, so the infimum is
    // min(0, min over the prefix range) when the total sum is nonnegative and
    // the prefix minimum otherwise.
    double inf_bar_g() const;

    // Whether inf_n bar g_n is attained at a finite n (if not, a = a_min is
    // only admissible in the class-D1 boundary case).
    bool inf_bar_g_attained() const;

    double a_min() const { return -2.0 * inf_bar_g() + 0.0; }

    // g^l in [1, inf) with g_j >= -g^l for all j.
    double lower_drift_bound() const;

    // Exact D1 membership for zero-tail drifts: bar g_n stays strictly
    // positive on the prefix iff bar g_n decreases strictly through
    // infinitely many running minima beyond it.
    bool d1_zero_tail() const;

    static DriftSpec atlas1() { return DriftSpec{{1.0}, "atlas1"}; }
    static DriftSpec zero() { return DriftSpec{{}, "zero"}; }
};

std::vector<double> average_drifts(const DriftSpec& spec, std::size_t n_max);

struct StationaryRates {
    double a = 0.0;
    std::vector<double> rates;  // rates[n-1] = n (2 bar g_n + a)
    double a_min = 0.0;
    bool boundary = false;  // a == a_min (admissible only in class D1)
};

StationaryRates pi_a_rates(const DriftSpec& spec, double a, std::size_t k);

struct D1Certificate {
    bool member = false;  // finite-horizon certificate only
    std::vector<std::size_t> witnesses;
};

D1Certificate check_class_D1(const DriftSpec& spec, std::size_t n_max);

// Stationary rates 2 l (bar g_l - bar g_N), l = 1..N-1, of the N-particle
// finite gap system. N must be a D1 witness.
std::vector<double> finite_system_rates(const DriftSpec& spec, std::size_t N);

}  // namespace atlaslab::drift_model
