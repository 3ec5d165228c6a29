#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/errors.hpp"

namespace atlaslab::ergodic_stats {

// ---- shared statistical machinery ------------------------------------------

// Welford accumulator with an associative merge, so parallel reductions give
// the same result in any grouping of contiguous chunks.
struct RunningMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningMoments& other);
    double variance() const;  // sample variance (n-1)
    double stderr_mean() const;
};

double normal_cdf(double x);
double normal_tail(double x);      // complementary CDF
double normal_quantile(double p);  // deterministic inverse CDF

struct RateMle {
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// rate = 1/mean with asymptotic CI rate (1 +- z_{alpha/2}/sqrt(n)).
RateMle rate_mle(std::span<const double> samples, double alpha = 0.05);

// Limiting Kolmogorov distribution Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool small_sample = false;  // conservative DKW bound used instead
};

// One-sample KS against Exp(rate), simple hypothesis. Asymptotic p-value with
// the Stephens small-n correction; for n < 10 the conservative DKW bound
// 2 exp(-2 n D^2) is reported and flagged.
KsResult ks_exponential(std::span<const double> samples, double rate);

// Two-sample KS (asymptotic p through the effective sample size).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Holm-Bonferroni: returns per-hypothesis rejection flags at familywise alpha.
std::vector<bool> holm_bonferroni(std::span<const double> p_values,
                                  double alpha);

struct WilsonCi {
    double lo = 0.0;
    double hi = 1.0;
};

WilsonCi wilson_ci(std::size_t successes, std::size_t n, double alpha = 0.05);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    double r2 = 1.0;
};

LineFit ols_line(std::span<const double> x, std::span<const double> y,
                 double alpha = 0.05);

// ---- observables and time averages -----------------------------------------

struct Observable {
    enum class Kind { coordinate, indicator, exp_moment, custom };
    Kind kind = Kind::coordinate;
    int i = 1;           // 1-based gap index
    double param = 0.0;  // threshold or lambda
    std::function<double(std::span<const double>)> custom;
    std::string description;
    bool bounded = false;
    double lo = 0.0, hi = 1.0;

    double operator()(std::span<const double> gaps) const;

    static Observable coordinate(int i);
    static Observable indicator(int i, double threshold);
    static Observable exp_moment(int i, double lambda);
};

// Trapezoid running average; merging contiguous segments is exact.
struct TrapezoidAverager {
    double t0 = 0.0, t_last = 0.0, v0 = 0.0, v_last = 0.0, integral = 0.0;
    bool started = false;

    void add(double t, double v);
    void merge(const TrapezoidAverager& next);  // next must continue this one
    double average() const;  // (1/(t-t0)) int_0^t; v(t0) when degenerate
};

// A_t of an observable along a recorded trajectory grid.
std::vector<double> time_average(std::span<const double> times,
                                 std::span<const double> values);

// ---- scaled-transposition invariance ----------------------------------------

struct SwapInvarianceResult {
    int i = 0;
    std::vector<double> ks_p;  // per coordinate 1..k of the transformed sample
    std::vector<bool> rejected;
    bool pass = false;
};

// Samples z ~ pi_a (k = i+1 coordinates), applies the scaled transposition
// (z_i, z_{i+1}) -> (c_i/c_{i+1} z_{i+1}, c_{i+1}/c_i z_i) and KS-tests every
// coordinate against its pi_a marginal, Holm-corrected at alpha.
SwapInvarianceResult swap_invariance_test(const drift_model::DriftSpec& spec,
                                          double a, int i,
                                          std::size_t n_samples, uint64_t seed,
                                          double alpha = 0.01);

}  // namespace atlaslab::ergodic_stats
