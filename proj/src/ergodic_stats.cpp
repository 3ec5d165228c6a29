#include "atlaslab/ergodic_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atlaslab/kernels.hpp"
#include "atlaslab/sampler.hpp"

namespace atlaslab::ergodic_stats {

void RunningMoments::add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
}

void RunningMoments::merge(const RunningMoments& other) {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(other.n);
    const double d = other.mean - mean;
    const double nt = na + nb;
    mean += d * nb / nt;
    m2 += other.m2 + d * d * na * nb / nt;
    n += other.n;
}

double RunningMoments::variance() const {
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
}

double RunningMoments::stderr_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) { return kern::det_norminv(p); }

RateMle rate_mle(std::span<const double> samples, double alpha) {
    if (samples.size() < 2) throw DomainError("rate_mle: need n >= 2");
    double sum = 0.0;
    for (double s : samples) {
        if (!(s > 0.0)) throw DomainError("rate_mle: nonpositive sample");
        sum += s;
    }
    const double n = static_cast<double>(samples.size());
    RateMle out;
    out.rate = n / sum;
    const double z = normal_quantile(1.0 - alpha / 2.0);
    out.ci_lo = out.rate * (1.0 - z / std::sqrt(n));
    out.ci_hi = out.rate * (1.0 + z / std::sqrt(n));
    return out;
}

double kolmogorov_q(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 0.2) return 1.0;  // series converges too slowly; Q is 1 to 1e-300
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16 * std::max(sum, 1e-300)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

KsResult ks_from_statistic(double d, std::size_t n_eff_count, double n_eff) {
    KsResult out;
    out.statistic = d;
    if (n_eff_count < 10) {
        out.small_sample = true;
        out.p_value = std::min(1.0, 2.0 * std::exp(-2.0 * n_eff * d * d));
        return out;
    }
    const double rn = std::sqrt(n_eff);
    out.p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
    return out;
}

}  // namespace

KsResult ks_exponential(std::span<const double> samples, double rate) {
    if (!(rate > 0.0)) throw DomainError("ks_exponential: rate must be > 0");
    if (samples.empty()) throw DomainError("ks_exponential: empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double f = 1.0 - std::exp(-rate * s[k]);
        const double lo = static_cast<double>(k) / n;
        const double hi = static_cast<double>(k + 1) / n;
        d = std::max(d, std::max(f - lo, hi - f));
    }
    return ks_from_statistic(d, s.size(), n);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < sa.size() && ib < sb.size()) {
        const double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] <= x) ++ia;
        while (ib < sb.size() && sb[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    return ks_from_statistic(d, static_cast<std::size_t>(n_eff), n_eff);
}

std::vector<bool> holm_bonferroni(std::span<const double> p_values,
                                  double alpha) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t u, std::size_t v) { return p_values[u] < p_values[v]; });
    std::vector<bool> rejected(m, false);
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double level = alpha / static_cast<double>(m - rank);
        if (p_values[order[rank]] <= level) {
            rejected[order[rank]] = true;
        } else {
            break;
        }
    }
    return rejected;
}

WilsonCi wilson_ci(std::size_t successes, std::size_t n, double alpha) {
    if (n == 0) throw DomainError("wilson_ci: n must be > 0");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return WilsonCi{std::max(0.0, center - half), std::min(1.0, center + half)};
}

LineFit ols_line(std::span<const double> x, std::span<const double> y,
                 double alpha) {
    if (x.size() != y.size() || x.size() < 3) {
        throw DomainError("ols_line: need matched samples with n >= 3");
    }
    const double n = static_cast<double>(x.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        xbar += x[k];
        ybar += y[k];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - xbar;
        const double dy = y[k] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw DomainError("ols_line: degenerate x values");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (fit.intercept + fit.slope * x[k]);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    const double sigma2 = ss_res / (n - 2.0);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    // normal CI; fine at the sample counts used here
    const double z = normal_quantile(1.0 - alpha / 2.0);
    fit.slope_ci_lo = fit.slope - z * fit.slope_se;
    fit.slope_ci_hi = fit.slope + z * fit.slope_se;
    return fit;
}

double Observable::operator()(std::span<const double> gaps) const {
    switch (kind) {
        case Kind::coordinate:
            return gaps[static_cast<std::size_t>(i - 1)];
        case Kind::indicator:
            return gaps[static_cast<std::size_t>(i - 1)] > param ? 1.0 : 0.0;
        case Kind::exp_moment:
            return std::exp(param * gaps[static_cast<std::size_t>(i - 1)]);
        case Kind::custom:
            return custom(gaps);
    }
    return 0.0;
}

Observable Observable::coordinate(int i) {
    Observable o;
    o.kind = Kind::coordinate;
    o.i = i;
    o.description = "Z_" + std::to_string(i);
    return o;
}

Observable Observable::indicator(int i, double threshold) {
    Observable o;
    o.kind = Kind::indicator;
    o.i = i;
    o.param = threshold;
    o.bounded = true;
    o.lo = 0.0;
    o.hi = 1.0;
    o.description = "1{Z_" + std::to_string(i) + " > " +
                    std::to_string(threshold) + "}";
    return o;
}

Observable Observable::exp_moment(int i, double lambda) {
    Observable o;
    o.kind = Kind::exp_moment;
    o.i = i;
    o.param = lambda;
    o.description = "exp(" + std::to_string(lambda) + " Z_" +
                    std::to_string(i) + ")";
    return o;
}

void TrapezoidAverager::add(double t, double v) {
    if (!started) {
        started = true;
        t0 = t_last = t;
        v0 = v_last = v;
        return;
    }
    integral += 0.5 * (v + v_last) * (t - t_last);
    t_last = t;
    v_last = v;
}

void TrapezoidAverager::merge(const TrapezoidAverager& next) {
    if (!next.started) return;
    if (!started) {
        *this = next;
        return;
    }
    // segments must be contiguous: next.t0 >= t_last; a shared junction point
    // contributes a zero-width bridge
    integral += 0.5 * (next.v0 + v_last) * (next.t0 - t_last);
    integral += next.integral;
    t_last = next.t_last;
    v_last = next.v_last;
}

double TrapezoidAverager::average() const {
    const double span = t_last - t0;
    return span > 0.0 ? integral / span : v_last;
}

std::vector<double> time_average(std::span<const double> times,
                                 std::span<const double> values) {
    if (times.size() != values.size() || times.empty()) {
        throw DomainError("time_average: mismatched or empty grids");
    }
    std::vector<double> out(times.size());
    TrapezoidAverager acc;
    for (std::size_t k = 0; k < times.size(); ++k) {
        acc.add(times[k], values[k]);
        out[k] = acc.average();
    }
    return out;
}

SwapInvarianceResult swap_invariance_test(const drift_model::DriftSpec& spec,
                                          double a, int i,
                                          std::size_t n_samples, uint64_t seed,
                                          double alpha) {
    if (i < 1) throw DomainError("swap_invariance_test: i must be >= 1");
    const std::size_t k = static_cast<std::size_t>(i) + 1;
    const auto rates = drift_model::pi_a_rates(spec, a, k);
    const auto law = sampler::ProductLaw::exponential(rates.rates);

    // c_n = 2 / rate_n, so the scale factors reduce to rate ratios.
    const double ci_over_cip1 = rates.rates[k - 1] / rates.rates[k - 2];
    const double cip1_over_ci = rates.rates[k - 2] / rates.rates[k - 1];

    std::vector<std::vector<double>> transformed(k);
    for (auto& col : transformed) col.reserve(n_samples);

    RngStream rng(seed, 0, kSubstreamInit);
    std::vector<double> z(k);
    for (std::size_t s = 0; s < n_samples; ++s) {
        sampler::sample_gaps(law, rng, z);
        const double zi = z[k - 2];
        const double zip1 = z[k - 1];
        z[k - 2] = ci_over_cip1 * zip1;
        z[k - 1] = cip1_over_ci * zi;
        for (std::size_t c = 0; c < k; ++c) transformed[c].push_back(z[c]);
    }

    SwapInvarianceResult result;
    result.i = i;
    result.ks_p.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        result.ks_p[c] = ks_exponential(transformed[c], rates.rates[c]).p_value;
    }
    result.rejected = holm_bonferroni(result.ks_p, alpha);
    result.pass = std::none_of(result.rejected.begin(), result.rejected.end(),
                               [](bool r) { return r; });
    return result;
}

}  // namespace atlaslab::ergodic_stats
