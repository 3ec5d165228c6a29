#include "atlaslab/drift_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atlaslab::drift_model {

double DriftSpec::prefix_sum(std::size_t n) const {
    const std::size_t stop = std::min(n, prefix.size());
    double s = 0.0;
    for (std::size_t i = 0; i < stop; ++i) s += prefix[i];
    return s;
}

double DriftSpec::bar_g(std::size_t n) const {
    if (n == 0) throw DomainError("bar_g: n must be >= 1");
    return prefix_sum(n) / static_cast<double>(n);
}

double DriftSpec::inf_bar_g() const {
    const std::size_t m = prefix.size();
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= m; ++n) inf = std::min(inf, bar_g(n));
    const double total = prefix_sum(m);
    if (m == 0) return 0.0;
    if (total >= 0.0) inf = std::min(inf, 0.0);
    return inf;
}

bool DriftSpec::inf_bar_g_attained() const {
    const std::size_t m = prefix.size();
    if (m == 0) return true;  // bar g_n = 0 everywhere
    const double inf = inf_bar_g();
    for (std::size_t n = 1; n <= m; ++n) {
        if (bar_g(n) == inf) return true;
    }
    return false;
}

double DriftSpec::lower_drift_bound() const {
    double worst = 0.0;
    for (double gi : prefix) worst = std::max(worst, -gi);
    return std::max(1.0, worst);
}

bool DriftSpec::d1_zero_tail() const {
    const std::size_t m = prefix.size();
    if (m == 0) return false;
    for (std::size_t n = 1; n <= m; ++n) {
        if (!(bar_g(n) > 0.0)) return false;
    }
    return true;
}

std::vector<double> average_drifts(const DriftSpec& spec, std::size_t n_max) {
    if (n_max < 1) throw DomainError("average_drifts: n_max must be >= 1");
    std::vector<double> out(n_max);
    double running = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        running += spec.g(n - 1);
        out[n - 1] = running / static_cast<double>(n);
    }
    return out;
}

StationaryRates pi_a_rates(const DriftSpec& spec, double a, std::size_t k) {
    if (k < 1) throw DomainError("pi_a_rates: k must be >= 1");
    StationaryRates result;
    result.a = a;
    result.a_min = spec.a_min();
    result.boundary = (a == result.a_min);
    result.rates.resize(k);
    for (std::size_t n = 1; n <= k; ++n) {
        // n (2 bar g_n + a) written as 2 S_n + n a, which keeps the atlas1
        // rates 2 + n a exact in floating point
        const double rate = 2.0 * spec.prefix_sum(n) + static_cast<double>(n) * a;
        if (!(rate > 0.0)) {
            throw NonpositiveRate("pi_a_rates: rate for gap " +
                                  std::to_string(n) + " is " +
                                  std::to_string(rate) +
                                  " (a outside admissible range)");
        }
        result.rates[n - 1] = rate;
    }
    return result;
}

D1Certificate check_class_D1(const DriftSpec& spec, std::size_t n_max) {
    if (n_max < 2) throw DomainError("check_class_D1: n_max must be >= 2");
    D1Certificate cert;
    const std::vector<double> bars = average_drifts(spec, n_max);
    double running_min = bars[0];
    for (std::size_t n = 2; n <= n_max; ++n) {
        if (bars[n - 1] < running_min) cert.witnesses.push_back(n);
        running_min = std::min(running_min, bars[n - 1]);
    }
    cert.member = !cert.witnesses.empty();
    return cert;
}

std::vector<double> finite_system_rates(const DriftSpec& spec, std::size_t N) {
    if (N < 2) throw DomainError("finite_system_rates: N must be >= 2");
    const std::vector<double> bars = average_drifts(spec, N);
    const double bar_n = bars[N - 1];
    std::vector<double> rates(N - 1);
    for (std::size_t l = 1; l < N; ++l) {
        const double rate = 2.0 * static_cast<double>(l) * (bars[l - 1] - bar_n);
        if (!(rate > 0.0)) {
            throw NonpositiveRate(
                "finite_system_rates: bar g_" + std::to_string(l) +
                " <= bar g_" + std::to_string(N) + " (N is not a D1 witness)");
        }
        rates[l - 1] = rate;
    }
    return rates;
}

}  // namespace atlaslab::drift_model
