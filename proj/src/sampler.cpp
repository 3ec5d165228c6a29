#include "atlaslab/sampler.hpp"

#include <cmath>
#include <string>

namespace atlaslab::sampler {

void ProductLaw::validate() const {
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (const auto* e = std::get_if<ExponentialMarginal>(&components[i])) {
            if (!(e->rate > 0.0)) {
                throw NonpositiveRate("ProductLaw: component " +
                                      std::to_string(i + 1) +
                                      " has nonpositive rate");
            }
        } else {
            const auto& emp = std::get<EmpiricalMarginal>(components[i]);
            if (emp.samples.empty()) {
                throw DomainError("ProductLaw: empirical component " +
                                  std::to_string(i + 1) + " is empty");
            }
            for (double s : emp.samples) {
                if (s < 0.0) {
                    throw DomainError("ProductLaw: empirical component " +
                                      std::to_string(i + 1) +
                                      " has a negative sample");
                }
            }
        }
    }
}

ProductLaw ProductLaw::pi_a(const drift_model::DriftSpec& spec, double a,
                            std::size_t k) {
    const auto rates = drift_model::pi_a_rates(spec, a, k);
    ProductLaw law;
    law.components.reserve(k);
    for (double r : rates.rates) law.components.push_back(ExponentialMarginal{r});
    return law;
}

ProductLaw ProductLaw::exponential(std::span<const double> rates) {
    ProductLaw law;
    law.components.reserve(rates.size());
    for (double r : rates) law.components.push_back(ExponentialMarginal{r});
    law.validate();
    return law;
}

void sample_gaps(const ProductLaw& law, RngStream& rng, std::span<double> out) {
    if (out.size() != law.k()) {
        throw DomainError("sample_gaps: output span size mismatch");
    }
    rng.fill_u01(out);
    for (std::size_t i = 0; i < law.k(); ++i) {
        if (const auto* e = std::get_if<ExponentialMarginal>(&law.components[i])) {
            out[i] = -kern::det_log(out[i]) / e->rate;
        } else {
            const auto& emp = std::get<EmpiricalMarginal>(law.components[i]);
            auto idx = static_cast<std::size_t>(out[i] *
                                                static_cast<double>(emp.samples.size()));
            if (idx >= emp.samples.size()) idx = emp.samples.size() - 1;
            out[i] = emp.samples[idx];
        }
    }
}

std::vector<double> sample_gaps(const ProductLaw& law, RngStream& rng) {
    std::vector<double> out(law.k());
    sample_gaps(law, rng, out);
    return out;
}

double laplace_exponential(double nu, double lambda) {
    if (!(nu > 0.0)) throw DomainError("laplace_exponential: nu must be > 0");
    if (!(lambda < nu)) {
        throw DomainError("laplace_exponential: lambda must be < nu");
    }
    return nu / (nu - lambda);
}

std::vector<double> kakutani_affinity_product(std::span<const double> rates_a,
                                              std::span<const double> rates_b) {
    if (rates_a.size() != rates_b.size()) {
        throw DomainError("kakutani_affinity_product: length mismatch");
    }
    std::vector<double> partial(rates_a.size());
    double prod = 1.0;
    for (std::size_t n = 0; n < rates_a.size(); ++n) {
        const double l = rates_a[n];
        const double m = rates_b[n];
        if (!(l > 0.0) || !(m > 0.0)) {
            throw DomainError("kakutani_affinity_product: nonpositive rate at " +
                              std::to_string(n + 1));
        }
        prod *= 2.0 * std::sqrt(l * m) / (l + m);
        partial[n] = prod;
    }
    return partial;
}

}  // namespace atlaslab::sampler
