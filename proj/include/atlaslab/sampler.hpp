#pragma once

#include <span>
#include <variant>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/rng.hpp"

namespace atlaslab::sampler {

struct ExponentialMarginal {
    double rate;
};

struct EmpiricalMarginal {
    std::vector<double> samples;  // replayed as a multiset
};

using Marginal = std::variant<ExponentialMarginal, EmpiricalMarginal>;

struct ProductLaw {
    std::vector<Marginal> components;

    std::size_t k() const { return components.size(); }
    void validate() const;

    // pi_a truncated to the first k gaps.
    static ProductLaw pi_a(const drift_model::DriftSpec& spec, double a,
                           std::size_t k);
    static ProductLaw exponential(std::span<const double> rates);
};

// Independent draws per component via inverse CDF of the uniform stream.
void sample_gaps(const ProductLaw& law, RngStream& rng, std::span<double> out);
std::vector<double> sample_gaps(const ProductLaw& law, RngStream& rng);

// int e^{lambda z} Exp(nu)(dz) = nu / (nu - lambda), lambda < nu.
double laplace_exponential(double nu, double lambda);

// Partial products of Hellinger affinities of Exp(rate_a[n]) vs Exp(rate_b[n]);
// decay toward zero is the computational face of Kakutani mutual singularity.
std::vector<double> kakutani_affinity_product(std::span<const double> rates_a,
                                              std::span<const double> rates_b);

}  // namespace atlaslab::sampler
