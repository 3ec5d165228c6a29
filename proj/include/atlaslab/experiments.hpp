#pragma once

#include "atlaslab/config.hpp"
#include "atlaslab/coupling.hpp"
#include "atlaslab/dynamics.hpp"
#include "atlaslab/local_time.hpp"
#include "atlaslab/report.hpp"

namespace atlaslab::experiments {

// Replica-indexed reductions of one stationary ensemble; every vector is
// addressed by replica id, so merging is scheduling-independent.
struct EnsembleResult {
    std::vector<double> check_times;
    std::vector<std::vector<double>> occupations;  // [r] -> k_obs x ne
    std::vector<std::vector<double>> gaps_at;      // [r] -> time-major k_obs
    std::vector<std::vector<double>> pair_lhs;     // [r] -> per request
    std::vector<std::vector<double>> pair_fmean;   // [r] -> per request
};

EnsembleResult run_stationary_ensemble(
    const drift_model::DriftSpec& spec, double a,
    const dynamics::SimConfig& base, const dynamics::EpsLadder& ladder,
    const std::vector<dynamics::PairIntegrandRequest>& requests,
    const std::vector<double>& check_times, std::size_t replicas,
    unsigned threads);

// Fraction of pairs exactly merged by time s (no event bookkeeping).
struct CouplingProbability {
    std::size_t n = 0;
    std::size_t coupled = 0;
    double p() const {
        return n > 0 ? static_cast<double>(coupled) / static_cast<double>(n)
                     : 0.0;
    }
};

CouplingProbability coupling_probability(std::span<const double> z,
                                         double delta1, double delta2, int i,
                                         const drift_model::DriftSpec& spec,
                                         double s,
                                         const dynamics::SimConfig& base,
                                         std::size_t replicas, unsigned threads,
                                         double merge_tol = 1e-9);

// Runs the configured experiment, writes report.json/summary.txt and the
// experiment CSVs into cfg.out_dir, and returns the report.
report::ExperimentReport run_experiment(const config::ExperimentConfig& cfg);

}  // namespace atlaslab::experiments
