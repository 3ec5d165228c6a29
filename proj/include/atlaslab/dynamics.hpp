#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/rng.hpp"
#include "atlaslab/sampler.hpp"

namespace atlaslab::dynamics {

struct SimConfig {
    int n_particles = 2;
    double horizon = 1.0;
    double dt = 1e-4;
    int k_obs = 1;
    uint64_t seed = 0;
    uint32_t replica = 0;
    int record_stride = 100;

    void validate() const;
    std::int64_t steps() const;

    // Particles needed so the top of the cloud cannot influence the observed
    // gaps over [0, T]; validated empirically by truncation_sensitivity.
    static int default_truncation(int k_obs, double horizon);
};

struct EpsLadder {
    std::vector<double> eps;  // ascending

    double smallest() const { return eps.front(); }
    // {4, 8, 16, 32} sqrt(dt): floor controls scheme error, span controls
    // the linear extrapolation to eps -> 0.
    static EpsLadder default_for(double dt);
};

// Request to accumulate (1/eps_min) int f(Z_i) 1{Z_j <= eps_min} dt along the
// path (the occupation estimate of int f(Z_i) dL*_j) plus the plain time
// average of f(Z_i).
struct PairIntegrandRequest {
    int i = 1;
    int j = 2;
    std::function<double(double)> f;
    std::string label;
};

// Per-step hook for identity tests: (observed gaps before the step, rank
// noise of the step, t, dt).
using StepObserver = std::function<void(
    std::span<const double>, std::span<const double>, double, double)>;

struct GapTrajectory {
    int k_obs = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<double> gaps;  // frame-major: gaps[f * k_obs + (i-1)]
    std::vector<double> eps;
    std::vector<double> occupation;      // k_obs x ne, int_0^T 1{Z_i <= eps} dt
    std::vector<double> pair_integrals;  // per request
    std::vector<double> obs_averages;    // per request, (1/T) int f(Z_i) dt

    std::size_t frames() const { return times.size(); }
    double gap(std::size_t frame, int i) const {
        return gaps[frame * static_cast<std::size_t>(k_obs) +
                    static_cast<std::size_t>(i - 1)];
    }
    // index of the recorded frame closest to time t
    std::size_t frame_at(double t) const;
    double occupation_at(int i, std::size_t eps_index) const {
        return occupation[static_cast<std::size_t>(i - 1) * eps.size() +
                          eps_index];
    }
};

// Positions of the ordered state; the per-step re-sort realizes the ranking
// map of the unranked SDE, with stable order on ties.
void insertion_sort(double* y, int n);

// One Euler step: rank k receives g_k dt plus the k-th noise entry, then the
// state is re-sorted.
void step_ranked(std::vector<double>& y, std::span<const double> drift_dt,
                 double sqrt_dt, std::span<const double> xi);

// Spec-level single step on a sorted state, drawing its own noise.
void step_unranked(std::vector<double>& y, const drift_model::DriftSpec& spec,
                   double dt, RngStream& rng);

GapTrajectory simulate_gap_paths(
    const drift_model::DriftSpec& spec, const sampler::ProductLaw& initial_law,
    const SimConfig& cfg, const EpsLadder& ladder,
    const std::vector<PairIntegrandRequest>& integrands = {},
    const StepObserver& observer = nullptr);

GapTrajectory simulate_gap_paths(
    const drift_model::DriftSpec& spec, std::span<const double> initial_gaps,
    const SimConfig& cfg, const EpsLadder& ladder,
    const std::vector<PairIntegrandRequest>& integrands = {},
    const StepObserver& observer = nullptr);

struct TruncationResult {
    std::vector<int> n_list;
    // sup over the step grid of |Y^(N)_i(t) - Y^(N_max)_i(t)|,
    // sup_diff[n_index][i] for observed ranks i < k_obs
    std::vector<std::vector<double>> sup_diff;
};

// Couples all system sizes in n_list to shared rank-indexed increments and a
// shared initial configuration.
TruncationResult truncation_sensitivity(const drift_model::DriftSpec& spec,
                                        double a, const SimConfig& cfg,
                                        std::vector<int> n_list);

// Frames where two adjacent observed gaps are simultaneously below tol.
std::size_t triple_collision_monitor(const GapTrajectory& traj, double tol);

}  // namespace atlaslab::dynamics
