#pragma once

#include <limits>
#include <span>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/dynamics.hpp"

namespace atlaslab::coupling {

// Complementary normal CDF via the stable erfc evaluation.
double gaussian_tail(double u);

// Geometry of one mirror-coupling instance (z, delta1, delta2, i).
//
// Psi tracks (Z_1..Z_i, mid - X_i) of the lower block; the bidiagonal D
// (diag -1, superdiag +1) maps driving noise into Psi, and D^{-1} is the
// upper-triangular all -1 matrix. The clearance radius r is the distance of
// the segment joining the transformed starting points to the boundary of
// {u : D u >= 0}; because that domain is an intersection of half-spaces whose
// slacks are affine along the segment, r has the closed form
// min_j min(Psi_j(0), tilde Psi_j(0)) / ||row_j(D)||, which the tests validate
// against a brute-force segment-sampling oracle.
struct CouplingGeometry {
    int i = 0;
    std::vector<double> b;           // Psi drift, size i+1
    std::vector<double> psi0;        // size i+1
    std::vector<double> psi0_tilde;  // size i+1
    std::vector<double> v;           // D^{-1}(tilde Psi(0) - Psi(0))
    double v_norm = 0.0;
    double r = 0.0;
    double time_cap = 0.0;  // r / (8 ||D^{-1} b|| + 1)
};

CouplingGeometry build_geometry(std::span<const double> z, double delta1,
                                double delta2, int i,
                                const drift_model::DriftSpec& spec);

// u = D^{-1} x for the upper-triangular inverse: u_j = -(x_j + ... + x_end).
std::vector<double> d_inv_apply(std::span<const double> x);

struct SmallMatrix {
    int n = 0;
    std::vector<double> a;  // row-major
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r * n + c)]; }
};

// H = I - 2 v v' / ||v||^2 (orthogonal involution).
SmallMatrix mirror_reflection(std::span<const double> v);

struct CoupledPairOptions {
    dynamics::SimConfig sim;
    double merge_tol = 1e-9;
    // events are tracked when underline_delta > 0; each s must satisfy
    // s <= underline_delta
    double underline_delta = 0.0;
    std::vector<double> event_s;
};

struct EventFlags {
    bool e1 = false;
    bool e2 = false;
};

struct CoupledPairResult {
    double sigma_hat = std::numeric_limits<double>::infinity();
    double tau_c_hat = std::numeric_limits<double>::infinity();
    bool merged = false;
    std::vector<EventFlags> events;  // aligned with options.event_s
    std::vector<double> times;       // recorded frames
    std::vector<double> gaps1, gaps2;  // frame-major, k_obs per frame
    std::vector<double> final_gaps1, final_gaps2;

    bool coupled_by(double s) const { return merged && tau_c_hat <= s; }
};

// Simulates the pair (Z, tilde Z) started from z and z^{delta1,delta2,i}:
// ranks 0..i of the second copy are driven by the mirror image of the first
// copy's noise until v'B crosses ||v||^2/2, ranks > i synchronously. At the
// crossing step the mirrored increment is completed so that tilde B = B - v
// holds at the step end (sigma refined by linear interpolation inside the
// step), after which increments are identical and a successful merge leaves
// the two states bitwise equal.
CoupledPairResult run_coupled_pair(std::span<const double> z, double delta1,
                                   double delta2, int i,
                                   const drift_model::DriftSpec& spec,
                                   const CoupledPairOptions& options);

struct EventProbabilities {
    std::size_t n = 0;
    std::size_t count_e1 = 0, count_e2 = 0, count_e = 0, count_coupled = 0;
    std::size_t violations = 0;  // E holds but not coupled by s

    double p_e1() const { return ratio(count_e1); }
    double p_e2() const { return ratio(count_e2); }
    double p_e() const { return ratio(count_e); }
    double p_coupled() const { return ratio(count_coupled); }

  private:
    double ratio(std::size_t c) const {
        return n > 0 ? static_cast<double>(c) / static_cast<double>(n) : 0.0;
    }
};

EventProbabilities event_probabilities(std::span<const double> z, double delta1,
                                       double delta2, int i,
                                       const drift_model::DriftSpec& spec,
                                       double s, double underline_delta,
                                       const dynamics::SimConfig& base,
                                       std::size_t replicas, unsigned threads);

// sqrt(8) exp(-c1^2/4s) exp(y_{i+1}^2/4) sum_{j>i} exp(-y_j^2/8) with
// c1 = (z_{i+1} - (2 g^l + 1) underline_delta)/2, positions anchored at
// y_0 = 0 and the sum over the simulated particles.
double event_e1_upper_bound(std::span<const double> z, int i,
                            const drift_model::DriftSpec& spec, double s,
                            double underline_delta, int n_particles);

}  // namespace atlaslab::coupling
