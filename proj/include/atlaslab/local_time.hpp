#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/dynamics.hpp"

namespace atlaslab::local_time {

// psi_eps: z^2/2 on [0, eps], then linear continuation; C^1 with derivative
// clamped to [0, eps] and curvature indicator 1{z < eps}.
struct PsiEps {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

PsiEps psi_eps_transform(double z, double eps);

struct NuEstimate {
    int i = 0;
    std::vector<double> eps;
    std::vector<double> raw;          // mean over replicas of occ/(eps T)
    double extrapolated = 0.0;        // linear-in-eps intercept
    double stderr_ = 0.0;             // Monte Carlo SE of the intercept
    double fit_r2 = 1.0;              // fit quality on the raw means
    std::vector<double> per_replica;  // per-replica intercepts
};

// occupations[r] is a GapTrajectory::occupation row (k_obs x ne) of replica r.
NuEstimate estimate_nu(const std::vector<std::vector<double>>& occupations,
                       int k_obs, std::span<const double> eps, double horizon,
                       int i);

struct BalanceResidual {
    int i = 0;
    double residual = 0.0;
    double stderr_ = 0.0;
    bool pass = false;
};

// Residuals h_i + nu_i - nu_{i-1}/2 - nu_{i+1}/2 for i = 2..k-1, with errors
// propagated through the per-replica estimates (covariances included).
// The i = 1 balance needs the L*_0 == 0 convention and is checked through the
// closed-form rates instead.
std::vector<BalanceResidual> check_balance_recursion(
    const std::vector<NuEstimate>& nu_hats, const drift_model::DriftSpec& spec);

struct ProductIdentityResult {
    int i = 0;
    int j = 0;
    std::string label;
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    bool pass = false;  // CIs overlap at 3 sigma
};

// lhs: occupation-weighted estimate of E int_0^1 f(Z_i) dL*_j (per-replica
// pair integrals). rhs: nu_j * time average of f(Z_i), delta-method error.
ProductIdentityResult check_product_identity(
    std::span<const double> lhs_per_replica,
    std::span<const double> fmean_per_replica, const NuEstimate& nu_j, int i,
    int j, const std::string& label);

struct LaplaceRow {
    double lambda = 0.0;
    double empirical = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;
    double rel_err = 0.0;
    bool pass = false;
};

// Empirical E e^{lambda Z_i} over replica samples vs nu_i/(nu_i - lambda).
// Admissible lambda < i bar g_i (the safe half of the finiteness range).
std::vector<LaplaceRow> check_laplace_identity(
    std::span<const double> samples, double nu_i, double lambda_bound,
    std::span<const double> lambdas, double rel_tol = 0.05);

}  // namespace atlaslab::local_time
