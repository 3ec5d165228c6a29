#include "atlaslab/local_time.hpp"

#include <cmath>

#include "atlaslab/ergodic_stats.hpp"

namespace atlaslab::local_time {

PsiEps psi_eps_transform(double z, double eps) {
    if (!(eps > 0.0)) throw DomainError("psi_eps: eps must be > 0");
    if (z < 0.0) throw DomainError("psi_eps: z must be >= 0");
    PsiEps out;
    if (z <= eps) {
        out.value = 0.5 * z * z;
        out.d1 = z;
        out.d2 = z < eps ? 1.0 : 0.0;
    } else {
        out.value = 0.5 * eps * eps + (z - eps) * eps;
        out.d1 = eps;
        out.d2 = 0.0;
    }
    return out;
}

namespace {

// Least-squares intercept weights for a fit y = intercept + slope * x.
std::vector<double> intercept_weights(std::span<const double> x) {
    const std::size_t n = x.size();
    double xbar = 0.0;
    for (double v : x) xbar += v;
    xbar /= static_cast<double>(n);
    double sxx = 0.0;
    for (double v : x) sxx += (v - xbar) * (v - xbar);
    std::vector<double> w(n);
    for (std::size_t e = 0; e < n; ++e) {
        w[e] = 1.0 / static_cast<double>(n) + xbar * (xbar - x[e]) / sxx;
    }
    return w;
}

}  // namespace

NuEstimate estimate_nu(const std::vector<std::vector<double>>& occupations,
                       int k_obs, std::span<const double> eps, double horizon,
                       int i) {
    if (occupations.size() < 100) {
        throw InsufficientData("estimate_nu: need at least 100 replicas, got " +
                               std::to_string(occupations.size()));
    }
    if (i < 1 || i > k_obs) throw DomainError("estimate_nu: gap index out of range");
    if (eps.size() < 2) throw DomainError("estimate_nu: ladder needs >= 2 entries");
    const std::size_t ne = eps.size();
    const std::size_t row0 = static_cast<std::size_t>(i - 1) * ne;

    const std::vector<double> w = intercept_weights(eps);

    NuEstimate out;
    out.i = i;
    out.eps.assign(eps.begin(), eps.end());
    out.raw.assign(ne, 0.0);
    out.per_replica.reserve(occupations.size());

    ergodic_stats::RunningMoments intercept_moments;
    for (const auto& occ : occupations) {
        double x = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            const double v = occ[row0 + e] / (eps[e] * horizon);
            out.raw[e] += v;
            x += w[e] * v;
        }
        out.per_replica.push_back(x);
        intercept_moments.add(x);
    }
    const double r = static_cast<double>(occupations.size());
    for (auto& v : out.raw) v /= r;
    out.extrapolated = intercept_moments.mean;
    out.stderr_ = intercept_moments.stderr_mean();

    const auto fit = ergodic_stats::ols_line(eps, out.raw);
    out.fit_r2 = fit.r2;
    return out;
}

std::vector<BalanceResidual> check_balance_recursion(
    const std::vector<NuEstimate>& nu_hats, const drift_model::DriftSpec& spec) {
    if (nu_hats.size() < 3) {
        throw DomainError("check_balance_recursion: need estimates for i=1..k, k >= 3");
    }
    for (std::size_t q = 0; q < nu_hats.size(); ++q) {
        if (nu_hats[q].i != static_cast<int>(q) + 1) {
            throw DomainError("check_balance_recursion: estimates must cover i=1..k in order");
        }
    }
    const std::size_t replicas = nu_hats.front().per_replica.size();
    std::vector<BalanceResidual> out;
    for (std::size_t idx = 1; idx + 1 < nu_hats.size(); ++idx) {
        const int i = nu_hats[idx].i;
        const double hi = spec.h(static_cast<std::size_t>(i));
        ergodic_stats::RunningMoments res;
        const bool have_replicas =
            replicas > 1 && nu_hats[idx - 1].per_replica.size() == replicas &&
            nu_hats[idx + 1].per_replica.size() == replicas;
        if (have_replicas) {
            for (std::size_t rp = 0; rp < replicas; ++rp) {
                res.add(hi + nu_hats[idx].per_replica[rp] -
                        0.5 * nu_hats[idx - 1].per_replica[rp] -
                        0.5 * nu_hats[idx + 1].per_replica[rp]);
            }
        } else {
            res.add(hi + nu_hats[idx].extrapolated -
                    0.5 * nu_hats[idx - 1].extrapolated -
                    0.5 * nu_hats[idx + 1].extrapolated);
        }
        BalanceResidual row;
        row.i = i;
        row.residual = res.mean;
        row.stderr_ = res.stderr_mean();
        row.pass = std::abs(row.residual) <
                   std::max(3.0 * row.stderr_, 1e-12);
        out.push_back(row);
    }
    return out;
}

ProductIdentityResult check_product_identity(
    std::span<const double> lhs_per_replica,
    std::span<const double> fmean_per_replica, const NuEstimate& nu_j, int i,
    int j, const std::string& label) {
    if (i == j) throw DomainError("check_product_identity: i must differ from j");
    const std::size_t n = lhs_per_replica.size();
    if (n != fmean_per_replica.size() || n != nu_j.per_replica.size() || n < 2) {
        throw DomainError("check_product_identity: replica sets must match");
    }

    ergodic_stats::RunningMoments lhs_m, f_m, nu_m;
    double c_nf = 0.0;  // accumulate covariance of (nu, fmean)
    for (std::size_t r = 0; r < n; ++r) {
        lhs_m.add(lhs_per_replica[r]);
        f_m.add(fmean_per_replica[r]);
        nu_m.add(nu_j.per_replica[r]);
    }
    for (std::size_t r = 0; r < n; ++r) {
        c_nf += (nu_j.per_replica[r] - nu_m.mean) *
                (fmean_per_replica[r] - f_m.mean);
    }
    c_nf /= static_cast<double>(n - 1);

    ProductIdentityResult out;
    out.i = i;
    out.j = j;
    out.label = label;
    out.lhs = lhs_m.mean;
    out.lhs_se = lhs_m.stderr_mean();
    out.rhs = nu_m.mean * f_m.mean;
    // delta method for the product of two correlated means
    const double nn = static_cast<double>(n);
    const double var = f_m.mean * f_m.mean * nu_m.variance() / nn +
                       nu_m.mean * nu_m.mean * f_m.variance() / nn +
                       2.0 * nu_m.mean * f_m.mean * c_nf / nn;
    out.rhs_se = std::sqrt(std::max(0.0, var));
    out.pass = std::abs(out.lhs - out.rhs) <= 3.0 * (out.lhs_se + out.rhs_se);
    return out;
}

std::vector<LaplaceRow> check_laplace_identity(
    std::span<const double> samples, double nu_i, double lambda_bound,
    std::span<const double> lambdas, double rel_tol) {
    if (samples.size() < 2) {
        throw DomainError("check_laplace_identity: need samples");
    }
    std::vector<LaplaceRow> rows;
    for (double lambda : lambdas) {
        if (lambda >= lambda_bound) {
            throw DomainError("check_laplace_identity: lambda " +
                              std::to_string(lambda) +
                              " at or above admissible bound " +
                              std::to_string(lambda_bound));
        }
        ergodic_stats::RunningMoments m;
        for (double z : samples) m.add(std::exp(lambda * z));
        LaplaceRow row;
        row.lambda = lambda;
        row.empirical = m.mean;
        row.stderr_ = m.stderr_mean();
        row.target = nu_i / (nu_i - lambda);
        row.rel_err = std::abs(row.empirical - row.target) / row.target;
        row.pass = row.rel_err < rel_tol;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace atlaslab::local_time
