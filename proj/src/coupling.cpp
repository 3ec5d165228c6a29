#include "atlaslab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "atlaslab/ergodic_stats.hpp"
#include "atlaslab/parallel.hpp"
#include "atlaslab/rng.hpp"

namespace atlaslab::coupling {

double gaussian_tail(double u) { return ergodic_stats::normal_tail(u); }

std::vector<double> d_inv_apply(std::span<const double> x) {
    std::vector<double> u(x.size());
    double suffix = 0.0;
    for (std::size_t j = x.size(); j-- > 0;) {
        suffix += x[j];
        u[j] = -suffix;
    }
    return u;
}

CouplingGeometry build_geometry(std::span<const double> z, double delta1,
                                double delta2, int i,
                                const drift_model::DriftSpec& spec) {
    if (i < 1) throw GeometryError("build_geometry: i must be >= 1");
    const std::size_t dim = static_cast<std::size_t>(i) + 1;
    if (z.size() < dim) {
        throw GeometryError("build_geometry: need gaps 1..i+1");
    }
    for (std::size_t j = 0; j < dim; ++j) {
        if (!(z[j] > 0.0)) {
            throw GeometryError("build_geometry: z must be positive up to i+1");
        }
    }
    if (!(delta1 > 0.0)) throw GeometryError("build_geometry: delta1 must be > 0");
    if (!(delta2 > 0.0) || !(delta2 < z[dim - 1])) {
        throw GeometryError("build_geometry: need 0 < delta2 < z_{i+1}");
    }

    CouplingGeometry g;
    g.i = i;
    g.b.resize(dim);
    for (std::size_t j = 0; j + 1 < dim; ++j) {
        g.b[j] = spec.h(j + 1);  // g_{j+1} - g_j
    }
    g.b[dim - 1] = -spec.g(static_cast<std::size_t>(i));

    g.psi0.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(dim));
    g.psi0[dim - 1] = 0.5 * (z[dim - 1] + delta2);
    g.psi0_tilde = g.psi0;
    g.psi0_tilde[dim - 2] = z[dim - 2] + delta1;
    g.psi0_tilde[dim - 1] = 0.5 * (z[dim - 1] - delta2);

    g.v.assign(dim, delta2 - delta1);
    g.v[dim - 1] = delta2;
    double v2 = 0.0;
    for (double vj : g.v) v2 += vj * vj;
    g.v_norm = std::sqrt(v2);

    const double sqrt2 = std::sqrt(2.0);
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dim; ++j) {
        const double norm = (j + 1 < dim) ? sqrt2 : 1.0;
        r = std::min(r, std::min(g.psi0[j], g.psi0_tilde[j]) / norm);
    }
    g.r = r;
    if (!(g.r > 0.0)) {
        throw GeometryError("build_geometry: clearance radius is not positive");
    }

    const std::vector<double> dinv_b = d_inv_apply(g.b);
    double nb = 0.0;
    for (double x : dinv_b) nb += x * x;
    g.time_cap = g.r / (8.0 * std::sqrt(nb) + 1.0);
    return g;
}

SmallMatrix mirror_reflection(std::span<const double> v) {
    double v2 = 0.0;
    for (double x : v) v2 += x * x;
    if (!(v2 > 0.0)) {
        throw DegenerateDirection("mirror_reflection: zero direction");
    }
    const int n = static_cast<int>(v.size());
    SmallMatrix h;
    h.n = n;
    h.a.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double id = r == c ? 1.0 : 0.0;
            h.a[static_cast<std::size_t>(r * n + c)] =
                id - 2.0 * v[static_cast<std::size_t>(r)] *
                         v[static_cast<std::size_t>(c)] / v2;
        }
    }
    return h;
}

namespace {

std::vector<double> positions_from_gaps(std::span<const double> gaps,
                                        std::size_t n) {
    std::vector<double> y(n);
    y[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) y[j] = y[j - 1] + gaps[j - 1];
    return y;
}

}  // namespace

CoupledPairResult run_coupled_pair(std::span<const double> z, double delta1,
                                   double delta2, int i,
                                   const drift_model::DriftSpec& spec,
                                   const CoupledPairOptions& options) {
    const CouplingGeometry geom = build_geometry(z, delta1, delta2, i, spec);
    const dynamics::SimConfig& cfg = options.sim;
    cfg.validate();
    const std::size_t n = static_cast<std::size_t>(cfg.n_particles);
    const std::size_t dim = static_cast<std::size_t>(i) + 1;
    if (n < dim + 1) {
        throw ConfigError("coupled pair: need n_particles >= i+2");
    }
    if (z.size() < n - 1) {
        throw ConfigError("coupled pair: initial gaps must cover n-1 entries");
    }

    const bool events_on = options.underline_delta > 0.0;
    const double gl = spec.lower_drift_bound();
    if (events_on) {
        for (double s : options.event_s) {
            if (!(s > 0.0) || s > options.underline_delta) {
                throw ConfigError(
                    "coupled pair: event horizon must be in (0, underline_delta]");
            }
            if (s > cfg.horizon + 1e-12) {
                throw ConfigError("coupled pair: event horizon beyond sim horizon");
            }
        }
    }

    std::vector<double> y1 = positions_from_gaps(z, n);
    const std::vector<double> y_init = y1;
    std::vector<double> y2 = y1;
    for (std::size_t j = 0; j + 1 < dim; ++j) y2[j] += delta2 - delta1;
    y2[dim - 1] += delta2;

    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const std::int64_t steps = cfg.steps();
    const std::size_t k = static_cast<std::size_t>(cfg.k_obs);

    std::vector<double> drift_dt(n);
    for (std::size_t r = 0; r < n; ++r) drift_dt[r] = spec.g(r) * dt;

    const double v_norm2 = geom.v_norm * geom.v_norm;
    const double cross_target = 0.5 * v_norm2;

    const double e1_level =
        events_on ? 0.5 * (y_init[dim - 1] + y_init[dim] + delta2) +
                        gl * options.underline_delta
                  : 0.0;
    std::vector<std::int64_t> e1_step(options.event_s.size(), -1);
    std::vector<std::int64_t> e2_step(options.event_s.size(), -1);
    if (events_on) {
        for (std::size_t q = 0; q < options.event_s.size(); ++q) {
            e1_step[q] = static_cast<std::int64_t>(
                std::floor(options.event_s[q] / dt + 1e-9));
            const double w = std::min(options.event_s[q], geom.time_cap);
            e2_step[q] = static_cast<std::int64_t>(std::floor(w / dt + 1e-9));
        }
    }

    CoupledPairResult out;
    out.events.assign(options.event_s.size(), EventFlags{});

    RngStream rng(cfg.seed, cfg.replica, kSubstreamPath);
    std::vector<double> xi(n), xi2(n);
    std::vector<double> b_acc(n, 0.0);    // rank Brownian motions of copy 1
    std::vector<double> b_til(dim, 0.0);  // mirrored block of copy 2
    double m_acc = 0.0;                   // v' B(t)
    bool crossed = false;
    bool e1_ok = true;
    double min_m = 0.0, max_m = 0.0, max_mperp = 0.0;

    auto mperp_norm = [&]() {
        double s2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double c = b_acc[j] - geom.v[j] * m_acc / v_norm2;
            s2 += c * c;
        }
        return std::sqrt(s2);
    };
    auto record_frames = [&](double t) {
        out.times.push_back(t);
        for (std::size_t g = 1; g <= k; ++g) out.gaps1.push_back(y1[g] - y1[g - 1]);
        for (std::size_t g = 1; g <= k; ++g) out.gaps2.push_back(y2[g] - y2[g - 1]);
    };
    auto snap_if_close = [&](double tau) {
        double max_diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            max_diff = std::max(max_diff, std::abs(y2[j] - y1[j]));
        }
        if (max_diff <= options.merge_tol) {
            y2 = y1;  // bitwise merge; coupledness persists exactly from here
            out.merged = true;
            out.tau_c_hat = tau;
        }
    };

    for (std::int64_t step_n = 0;; ++step_n) {
        const double t = static_cast<double>(step_n) * dt;
        if (events_on) {
            if (e1_ok) {
                double lowest = std::numeric_limits<double>::infinity();
                for (std::size_t j = dim; j < n; ++j) {
                    lowest = std::min(lowest, y_init[j] + b_acc[j]);
                }
                if (lowest <= e1_level) e1_ok = false;
            }
            const double m = m_acc / geom.v_norm;
            min_m = std::min(min_m, m);
            max_m = std::max(max_m, m);
            max_mperp = std::max(max_mperp, mperp_norm());
            for (std::size_t q = 0; q < options.event_s.size(); ++q) {
                if (e1_step[q] == step_n) out.events[q].e1 = e1_ok;
                if (e2_step[q] == step_n) {
                    out.events[q].e2 = min_m > -geom.r / 4.0 &&
                                       max_m >= geom.v_norm / 2.0 &&
                                       max_mperp < geom.r / 4.0;
                }
            }
        }
        if (step_n % cfg.record_stride == 0 || step_n == steps) record_frames(t);
        if (step_n == steps) break;

        rng.fill_normals(xi);
        double v_dot_xi = 0.0;
        for (std::size_t j = 0; j < dim; ++j) v_dot_xi += geom.v[j] * xi[j];
        const double m_new = m_acc + sqrt_dt * v_dot_xi;
        const bool crossing = !crossed && m_new >= cross_target;

        kern::active().euler_update(y1.data(), drift_dt.data(), sqrt_dt,
                                    xi.data(), n);
        dynamics::insertion_sort(y1.data(), static_cast<int>(n));

        if (out.merged) {
            y2 = y1;
        } else if (crossing) {
            const double theta = (cross_target - m_acc) / (m_new - m_acc);
            out.sigma_hat = t + theta * dt;
            for (std::size_t j = 0; j < dim; ++j) {
                const double b_new = b_acc[j] + sqrt_dt * xi[j];
                const double incr = (b_new - geom.v[j]) - b_til[j];
                y2[j] += drift_dt[j] + incr;
                b_til[j] = b_new - geom.v[j];
            }
            for (std::size_t j = dim; j < n; ++j) {
                y2[j] += drift_dt[j] + sqrt_dt * xi[j];
            }
            dynamics::insertion_sort(y2.data(), static_cast<int>(n));
            crossed = true;
            snap_if_close(out.sigma_hat);
        } else if (crossed) {
            kern::active().euler_update(y2.data(), drift_dt.data(), sqrt_dt,
                                        xi.data(), n);
            dynamics::insertion_sort(y2.data(), static_cast<int>(n));
            snap_if_close(t + dt);
        } else {
            const double coeff = 2.0 * v_dot_xi / v_norm2;
            for (std::size_t j = 0; j < dim; ++j) {
                xi2[j] = xi[j] - coeff * geom.v[j];
                b_til[j] += sqrt_dt * xi2[j];
            }
            for (std::size_t j = dim; j < n; ++j) xi2[j] = xi[j];
            kern::active().euler_update(y2.data(), drift_dt.data(), sqrt_dt,
                                        xi2.data(), n);
            dynamics::insertion_sort(y2.data(), static_cast<int>(n));
        }

        for (std::size_t j = 0; j < n; ++j) b_acc[j] += sqrt_dt * xi[j];
        m_acc = m_new;
    }

    out.final_gaps1.resize(k);
    out.final_gaps2.resize(k);
    for (std::size_t g = 1; g <= k; ++g) {
        out.final_gaps1[g - 1] = y1[g] - y1[g - 1];
        out.final_gaps2[g - 1] = y2[g] - y2[g - 1];
    }
    return out;
}

EventProbabilities event_probabilities(std::span<const double> z, double delta1,
                                       double delta2, int i,
                                       const drift_model::DriftSpec& spec,
                                       double s, double underline_delta,
                                       const dynamics::SimConfig& base,
                                       std::size_t replicas, unsigned threads) {
    const double gl = spec.lower_drift_bound();
    if (i < 1 || z.size() <= static_cast<std::size_t>(i)) {
        throw ConfigError("event_probabilities: z must cover gaps 1..i+1");
    }
    const double z_ip1 = z[static_cast<std::size_t>(i)];
    if (!(underline_delta > 0.0) ||
        !(underline_delta < z_ip1 / (2.0 + 4.0 * gl))) {
        throw ConfigError(
            "event_probabilities: underline_delta outside (0, z_{i+1}/(2+4 g^l))");
    }
    if (!(s > 0.0) || s > underline_delta) {
        throw ConfigError("event_probabilities: need 0 < s <= underline_delta");
    }
    if (!(delta1 < underline_delta) || !(delta2 < underline_delta)) {
        throw ConfigError("event_probabilities: deltas must be < underline_delta");
    }

    struct Cell {
        bool e1 = false, e2 = false, coupled = false;
    };
    std::vector<Cell> cells(replicas);
    const std::vector<double> z_copy(z.begin(), z.end());

    parallel_for(replicas, threads, [&](std::size_t r) {
        CoupledPairOptions opt;
        opt.sim = base;
        opt.sim.horizon = s;
        opt.sim.replica = static_cast<uint32_t>(r);
        opt.underline_delta = underline_delta;
        opt.event_s = {s};
        const auto res =
            run_coupled_pair(z_copy, delta1, delta2, i, spec, opt);
        cells[r].e1 = res.events[0].e1;
        cells[r].e2 = res.events[0].e2;
        cells[r].coupled = res.coupled_by(s);
    });

    EventProbabilities out;
    out.n = replicas;
    for (const auto& c : cells) {
        out.count_e1 += c.e1 ? 1 : 0;
        out.count_e2 += c.e2 ? 1 : 0;
        out.count_e += (c.e1 && c.e2) ? 1 : 0;
        out.count_coupled += c.coupled ? 1 : 0;
        out.violations += (c.e1 && c.e2 && !c.coupled) ? 1 : 0;
    }
    return out;
}

double event_e1_upper_bound(std::span<const double> z, int i,
                            const drift_model::DriftSpec& spec, double s,
                            double underline_delta, int n_particles) {
    const double gl = spec.lower_drift_bound();
    const std::size_t n = static_cast<std::size_t>(n_particles);
    const std::vector<double> y = positions_from_gaps(z, n);
    const double z_ip1 = z[static_cast<std::size_t>(i)];
    const double c1 = 0.5 * (z_ip1 - (2.0 * gl + 1.0) * underline_delta);
    double tail_sum = 0.0;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
        tail_sum += std::exp(-y[j] * y[j] / 8.0);
    }
    const double y_ip1 = y[static_cast<std::size_t>(i) + 1];
    return std::sqrt(8.0) * std::exp(-c1 * c1 / (4.0 * s)) *
           std::exp(y_ip1 * y_ip1 / 4.0) * tail_sum;
}

}  // namespace atlaslab::coupling
