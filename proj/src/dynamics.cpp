#include "atlaslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace atlaslab::dynamics {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("sim.dt: must be > 0");
    if (!(horizon >= dt)) throw ConfigError("sim.t: horizon must be >= dt");
    if (n_particles < 2) throw ConfigError("sim.n: need at least 2 particles");
    if (k_obs < 1 || k_obs > n_particles - 1) {
        throw ConfigError("sim.k_obs: must be in [1, n-1]");
    }
    if (record_stride < 1) throw ConfigError("sim.record_stride: must be >= 1");
}

std::int64_t SimConfig::steps() const {
    return std::llround(horizon / dt);
}

int SimConfig::default_truncation(int k_obs, double horizon) {
    const double spread = 8.0 * (horizon + std::sqrt(horizon));
    const int buffer = std::max(16, static_cast<int>(std::ceil(spread)));
    return k_obs + buffer;
}

EpsLadder EpsLadder::default_for(double dt) {
    const double root = std::sqrt(dt);
    return EpsLadder{{4.0 * root, 8.0 * root, 16.0 * root, 32.0 * root}};
}

std::size_t GapTrajectory::frame_at(double t) const {
    std::size_t best = 0;
    double best_d = std::abs(times[0] - t);
    for (std::size_t f = 1; f < times.size(); ++f) {
        const double d = std::abs(times[f] - t);
        if (d < best_d) {
            best_d = d;
            best = f;
        }
    }
    return best;
}

void insertion_sort(double* y, int n) {
    for (int i = 1; i < n; ++i) {
        const double v = y[i];
        int j = i - 1;
        while (j >= 0 && y[j] > v) {
            y[j + 1] = y[j];
            --j;
        }
        y[j + 1] = v;
    }
}

void step_ranked(std::vector<double>& y, std::span<const double> drift_dt,
                 double sqrt_dt, std::span<const double> xi) {
    kern::active().euler_update(y.data(), drift_dt.data(), sqrt_dt, xi.data(),
                                y.size());
    insertion_sort(y.data(), static_cast<int>(y.size()));
}

void step_unranked(std::vector<double>& y, const drift_model::DriftSpec& spec,
                   double dt, RngStream& rng) {
    const std::size_t n = y.size();
    std::vector<double> drift_dt(n);
    for (std::size_t k = 0; k < n; ++k) drift_dt[k] = spec.g(k) * dt;
    std::vector<double> xi(n);
    rng.fill_normals(xi);
    step_ranked(y, drift_dt, std::sqrt(dt), xi);
}

namespace {

std::vector<double> positions_from_gaps(std::span<const double> gaps,
                                        std::size_t n) {
    if (gaps.size() < n - 1) {
        throw ConfigError("initial gaps: need at least n-1 entries");
    }
    std::vector<double> y(n);
    y[0] = 0.0;  // anchor the lowest particle at the origin
    for (std::size_t j = 1; j < n; ++j) y[j] = y[j - 1] + gaps[j - 1];
    return y;
}

GapTrajectory simulate_impl(const drift_model::DriftSpec& spec,
                            std::vector<double> y, const SimConfig& cfg,
                            const EpsLadder& ladder,
                            const std::vector<PairIntegrandRequest>& integrands,
                            const StepObserver& observer) {
    cfg.validate();
    const std::size_t n = static_cast<std::size_t>(cfg.n_particles);
    const std::size_t k = static_cast<std::size_t>(cfg.k_obs);
    const std::size_t ne = ladder.eps.size();
    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const std::int64_t steps = cfg.steps();
    const double eps_min = ne > 0 ? ladder.smallest() : 0.0;

    for (const auto& req : integrands) {
        if (req.i == req.j) {
            throw DomainError("pair integrand: i and j must differ");
        }
        if (req.i < 1 || req.j < 1 || req.i > cfg.k_obs || req.j > cfg.k_obs) {
            throw ConfigError("pair integrand: indices must be observed gaps");
        }
        if (ne == 0) throw ConfigError("pair integrand: needs an eps ladder");
    }

    std::vector<double> drift_dt(n);
    for (std::size_t r = 0; r < n; ++r) drift_dt[r] = spec.g(r) * dt;

    GapTrajectory traj;
    traj.k_obs = cfg.k_obs;
    traj.dt = dt;
    traj.horizon = cfg.horizon;
    traj.eps = ladder.eps;
    traj.occupation.assign(k * ne, 0.0);
    traj.pair_integrals.assign(integrands.size(), 0.0);
    traj.obs_averages.assign(integrands.size(), 0.0);
    const std::size_t est_frames =
        static_cast<std::size_t>(steps / cfg.record_stride) + 2;
    traj.times.reserve(est_frames);
    traj.gaps.reserve(est_frames * k);

    RngStream path_rng(cfg.seed, cfg.replica, kSubstreamPath);
    std::vector<double> xi(n);
    std::vector<double> z(k);

    const auto& ops = kern::active();

    auto observe_gaps = [&]() {
        for (std::size_t i = 0; i < k; ++i) z[i] = y[i + 1] - y[i];
    };
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.gaps.insert(traj.gaps.end(), z.begin(), z.end());
    };

    for (std::int64_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        observe_gaps();
        if (step % cfg.record_stride == 0) record(t);
        if (ne > 0) {
            ops.occupation_accumulate(z.data(), k, traj.eps.data(), ne, dt,
                                      traj.occupation.data());
        }
        for (std::size_t q = 0; q < integrands.size(); ++q) {
            const auto& req = integrands[q];
            const double zi = z[static_cast<std::size_t>(req.i - 1)];
            const double fz = req.f(zi);
            traj.obs_averages[q] += fz * dt;
            if (z[static_cast<std::size_t>(req.j - 1)] <= eps_min) {
                traj.pair_integrals[q] += fz * dt;
            }
        }
        path_rng.fill_normals(xi);
        if (observer) observer(z, xi, t, dt);
        step_ranked(y, drift_dt, sqrt_dt, xi);
    }
    observe_gaps();
    record(static_cast<double>(steps) * dt);

    const double total_t = static_cast<double>(steps) * dt;
    for (std::size_t q = 0; q < integrands.size(); ++q) {
        traj.obs_averages[q] /= total_t;
        traj.pair_integrals[q] /= eps_min;
    }
    return traj;
}

}  // namespace

GapTrajectory simulate_gap_paths(const drift_model::DriftSpec& spec,
                                 const sampler::ProductLaw& initial_law,
                                 const SimConfig& cfg, const EpsLadder& ladder,
                                 const std::vector<PairIntegrandRequest>& integrands,
                                 const StepObserver& observer) {
    cfg.validate();
    if (initial_law.k() < static_cast<std::size_t>(cfg.n_particles - 1)) {
        throw ConfigError("initial law: needs n-1 gap marginals");
    }
    RngStream init_rng(cfg.seed, cfg.replica, kSubstreamInit);
    const std::vector<double> gaps = sampler::sample_gaps(initial_law, init_rng);
    return simulate_impl(
        spec,
        positions_from_gaps(gaps, static_cast<std::size_t>(cfg.n_particles)),
        cfg, ladder, integrands, observer);
}

GapTrajectory simulate_gap_paths(const drift_model::DriftSpec& spec,
                                 std::span<const double> initial_gaps,
                                 const SimConfig& cfg, const EpsLadder& ladder,
                                 const std::vector<PairIntegrandRequest>& integrands,
                                 const StepObserver& observer) {
    cfg.validate();
    return simulate_impl(
        spec,
        positions_from_gaps(initial_gaps,
                            static_cast<std::size_t>(cfg.n_particles)),
        cfg, ladder, integrands, observer);
}

TruncationResult truncation_sensitivity(const drift_model::DriftSpec& spec,
                                        double a, const SimConfig& cfg,
                                        std::vector<int> n_list) {
    cfg.validate();
    std::sort(n_list.begin(), n_list.end());
    if (n_list.empty()) throw ConfigError("truncation: empty N list");
    const int n_max = n_list.back();
    for (int n : n_list) {
        if (n < cfg.k_obs + 1) throw ConfigError("truncation: N below k_obs+1");
    }

    const auto law = sampler::ProductLaw::pi_a(
        spec, a, static_cast<std::size_t>(n_max - 1));
    RngStream init_rng(cfg.seed, cfg.replica, kSubstreamInit);
    const std::vector<double> gaps = sampler::sample_gaps(law, init_rng);

    std::vector<std::vector<double>> systems;
    systems.reserve(n_list.size());
    for (int n : n_list) {
        systems.push_back(
            positions_from_gaps(gaps, static_cast<std::size_t>(n)));
    }

    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> drift_dt(static_cast<std::size_t>(n_max));
    for (std::size_t r = 0; r < drift_dt.size(); ++r) {
        drift_dt[r] = spec.g(r) * dt;
    }

    TruncationResult result;
    result.n_list = n_list;
    result.sup_diff.assign(n_list.size(),
                           std::vector<double>(cfg.k_obs, 0.0));

    RngStream path_rng(cfg.seed, cfg.replica, kSubstreamPath);
    std::vector<double> xi(static_cast<std::size_t>(n_max));
    const auto& reference = systems.back();

    const std::int64_t steps = cfg.steps();
    for (std::int64_t step = 0; step < steps; ++step) {
        path_rng.fill_normals(xi);
        for (std::size_t s = 0; s < systems.size(); ++s) {
            auto& y = systems[s];
            kern::active().euler_update(y.data(), drift_dt.data(), sqrt_dt,
                                        xi.data(), y.size());
            insertion_sort(y.data(), static_cast<int>(y.size()));
        }
        for (std::size_t s = 0; s < systems.size(); ++s) {
            for (int i = 0; i < cfg.k_obs; ++i) {
                const double d = std::abs(systems[s][static_cast<std::size_t>(i)] -
                                          reference[static_cast<std::size_t>(i)]);
                result.sup_diff[s][static_cast<std::size_t>(i)] =
                    std::max(result.sup_diff[s][static_cast<std::size_t>(i)], d);
            }
        }
    }
    return result;
}

std::size_t triple_collision_monitor(const GapTrajectory& traj, double tol) {
    std::size_t flagged = 0;
    const std::size_t k = static_cast<std::size_t>(traj.k_obs);
    for (std::size_t f = 0; f < traj.frames(); ++f) {
        bool hit = false;
        for (std::size_t i = 0; i + 1 < k && !hit; ++i) {
            hit = traj.gaps[f * k + i] < tol && traj.gaps[f * k + i + 1] < tol;
        }
        if (hit) ++flagged;
    }
    return flagged;
}

}  // namespace atlaslab::dynamics
