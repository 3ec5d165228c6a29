#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atlaslab/drift_model.hpp"
#include "atlaslab/dynamics.hpp"
#include "json.hpp"

namespace atlaslab::config {

enum class ExperimentKind {
    stationarity,
    nu_identities,
    product_identity,
    laplace,
    coupling_sweep,
    lemcty_search,
    ergodic_average,
    truncation_study,
    swap_invariance,
    kakutani,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

struct ProductPair {
    int i = 1;
    int j = 2;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::stationarity;
    drift_model::DriftSpec drift = drift_model::DriftSpec::atlas1();
    double a = 0.0;
    dynamics::SimConfig sim;
    std::size_t replicas = 1;
    std::string out_dir = "out";
    uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency

    std::vector<double> eps_scales = {4.0, 8.0, 16.0, 32.0};  // x sqrt(dt)

    // stationarity / nu checks
    std::vector<double> check_times;  // defaults to {T/4, T/2, T}

    // product identity
    std::vector<ProductPair> product_pairs = {{1, 2}, {2, 1}};
    std::string product_f = "exp";  // "exp" or "indicator:<threshold>"

    // laplace
    std::vector<double> lambda_factors = {-2.0, -1.0, 0.5};  // x nu_i/2
    int laplace_max_gap = 3;

    // coupling
    int coupling_i = 1;
    double z_fill = 1.0;               // initial gaps all equal to this
    std::vector<double> coupling_z;    // explicit override
    std::vector<double> delta1_grid = {0.05};
    std::vector<double> delta2_grid = {0.05};
    std::vector<double> s_grid = {0.05};
    double underline_delta = 0.0;  // 0 -> derived default
    double merge_tol = 1e-9;

    // lemcty search
    double eta = 0.1;
    std::vector<double> t1_fracs = {0.5, 0.75, 0.99};     // x underline_delta
    std::vector<double> delta0_fracs = {0.0625, 0.125, 0.25, 0.5};

    // ergodic average
    int ergodic_coordinate = 1;

    // truncation study
    std::vector<int> n_list = {8, 16, 32, 64};

    // swap invariance
    int swap_i = 1;
    std::size_t swap_samples = 100000;

    // kakutani
    double a_prime = 0.5;
    int kakutani_n = 50;

    dynamics::EpsLadder ladder() const;
    std::vector<double> resolved_check_times() const;
    std::vector<double> resolved_coupling_z(int n_particles) const;
    double resolved_underline_delta() const;

    nlohmann::ordered_json echo() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct ValidationNote {
    bool error = false;
    std::string message;
};

// Dry-run diagnostics: admissibility of a, truncation suggestion, rough cost.
std::vector<ValidationNote> validate_config(const ExperimentConfig& cfg);

}  // namespace atlaslab::config
