#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

namespace atlaslab::report {

struct CheckRecord {
    std::string name;
    double target = std::nan("");
    double estimate = std::nan("");
    double stderr_ = std::nan("");
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::ordered_json config_echo;
    uint64_t seed = 0;
    std::vector<CheckRecord> checks;
    std::vector<std::string> artifacts;  // file names relative to out_dir
    double wall_seconds = 0.0;

    bool all_pass() const;
    void add(CheckRecord rec);
};

// Deterministic float formatting shared by every CSV/JSON emitter.
std::string format_double(double v);

// Writes rows as CSV under dir, returns the bare file name.
std::string write_csv(const std::string& dir, const std::string& name,
                      const std::string& header,
                      const std::vector<std::vector<double>>& rows);

std::string write_text(const std::string& dir, const std::string& name,
                       const std::string& content);

// trajectory.csv sidecar: config echo, seed and the git-style blob hash of
// the CSV bytes.
void write_manifest(const std::string& dir, const std::string& csv_name,
                    const nlohmann::ordered_json& config_echo, uint64_t seed);

// report.json (schema 1) + summary.txt; wall clock is kept in a separate
// "timing" object so determinism checks can ignore it.
void write_report(const std::string& dir, const ExperimentReport& rep);

void ensure_dir(const std::string& dir);

}  // namespace atlaslab::report
