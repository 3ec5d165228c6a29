#include "atlaslab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "atlaslab/errors.hpp"
#include "atlaslab/sha1.hpp"

namespace atlaslab::report {

bool ExperimentReport::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

void ExperimentReport::add(CheckRecord rec) { checks.push_back(std::move(rec)); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("out_dir: cannot create " + dir + ": " + ec.message());
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("write failed for " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string write_csv(const std::string& dir, const std::string& name,
                      const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string content = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) content.push_back(',');
            content += format_double(row[c]);
        }
        content.push_back('\n');
    }
    write_file(dir + "/" + name, content);
    return name;
}

std::string write_text(const std::string& dir, const std::string& name,
                       const std::string& content) {
    write_file(dir + "/" + name, content);
    return name;
}

void write_manifest(const std::string& dir, const std::string& csv_name,
                    const nlohmann::ordered_json& config_echo, uint64_t seed) {
    nlohmann::ordered_json manifest;
    manifest["file"] = csv_name;
    manifest["content_hash"] = git_blob_hash(read_file(dir + "/" + csv_name));
    manifest["seed"] = seed;
    manifest["config"] = config_echo;
    write_file(dir + "/" + csv_name + ".manifest.json", manifest.dump(2) + "\n");
}

void write_report(const std::string& dir, const ExperimentReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["experiment"] = rep.experiment;
    j["config"] = rep.config_echo;
    j["rng"] = {
        {"algorithm", "philox4x32-10"},
        {"seed", rep.seed},
        {"streams", "per replica r: key=seed, counter=(block, r, substream)"},
    };
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : rep.checks) {
        nlohmann::ordered_json rec;
        rec["check"] = c.name;
        if (!std::isnan(c.target)) rec["target"] = c.target;
        if (!std::isnan(c.estimate)) rec["estimate"] = c.estimate;
        if (!std::isnan(c.stderr_)) rec["stderr"] = c.stderr_;
        rec["pass"] = c.pass;
        if (!c.detail.empty()) rec["detail"] = c.detail;
        checks.push_back(rec);
    }
    j["checks"] = checks;
    j["all_pass"] = rep.all_pass();
    nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
    for (const auto& a : rep.artifacts) artifacts.push_back(a);
    j["artifacts"] = artifacts;
    j["timing"] = {{"wall_clock_seconds", rep.wall_seconds}};
    write_file(dir + "/report.json", j.dump(2) + "\n");

    std::ostringstream summary;
    summary << "experiment: " << rep.experiment << "\n";
    summary << "seed: " << rep.seed << "\n";
    summary << "checks:\n";
    for (const auto& c : rep.checks) {
        summary << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
        if (!std::isnan(c.estimate)) {
            summary << "  estimate=" << format_double(c.estimate);
        }
        if (!std::isnan(c.target)) {
            summary << "  target=" << format_double(c.target);
        }
        if (!std::isnan(c.stderr_)) {
            summary << "  stderr=" << format_double(c.stderr_);
        }
        if (!c.detail.empty()) summary << "  (" << c.detail << ")";
        summary << "\n";
    }
    summary << (rep.all_pass() ? "ALL CHECKS PASSED\n" : "CHECK FAILURES\n");
    write_file(dir + "/summary.txt", summary.str());
}

}  // namespace atlaslab::report
