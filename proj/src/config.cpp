#include "atlaslab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "atlaslab/report.hpp"

namespace atlaslab::config {

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::stationarity: return "stationarity";
        case ExperimentKind::nu_identities: return "nu_identities";
        case ExperimentKind::product_identity: return "product_identity";
        case ExperimentKind::laplace: return "laplace";
        case ExperimentKind::coupling_sweep: return "coupling_sweep";
        case ExperimentKind::lemcty_search: return "lemcty_search";
        case ExperimentKind::ergodic_average: return "ergodic_average";
        case ExperimentKind::truncation_study: return "truncation_study";
        case ExperimentKind::swap_invariance: return "swap_invariance";
        case ExperimentKind::kakutani: return "kakutani";
    }
    return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
    static const std::map<std::string, ExperimentKind> lookup = {
        {"stationarity", ExperimentKind::stationarity},
        {"nu_identities", ExperimentKind::nu_identities},
        {"product_identity", ExperimentKind::product_identity},
        {"laplace", ExperimentKind::laplace},
        {"coupling_sweep", ExperimentKind::coupling_sweep},
        {"lemcty_search", ExperimentKind::lemcty_search},
        {"ergodic_average", ExperimentKind::ergodic_average},
        {"truncation_study", ExperimentKind::truncation_study},
        {"swap_invariance", ExperimentKind::swap_invariance},
        {"kakutani", ExperimentKind::kakutani},
    };
    const auto it = lookup.find(name);
    if (it == lookup.end()) {
        throw ConfigError("experiment: unknown kind '" + name + "'");
    }
    return it->second;
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
};

struct RawConfig {
    // key is "section.key" ("" section for the preamble)
    std::map<std::string, RawEntry> entries;

    std::optional<RawEntry> take(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        RawEntry e = it->second;
        entries.erase(it);
        return e;
    }
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (raw.entries.count(full) != 0) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": duplicate key '" + full + "'");
        }
        raw.entries[full] = RawEntry{value, line_no};
    }
    return raw;
}

double parse_double(const std::string& field, const RawEntry& e) {
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not a number '" + e.value + "' (line " +
                          std::to_string(e.line) + ")");
    }
}

long long parse_int(const std::string& field, const RawEntry& e) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not an integer '" + e.value + "' (line " +
                          std::to_string(e.line) + ")");
    }
}

uint64_t parse_u64(const std::string& field, const RawEntry& e) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not a seed '" + e.value + "' (line " +
                          std::to_string(e.line) + ")");
    }
}

std::vector<double> parse_double_list(const std::string& field,
                                      const RawEntry& e) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(field, RawEntry{item, e.line}));
    }
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& field, const RawEntry& e) {
    std::vector<int> out;
    for (double v : parse_double_list(field, e)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace

dynamics::EpsLadder ExperimentConfig::ladder() const {
    dynamics::EpsLadder l;
    const double root = std::sqrt(sim.dt);
    for (double s : eps_scales) l.eps.push_back(s * root);
    std::sort(l.eps.begin(), l.eps.end());
    return l;
}

std::vector<double> ExperimentConfig::resolved_check_times() const {
    if (!check_times.empty()) return check_times;
    return {0.25 * sim.horizon, 0.5 * sim.horizon, sim.horizon};
}

std::vector<double> ExperimentConfig::resolved_coupling_z(int n_particles) const {
    if (!coupling_z.empty()) {
        if (coupling_z.size() < static_cast<std::size_t>(n_particles - 1)) {
            throw ConfigError("coupling.z: needs n-1 entries");
        }
        return coupling_z;
    }
    return std::vector<double>(static_cast<std::size_t>(n_particles - 1), z_fill);
}

double ExperimentConfig::resolved_underline_delta() const {
    if (underline_delta > 0.0) return underline_delta;
    const double z_ip1 = coupling_z.empty()
                             ? z_fill
                             : coupling_z[static_cast<std::size_t>(coupling_i)];
    const double gl = drift.lower_drift_bound();
    return 0.99 * z_ip1 / (2.0 + 4.0 * gl);
}

nlohmann::ordered_json ExperimentConfig::echo() const {
    nlohmann::ordered_json j;
    j["experiment"] = kind_name(experiment);
    j["seed"] = seed;
    j["replicas"] = replicas;
    j["a"] = a;
    j["drift"] = {{"name", drift.name},
                  {"prefix", drift.prefix},
                  {"tail", "zero"}};
    j["sim"] = {{"n", sim.n_particles},  {"t", sim.horizon},
                {"dt", sim.dt},          {"k_obs", sim.k_obs},
                {"record_stride", sim.record_stride}};
    j["eps_scales"] = eps_scales;
    switch (experiment) {
        case ExperimentKind::stationarity:
        case ExperimentKind::nu_identities:
            j["check_times"] = resolved_check_times();
            break;
        case ExperimentKind::product_identity: {
            nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
            for (const auto& p : product_pairs) {
                pairs.push_back({{"i", p.i}, {"j", p.j}});
            }
            j["pairs"] = pairs;
            j["f"] = product_f;
            break;
        }
        case ExperimentKind::laplace:
            j["lambda_factors"] = lambda_factors;
            j["max_gap"] = laplace_max_gap;
            break;
        case ExperimentKind::coupling_sweep:
            j["coupling"] = {{"i", coupling_i},
                             {"z_fill", z_fill},
                             {"delta1", delta1_grid},
                             {"delta2", delta2_grid},
                             {"s", s_grid},
                             {"underline_delta", resolved_underline_delta()},
                             {"merge_tol", merge_tol}};
            break;
        case ExperimentKind::lemcty_search:
            j["lemcty"] = {{"i", coupling_i},
                           {"z_fill", z_fill},
                           {"eta", eta},
                           {"t1_fracs", t1_fracs},
                           {"delta0_fracs", delta0_fracs},
                           {"underline_delta", resolved_underline_delta()}};
            break;
        case ExperimentKind::ergodic_average:
            j["coordinate"] = ergodic_coordinate;
            break;
        case ExperimentKind::truncation_study:
            j["n_list"] = n_list;
            break;
        case ExperimentKind::swap_invariance:
            j["swap"] = {{"i", swap_i}, {"n_samples", swap_samples}};
            break;
        case ExperimentKind::kakutani:
            j["kakutani"] = {{"a_prime", a_prime}, {"n", kakutani_n}};
            break;
    }
    return j;
}

ExperimentConfig parse_config_text(const std::string& text) {
    RawConfig raw = tokenize(text);
    ExperimentConfig cfg;

    const auto exp = raw.take("experiment");
    if (!exp) throw ConfigError("experiment: missing (top-level key)");
    cfg.experiment = kind_from_name(exp->value);

    if (const auto e = raw.take("seed")) cfg.seed = parse_u64("seed", *e);
    if (const auto e = raw.take("replicas")) {
        const long long r = parse_int("replicas", *e);
        if (r < 1) throw ConfigError("replicas: must be >= 1");
        cfg.replicas = static_cast<std::size_t>(r);
    }
    if (const auto e = raw.take("a")) cfg.a = parse_double("a", *e);
    if (const auto e = raw.take("out_dir")) cfg.out_dir = e->value;
    if (const auto e = raw.take("threads")) {
        cfg.threads = static_cast<int>(parse_int("threads", *e));
    }

    if (const auto e = raw.take("drift.name")) cfg.drift.name = e->value;
    if (const auto e = raw.take("drift.prefix")) {
        cfg.drift.prefix = parse_double_list("drift.prefix", *e);
    }
    if (const auto e = raw.take("drift.tail")) {
        if (e->value != "zero") {
            throw ConfigError("drift.tail: only 'zero' is supported, got '" +
                              e->value + "'");
        }
    }

    if (const auto e = raw.take("sim.n")) {
        cfg.sim.n_particles = static_cast<int>(parse_int("sim.n", *e));
    }
    if (const auto e = raw.take("sim.t")) {
        cfg.sim.horizon = parse_double("sim.t", *e);
    }
    if (const auto e = raw.take("sim.dt")) cfg.sim.dt = parse_double("sim.dt", *e);
    if (const auto e = raw.take("sim.k_obs")) {
        cfg.sim.k_obs = static_cast<int>(parse_int("sim.k_obs", *e));
    }
    if (const auto e = raw.take("sim.record_stride")) {
        cfg.sim.record_stride =
            static_cast<int>(parse_int("sim.record_stride", *e));
    }

    if (const auto e = raw.take("eps.scales")) {
        cfg.eps_scales = parse_double_list("eps.scales", *e);
    }
    if (const auto e = raw.take("stationarity.times")) {
        cfg.check_times = parse_double_list("stationarity.times", *e);
    }

    if (const auto e = raw.take("product.pairs")) {
        cfg.product_pairs.clear();
        std::istringstream in(e->value);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                throw ConfigError("product.pairs: expected i:j entries");
            }
            ProductPair p;
            p.i = static_cast<int>(
                parse_int("product.pairs", RawEntry{item.substr(0, colon), e->line}));
            p.j = static_cast<int>(
                parse_int("product.pairs", RawEntry{item.substr(colon + 1), e->line}));
            cfg.product_pairs.push_back(p);
        }
        if (cfg.product_pairs.empty()) throw ConfigError("product.pairs: empty");
    }
    if (const auto e = raw.take("product.f")) cfg.product_f = e->value;

    if (const auto e = raw.take("laplace.lambda_factors")) {
        cfg.lambda_factors = parse_double_list("laplace.lambda_factors", *e);
    }
    if (const auto e = raw.take("laplace.max_gap")) {
        cfg.laplace_max_gap = static_cast<int>(parse_int("laplace.max_gap", *e));
    }

    if (const auto e = raw.take("coupling.i")) {
        cfg.coupling_i = static_cast<int>(parse_int("coupling.i", *e));
    }
    if (const auto e = raw.take("coupling.z_fill")) {
        cfg.z_fill = parse_double("coupling.z_fill", *e);
    }
    if (const auto e = raw.take("coupling.z")) {
        cfg.coupling_z = parse_double_list("coupling.z", *e);
    }
    if (const auto e = raw.take("coupling.delta1")) {
        cfg.delta1_grid = parse_double_list("coupling.delta1", *e);
    }
    if (const auto e = raw.take("coupling.delta2")) {
        cfg.delta2_grid = parse_double_list("coupling.delta2", *e);
    }
    if (const auto e = raw.take("coupling.s")) {
        cfg.s_grid = parse_double_list("coupling.s", *e);
    }
    if (const auto e = raw.take("coupling.underline_delta")) {
        cfg.underline_delta = parse_double("coupling.underline_delta", *e);
    }
    if (const auto e = raw.take("coupling.merge_tol")) {
        cfg.merge_tol = parse_double("coupling.merge_tol", *e);
    }
    if (const auto e = raw.take("coupling.eta")) {
        cfg.eta = parse_double("coupling.eta", *e);
    }
    if (const auto e = raw.take("coupling.t1_fracs")) {
        cfg.t1_fracs = parse_double_list("coupling.t1_fracs", *e);
    }
    if (const auto e = raw.take("coupling.delta0_fracs")) {
        cfg.delta0_fracs = parse_double_list("coupling.delta0_fracs", *e);
    }

    if (const auto e = raw.take("ergodic.coordinate")) {
        cfg.ergodic_coordinate =
            static_cast<int>(parse_int("ergodic.coordinate", *e));
    }
    if (const auto e = raw.take("truncation.n_list")) {
        cfg.n_list = parse_int_list("truncation.n_list", *e);
    }
    if (const auto e = raw.take("swap.i")) {
        cfg.swap_i = static_cast<int>(parse_int("swap.i", *e));
    }
    if (const auto e = raw.take("swap.n_samples")) {
        const long long n = parse_int("swap.n_samples", *e);
        if (n < 10) throw ConfigError("swap.n_samples: too small");
        cfg.swap_samples = static_cast<std::size_t>(n);
    }
    if (const auto e = raw.take("kakutani.a_prime")) {
        cfg.a_prime = parse_double("kakutani.a_prime", *e);
    }
    if (const auto e = raw.take("kakutani.n")) {
        cfg.kakutani_n = static_cast<int>(parse_int("kakutani.n", *e));
    }

    if (!raw.entries.empty()) {
        const auto& first = *raw.entries.begin();
        throw ConfigError("unknown key '" + first.first + "' (line " +
                          std::to_string(first.second.line) + ")");
    }

    // basic structural validation up front; experiment preconditions are
    // checked again at launch
    cfg.sim.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<ValidationNote> validate_config(const ExperimentConfig& cfg) {
    std::vector<ValidationNote> notes;
    const double a_min = cfg.drift.a_min();
    notes.push_back({false, "a_min = -2 inf_n bar g_n = " +
                                report::format_double(a_min)});
    if (cfg.a < a_min) {
        notes.push_back({true, "a: " + report::format_double(cfg.a) +
                                   " below admissible a_min = " +
                                   report::format_double(a_min)});
    } else if (cfg.a == a_min) {
        if (cfg.drift.d1_zero_tail()) {
            notes.push_back({false,
                             "a equals a_min: boundary case, admissible (drift "
                             "is in class D1)"});
        } else {
            notes.push_back({true,
                             "a: equals a_min but the drift is not in class D1; "
                             "boundary case inadmissible"});
        }
    }
    const int suggested = dynamics::SimConfig::default_truncation(
        cfg.sim.k_obs, cfg.sim.horizon);
    notes.push_back({false, "suggested truncation n >= " +
                                std::to_string(suggested) + " (configured " +
                                std::to_string(cfg.sim.n_particles) + ")"});
    const double cost = static_cast<double>(cfg.replicas) *
                        static_cast<double>(cfg.sim.steps()) *
                        static_cast<double>(cfg.sim.n_particles);
    notes.push_back({false, "estimated cost: " + report::format_double(cost) +
                                " particle-steps (~" +
                                report::format_double(cost / 5e7) +
                                " core-seconds)"});
    return notes;
}

}  // namespace atlaslab::config
