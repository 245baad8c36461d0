#include "lipband/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace lipband {

std::string to_string(FChoice f) {
    switch (f) {
        case FChoice::SQRT: return "sqrt";
        case FChoice::LOG2: return "log2";
        case FChoice::LINEAR: return "linear";
    }
    throw std::invalid_argument("to_string: bad f choice");
}

FChoice f_choice_from_string(const std::string& s) {
    if (s == "sqrt") return FChoice::SQRT;
    if (s == "log2") return FChoice::LOG2;
    if (s == "linear") return FChoice::LINEAR;
    throw std::invalid_argument("unknown f choice: " + s);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(line, key + ": expected a number, got '" + v + "'");
    return x;
}

std::int64_t parse_int(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(line, key + ": expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_uint(const std::string& v, int line, const std::string& key) {
    const std::int64_t x = parse_int(v, line, key);
    if (x < 0) throw ConfigError(line, key + ": must be non-negative");
    return static_cast<std::uint64_t>(x);
}

// "x1 x2 ... : h ; x1 x2 ... : h"
std::vector<Peak> parse_peaks(const std::string& v, int line) {
    std::vector<Peak> peaks;
    std::stringstream groups(v);
    std::string group;
    while (std::getline(groups, group, ';')) {
        group = trim(group);
        if (group.empty()) throw ConfigError(line, "peaks: empty peak entry");
        const std::size_t colon = group.find(':');
        if (colon == std::string::npos)
            throw ConfigError(line, "peaks: missing ':' before height in '" + group + "'");
        Peak p;
        std::stringstream coords(group.substr(0, colon));
        std::string tok;
        while (coords >> tok) p.at.push_back(parse_double(tok, line, "peaks"));
        if (p.at.empty()) throw ConfigError(line, "peaks: no coordinates in '" + group + "'");
        p.height = parse_double(trim(group.substr(colon + 1)), line, "peaks");
        peaks.push_back(std::move(p));
    }
    if (peaks.empty()) throw ConfigError(line, "peaks: no peaks given");
    return peaks;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, int> seen;  // "section.key" -> line
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool have_peaks = false;
    std::map<std::string, bool> required = {
        {"env.players", false},     {"env.dim", false},        {"env.lipschitz", false},
        {"env.norm", false},        {"env.mean_family", false}, {"env.peaks", false},
        {"env.noise", false},       {"experiment.algorithm", false},
        {"experiment.horizon", false}, {"experiment.trials", false}, {"experiment.seed", false},
    };
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "unterminated section header");
            section = s.substr(1, s.size() - 2);
            if (section != "env" && section != "experiment")
                throw ConfigError(line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "empty key");
        if (value.empty()) throw ConfigError(line, key + ": empty value");
        if (section.empty()) throw ConfigError(line, "key outside any section");
        const std::string full = section + "." + key;
        if (seen.count(full))
            throw ConfigError(line, key + " already set on line " + std::to_string(seen[full]));
        seen[full] = line;
        if (required.count(full)) required[full] = true;

        try {
            if (full == "env.players") cfg.players = static_cast<int>(parse_int(value, line, key));
            else if (full == "env.dim") cfg.dim = static_cast<int>(parse_int(value, line, key));
            else if (full == "env.lipschitz") cfg.lipschitz = parse_double(value, line, key);
            else if (full == "env.norm") cfg.norm = norm_from_string(value);
            else if (full == "env.mean_family") cfg.mean_family = mean_family_from_string(value);
            else if (full == "env.peaks") { cfg.peaks = parse_peaks(value, line); have_peaks = true; }
            else if (full == "env.noise") cfg.noise = noise_from_string(value);
            else if (full == "env.sigma") cfg.sigma = parse_double(value, line, key);
            else if (full == "experiment.algorithm") cfg.algorithm = algorithm_from_string(value);
            else if (full == "experiment.variant") {
                if (value == "A" || value == "a") cfg.requested_variant = Variant::A;
                else if (value == "B" || value == "b") cfg.requested_variant = Variant::B;
                else if (value == "C" || value == "c") cfg.requested_variant = Variant::C;
                else throw ConfigError(line, "variant: expected A, B or C");
            }
            else if (full == "experiment.horizon") cfg.horizon = parse_uint(value, line, key);
            else if (full == "experiment.trials") cfg.trials = parse_uint(value, line, key);
            else if (full == "experiment.seed") cfg.seed = parse_uint(value, line, key);
            else if (full == "experiment.grid_k") cfg.grid_k = static_cast<int>(parse_int(value, line, key));
            else if (full == "experiment.f") cfg.f = f_choice_from_string(value);
            else if (full == "experiment.level_cap") cfg.level_cap = static_cast<int>(parse_int(value, line, key));
            else if (full == "experiment.out_dir") cfg.out_dir = value;
            else throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(line, key + ": " + e.what());
        }
    }
    (void)have_peaks;
    std::string missing;
    for (const auto& [k, present] : required)
        if (!present) missing += missing.empty() ? k : ", " + k;
    if (!missing.empty()) throw ConfigError(line, "missing required keys: " + missing);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[env]\n";
    out << "players = " << cfg.players << "\n";
    out << "dim = " << cfg.dim << "\n";
    out << "lipschitz = " << format_double(cfg.lipschitz) << "\n";
    out << "norm = " << to_string(cfg.norm) << "\n";
    out << "mean_family = " << to_string(cfg.mean_family) << "\n";
    out << "peaks = ";
    for (std::size_t i = 0; i < cfg.peaks.size(); ++i) {
        if (i) out << " ; ";
        for (std::size_t j = 0; j < cfg.peaks[i].at.size(); ++j) {
            if (j) out << ' ';
            out << format_double(cfg.peaks[i].at[j]);
        }
        out << " : " << format_double(cfg.peaks[i].height);
    }
    out << "\n";
    out << "noise = " << to_string(cfg.noise) << "\n";
    out << "sigma = " << format_double(cfg.sigma) << "\n";
    out << "\n[experiment]\n";
    out << "algorithm = " << to_string(cfg.algorithm) << "\n";
    out << "variant = " << to_string(variant_of(cfg.algorithm)) << "\n";
    out << "horizon = " << cfg.horizon << "\n";
    out << "trials = " << cfg.trials << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "grid_k = " << cfg.grid_k << "\n";
    out << "f = " << to_string(cfg.f) << "\n";
    out << "level_cap = " << cfg.level_cap << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> issues;
    try {
        make_env(cfg);
    } catch (const std::exception& e) {
        issues.push_back(std::string("env: ") + e.what());
    }
    if (cfg.horizon < 2) issues.push_back("horizon must be >= 2");
    if (cfg.trials < 1) issues.push_back("trials must be >= 1");
    if (cfg.grid_k < 0) issues.push_back("grid_k must be >= 0 (0 means auto)");
    if (cfg.level_cap < 1 || cfg.level_cap > 30)
        issues.push_back("level_cap must be in [1, 30]");
    if (cfg.requested_variant && *cfg.requested_variant != variant_of(cfg.algorithm))
        issues.push_back("variant " + to_string(*cfg.requested_variant) +
                         " does not match algorithm " + to_string(cfg.algorithm) +
                         " (needs " + to_string(variant_of(cfg.algorithm)) + ")");
    if (cfg.noise == NoiseKind::GAUSSIAN && cfg.sigma > 1.0)
        issues.push_back("gaussian sigma must be <= 1 for the confidence widths used");
    if (cfg.out_dir.empty()) issues.push_back("out_dir must not be empty");
    const bool uniform = cfg.algorithm == AlgorithmKind::MCAB_A ||
                         cfg.algorithm == AlgorithmKind::MCAB_B ||
                         cfg.algorithm == AlgorithmKind::MCAB_C;
    if (uniform && cfg.horizon >= 2 && cfg.players >= 1 && cfg.dim >= 1 && cfg.lipschitz > 0) {
        try {
            const int k = resolve_grid_k(cfg);
            const GridSpec grid{k, cfg.players, cfg.dim};
            const std::uint64_t count = grid.joint_count();
            if (count > (std::uint64_t{1} << 22))
                issues.push_back("grid has " + std::to_string(count) +
                                 " joint arms; refusing to enumerate more than 2^22");
        } catch (const std::exception& e) {
            issues.push_back(std::string("grid: ") + e.what());
        }
    }
    return issues;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string canon = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EnvModel make_env(const ExperimentConfig& cfg) {
    return EnvModel(cfg.players, cfg.dim, cfg.lipschitz, cfg.norm, cfg.mean_family, cfg.peaks,
                    cfg.noise, cfg.sigma);
}

int resolve_grid_k(const ExperimentConfig& cfg) {
    switch (cfg.algorithm) {
        case AlgorithmKind::MZOOM_A:
        case AlgorithmKind::MZOOM_B: return 0;
        case AlgorithmKind::MCAB_A:
        case AlgorithmKind::MCAB_B:
            if (cfg.grid_k > 0) return cfg.grid_k;
            return choose_grid_k(cfg.horizon, cfg.lipschitz, cfg.players, cfg.dim, KRule::UCB);
        case AlgorithmKind::MCAB_C:
            if (cfg.grid_k > 0) return cfg.grid_k;
            return choose_grid_k(cfg.horizon, cfg.lipschitz, cfg.players, cfg.dim, KRule::DSEE);
    }
    throw std::invalid_argument("resolve_grid_k: bad algorithm");
}

RunParams make_run_params(const ExperimentConfig& cfg, std::uint64_t trial) {
    RunParams p;
    p.algorithm = cfg.algorithm;
    p.horizon = cfg.horizon;
    p.grid_k = resolve_grid_k(cfg);
    p.f = cfg.f;
    p.level_cap = cfg.level_cap;
    p.root_seed = cfg.seed;
    p.trial = trial;
    return p;
}

} // namespace lipband
