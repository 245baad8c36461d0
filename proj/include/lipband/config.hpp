#pragma once
// Experiment files: a flat key = value format in two sections, [env] and
// [experiment].  Parsing is strict (unknown keys, duplicates and malformed
// values are errors with line numbers) because a silently ignored key in a
// long sweep is far more expensive than a rejected file.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipband/harness.hpp"

namespace lipband {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct ExperimentConfig {
    // [env]
    int players = 2;
    int dim = 1;
    double lipschitz = 1.0;
    Norm norm = Norm::L2;
    MeanFamily mean_family = MeanFamily::CONE;
    std::vector<Peak> peaks;
    NoiseKind noise = NoiseKind::BERNOULLI;
    double sigma = 0.5;

    // [experiment]
    AlgorithmKind algorithm = AlgorithmKind::MCAB_A;
    std::optional<Variant> requested_variant;  // must match the algorithm when given
    std::uint64_t horizon = 0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    int grid_k = 0;     // 0 selects the horizon-tuned formula
    FChoice f = FChoice::SQRT;
    int level_cap = 20;
    std::string out_dir = "runs";
};

std::string to_string(FChoice f);
FChoice f_choice_from_string(const std::string& s);

ExperimentConfig parse_config(const std::string& text);
// Canonical round-trippable form; also the input to config_hash.
std::string serialize_config(const ExperimentConfig& cfg);
// Human-readable issues; empty means the config is runnable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);
// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

EnvModel make_env(const ExperimentConfig& cfg);
// Explicit override, or the formula keyed by the algorithm's exploration
// style; 0 for the zooming algorithms, which take no grid.
int resolve_grid_k(const ExperimentConfig& cfg);
RunParams make_run_params(const ExperimentConfig& cfg, std::uint64_t trial);

} // namespace lipband
