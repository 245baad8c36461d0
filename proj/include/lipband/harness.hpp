#pragma once
// Episode driver and measurement tools.  run_episode wires M isolated player
// states to an environment, routes each variant's legal observations, and
// keeps independent books: pseudo-regret from true gaps, a re-derived copy
// of every player's estimates for confidence checking, and cross-player
// state digests that certify the no-communication coordination actually
// held round by round.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lipband/env.hpp"
#include "lipband/geometry.hpp"
#include "lipband/uniform.hpp"
#include "lipband/zooming.hpp"

namespace lipband {

enum class AlgorithmKind { MCAB_A, MCAB_B, MCAB_C, MZOOM_A, MZOOM_B };
enum class Variant { A, B, C };

// Observation model each algorithm is built for.
Variant variant_of(AlgorithmKind algo);
std::string to_string(AlgorithmKind algo);
std::string to_string(Variant v);
AlgorithmKind algorithm_from_string(const std::string& name);

inline constexpr std::uint64_t kNoRank = ~std::uint64_t{0};

struct RunParams {
    AlgorithmKind algorithm = AlgorithmKind::MCAB_A;
    std::uint64_t horizon = 0;
    int grid_k = 0;       // uniform algorithms
    FChoice f = FChoice::SQRT;
    int level_cap = 20;   // zooming algorithms
    std::uint64_t root_seed = 0;
    std::uint64_t trial = 0;
};

struct EpisodeTrace {
    std::uint64_t horizon = 0;
    int axes = 0;
    double optimal_mean = 0.0;
    std::vector<double> gap;                  // per round
    std::vector<double> cum_regret;           // running sum of gaps
    std::vector<std::uint64_t> arm_rank;      // grid rank per round, kNoRank for zoom runs
    std::vector<double> arm_coords;           // axes values per round, zoom runs only
};

struct GoodEventReport {
    bool held = true;
    std::uint64_t first_violation_round = 0;
    double max_excess = 0.0;       // worst |error| - width seen, when violated
    std::uint64_t checked_updates = 0;
};

struct ArmDump {
    std::vector<double> center;
    int level = 0;
    std::uint64_t level_rank = 0;
    std::uint64_t activated_at = 0;
    std::uint64_t pulls = 0;
    double mean_estimate = 0.0;
    bool eliminated = false;
    double frozen_radius = 0.0;
    std::uint64_t eliminated_at = 0;
    double gap = 0.0;
};

struct EpisodeResult {
    EpisodeTrace trace;
    GoodEventReport good;
    bool players_consistent = true;
    std::string inconsistency;                 // first mismatch, empty when none
    std::uint64_t miscoordination_rounds = 0;  // commit rounds with split decisions
    std::uint64_t signal_rounds = 0;
    std::vector<ArmDump> arms;                 // zoom runs, player 0 view
    std::vector<std::uint64_t> grid_pulls;     // uniform runs, player 0 view
    double total_regret = 0.0;
    int grid_k = 0;
};

EpisodeResult run_episode(const EnvModel& env, const RunParams& params);

// Centralized references: one controller, same reward stream as the shared
// observation variants.  Used to certify that the per-player machines jointly
// reproduce the single-agent trajectory decision for decision.
std::vector<std::uint64_t> run_ucb_grid_reference(const EnvModel& env, const GridSpec& grid,
                                                  std::uint64_t horizon, std::uint64_t root_seed,
                                                  std::uint64_t trial);
std::vector<std::vector<double>> run_zoom_reference(const EnvModel& env, std::uint64_t horizon,
                                                    int level_cap, std::uint64_t root_seed,
                                                    std::uint64_t trial);

// Splits a grid policy's continuum regret into the discretization term
// T*L/K plus its regret against the best grid point, and checks the sum
// bounds the continuum regret.
struct DiscretizationSplit {
    double continuum_regret = 0.0;
    double grid_regret = 0.0;
    double discretization_term = 0.0;
    double grid_optimal_mean = 0.0;
    bool pass = false;
};
DiscretizationSplit discretization_check(const EpisodeTrace& trace, const EnvModel& env,
                                         const GridSpec& grid);

// Empirical tail frequencies of a sample mean against the sub-gaussian bound
// exp(-n eps^2 / (2 sigma^2)), with sampling slack.
struct ConcentrationPoint {
    double epsilon = 0.0;
    double violation_freq = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool pass = false;
};
std::vector<ConcentrationPoint> concentration_check(double sigma, std::uint64_t samples_per_mean,
                                                    const std::vector<double>& epsilons,
                                                    std::uint64_t trials, std::uint64_t seed);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
};
// Least squares on (ln x, ln y); non-positive values are dropped.
SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

// Log-log slope of mean cumulative regret over tail checkpoints of a batch
// of equal-horizon traces.
SlopeFit regret_slope(const std::vector<EpisodeTrace>& traces);

struct CurvePoint {
    std::uint64_t t = 0;
    double mean_cum = 0.0;
    double std_cum = 0.0;
};
std::vector<CurvePoint> mean_curve(const std::vector<EpisodeTrace>& traces,
                                   std::size_t max_points);

// Per-round CSV: t,arm,gap,cum_regret,good
void write_trace_csv(std::ostream& out, const EpisodeTrace& trace, const GoodEventReport& good);
std::string trace_csv(const EpisodeTrace& trace, const GoodEventReport& good);

struct ParsedCurve {
    std::vector<std::uint64_t> t;
    std::vector<double> cum_regret;
};
ParsedCurve read_trace_csv(std::istream& in);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

} // namespace lipband
