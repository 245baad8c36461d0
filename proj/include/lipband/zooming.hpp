#pragma once
// Adaptive-discretization policies.  Arms are centers of confidence balls
// whose radii shrink as pulls accumulate; whenever some point of the dyadic
// refinement grid escapes every ball, the lowest such point (shallowest
// level, then smallest rank) is activated as a new arm.
//
// CoverageIndex answers "lowest uncovered dyadic point" without rescanning
// whole levels each round.  Levels up to the cache bound keep a witness
// ball for every point plus a containment witness for every grid cell; the
// entries sit in per-ball heaps keyed by distance, so a radius shrink
// repairs exactly the escapees, and a level whose cells all sit inside
// single balls certifies that every deeper point is covered.  Past the
// bound, queries descend through the open cells of the deepest cached
// level: children contained in a single ball are pruned, corner points of
// the survivors are checked in rank order.  The descent is recomputed per
// query; keeping it materialized loses badly once unions of balls pin
// large fringes open.  Results are identical to the plain scan in
// geometry.hpp.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lipband/geometry.hpp"
#include "lipband/index.hpp"
#include "lipband/observations.hpp"

namespace lipband {

struct ZoomArm {
    std::vector<double> center;
    int level = 1;
    std::uint64_t level_rank = 0;
    GridIndex level_idx;
    std::uint64_t activated_at = 0;
    ArmStats stats;
    bool eliminated = false;
    double frozen_radius = 0.0;
    std::uint64_t eliminated_at = 0;
};

// Confidence-ball radius: width / L, infinite while unpulled.
double zoom_radius(const ArmStats& stats, double lipschitz, std::uint64_t horizon);
// Selection index: mean + 2 * width, infinite while unpulled.
double zoom_index(const ArmStats& stats, std::uint64_t horizon);

struct CoverageEffortError : std::runtime_error {
    explicit CoverageEffortError(const std::string& what) : std::runtime_error(what) {}
};

class CoverageIndex {
public:
    // max_cached_points bounds the per-level dense caches; levels above it
    // are served by the per-query descent.  Tests shrink it to force that
    // path.
    CoverageIndex(int axes, Norm norm, int max_level,
                  std::uint64_t max_cached_points = std::uint64_t{1} << 19);

    int add_ball(const std::vector<double>& center, double radius);
    // Radii may only shrink; coverage gained by growth would go unnoticed.
    void set_radius(int ball, double radius);
    // Lowest uncovered point at levels start_level..max_level, or nullopt
    // when a containment certificate (or the level cap) proves full cover.
    std::optional<UncoveredPoint> query(int start_level);
    // Forgets cached levels below the given one; earlier levels are never
    // queried again once the activation level has advanced.  The deepest
    // dense level is kept because the sparse hierarchy is rooted there.
    void drop_below(int level);

    std::size_t ball_count() const { return balls_.size(); }
    const Ball& ball(int id) const { return balls_[static_cast<std::size_t>(id)]; }

private:
    // Members sit in max-heaps keyed by distance to their witness ball's
    // center (farthest corner for cells), so a shrink pops exactly the
    // entries that escaped.  An escapee can never rejoin the same ball, so
    // total churn is bounded by points x balls.
    using MemberHeap = std::priority_queue<std::pair<double, std::uint64_t>>;

    struct LevelState {
        std::uint64_t per_axis = 0;   // cells per axis, points per axis is +1
        std::vector<std::int32_t> point_witness;
        std::vector<std::int32_t> cell_witness;
        std::set<std::uint64_t> open_points;
        std::set<std::uint64_t> open_cells;
        std::vector<MemberHeap> point_members;
        std::vector<MemberHeap> cell_members;
    };

    LevelState& ensure_dense(int level);
    double point_dist(const double* coords, const Ball& b) const;
    double far_corner(std::uint64_t per_axis, const int* cell, const Ball& b) const;
    int witness_point(const double* coords, double& dist) const;
    int witness_cell(std::uint64_t per_axis, const int* cell, double& far) const;
    // open holds the boundary cells as flat digit tuples, axes_ ints each.
    std::optional<UncoveredPoint> query_descend(int start_level, std::vector<int> open,
                                                int last_checked) const;

    int axes_;
    Norm norm_;
    int max_level_;
    std::uint64_t max_cached_points_;
    int dense_cap_ = 0;           // deepest level small enough to cache densely
    std::vector<Ball> balls_;
    std::map<int, LevelState> levels_;

    static constexpr std::uint64_t kEffortCap = std::uint64_t{1} << 26;
};

// -----------------------------------------------------------------------------

class ZoomAState {
public:
    static constexpr int kController = -1;

    ZoomAState(int players, int dim, Norm norm, double lipschitz, std::uint64_t horizon,
               int level_cap, int player);

    std::vector<double> step(std::uint64_t t, const std::optional<SharedRewardObs>& obs);

    const std::vector<ZoomArm>& arms() const { return arms_; }
    std::size_t last_arm() const { return chosen_; }
    int current_level() const { return level_; }

private:
    std::size_t activate(const UncoveredPoint& p, std::uint64_t t);
    std::vector<double> emit(const std::vector<double>& center) const;

    int players_, dim_, axes_;
    Norm norm_;
    double lipschitz_;
    std::uint64_t horizon_;
    int level_cap_, player_;
    std::vector<ZoomArm> arms_;
    CoverageIndex coverage_;
    int level_ = 1;
    std::size_t chosen_ = 0;
};

// -----------------------------------------------------------------------------

class ZoomBState {
public:
    ZoomBState(int players, int dim, Norm norm, double lipschitz, std::uint64_t horizon,
               int level_cap, int player);

    std::vector<double> step(std::uint64_t t, const std::optional<JointActionObs>& obs);

    const std::vector<ZoomArm>& arms() const { return arms_; }
    const std::vector<std::size_t>& desired() const { return desired_; }
    std::size_t last_designated() const { return designated_; }
    bool signaled_last() const { return signaled_; }
    // Folds activations, removals and per-round designations; equal digests
    // across players certify identical protocol state.
    std::uint64_t consistency_digest() const { return digest_; }
    int current_level() const { return level_; }

private:
    std::size_t activate(const UncoveredPoint& p, std::uint64_t t);
    void eliminate(std::size_t id, std::uint64_t t);
    std::vector<double> signal_block(const ZoomArm& arm) const;
    std::vector<double> emit(const std::vector<double>& center) const;

    int players_, dim_, axes_;
    Norm norm_;
    double lipschitz_;
    std::uint64_t horizon_;
    int level_cap_, player_;
    std::vector<ZoomArm> arms_;
    std::map<std::vector<double>, std::size_t> by_center_;
    CoverageIndex coverage_;
    std::vector<std::size_t> desired_;
    std::deque<std::size_t> catchup_;
    std::ptrdiff_t cursor_ = -1;
    std::size_t designated_ = 0;
    bool have_designated_ = false;
    bool signaled_ = false;
    int level_ = 1;
    std::uint64_t digest_ = 0x6c62272e07bb0142ull;
};

} // namespace lipband
