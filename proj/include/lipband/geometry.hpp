#pragma once
// Discretization geometry: the uniform K-grid shared by the sweep policies,
// the nested doubling grids used for adaptive activation, and ball covering
// queries.  Joint arms are ordered by reading their per-axis digit string as
// a positional number, most significant digit first (player 1, axis 1).

#include <cstdint>
#include <optional>
#include <vector>

#include "lipband/common.hpp"

namespace lipband {

struct GridSpec {
    int k = 1;        // K+1 markers per axis at 0, 1/K, ..., 1
    int players = 1;  // M
    int dim = 1;      // d, per player

    int axes() const { return players * dim; }
    std::uint64_t markers_per_axis() const { return static_cast<std::uint64_t>(k) + 1; }
    // (K+1)^(M*d); throws std::overflow_error when it exceeds 2^62.
    std::uint64_t joint_count() const;
};

using GridIndex = std::vector<int>;  // one entry per axis, each in [0, K]

std::uint64_t rank_of(const GridSpec& g, const GridIndex& idx);
GridIndex unrank(const GridSpec& g, std::uint64_t rank);
std::vector<double> grid_coords(const GridSpec& g, const GridIndex& idx);

// Per-axis rounding to the nearest marker; exact half-way points round to
// the smaller index.
GridIndex nearest_grid_index(const GridSpec& g, const std::vector<double>& point);

struct Ball {
    std::vector<double> center;
    double radius = 0.0;  // kInfinity is legal (an unpulled arm covers everything)
};

bool is_covered(const std::vector<double>& point, const Ball& ball, Norm norm);
bool is_covered(const std::vector<double>& point, const std::vector<Ball>& balls, Norm norm);

// Doubling grid at level n: markers i / 2^n per axis, so (2^n + 1)^(M*d)
// points.  Marker sets are nested across levels.
std::uint64_t level_markers_per_axis(int level);
std::uint64_t level_point_count(int level, int axes);
std::uint64_t level_rank_of(int level, const GridIndex& idx);
GridIndex level_unrank(int level, int axes, std::uint64_t rank);
std::vector<double> level_coords(int level, const GridIndex& idx);

struct UncoveredPoint {
    GridIndex idx;
    int level = 0;
    std::uint64_t rank = 0;
    std::vector<double> coords;
};

// Scans doubling levels start_level..max_level in order, each level in rank
// order, and returns the first uncovered point found.  Absent means every
// scanned point was covered.  This is the plain reference implementation;
// the zooming policies use an incremental index with identical results.
std::optional<UncoveredPoint> find_uncovered_point(const std::vector<Ball>& balls,
                                                   int start_level, int max_level,
                                                   Norm norm, int players, int dim);

} // namespace lipband
