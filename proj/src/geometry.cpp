#include "lipband/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lipband {

std::uint64_t GridSpec::joint_count() const {
    if (k < 1) throw std::invalid_argument("grid: k must be >= 1");
    if (players < 1 || dim < 1) throw std::invalid_argument("grid: players and dim must be >= 1");
    const std::uint64_t base = markers_per_axis();
    std::uint64_t total = 1;
    for (int i = 0; i < axes(); ++i) {
        if (total > (1ull << 62) / base)
            throw std::overflow_error("grid: (K+1)^(M*d) exceeds 2^62");
        total *= base;
    }
    return total;
}

static void check_index(std::uint64_t base, int axes, const GridIndex& idx) {
    if (idx.size() != static_cast<std::size_t>(axes))
        throw std::invalid_argument("grid index has " + std::to_string(idx.size()) +
                                    " digits, expected " + std::to_string(axes));
    for (int v : idx)
        if (v < 0 || static_cast<std::uint64_t>(v) >= base)
            throw std::invalid_argument("grid index digit " + std::to_string(v) +
                                        " outside [0, " + std::to_string(base - 1) + "]");
}

static std::uint64_t rank_mixed(std::uint64_t base, const GridIndex& idx) {
    std::uint64_t r = 0;
    for (int v : idx) r = r * base + static_cast<std::uint64_t>(v);
    return r;
}

static GridIndex unrank_mixed(std::uint64_t base, int axes, std::uint64_t rank) {
    GridIndex idx(static_cast<std::size_t>(axes));
    for (int i = axes - 1; i >= 0; --i) {
        idx[static_cast<std::size_t>(i)] = static_cast<int>(rank % base);
        rank /= base;
    }
    if (rank != 0) throw std::invalid_argument("rank outside grid");
    return idx;
}

std::uint64_t rank_of(const GridSpec& g, const GridIndex& idx) {
    check_index(g.markers_per_axis(), g.axes(), idx);
    return rank_mixed(g.markers_per_axis(), idx);
}

GridIndex unrank(const GridSpec& g, std::uint64_t rank) {
    if (rank >= g.joint_count()) throw std::invalid_argument("rank outside grid");
    return unrank_mixed(g.markers_per_axis(), g.axes(), rank);
}

std::vector<double> grid_coords(const GridSpec& g, const GridIndex& idx) {
    check_index(g.markers_per_axis(), g.axes(), idx);
    std::vector<double> c(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        c[i] = static_cast<double>(idx[i]) / static_cast<double>(g.k);
    return c;
}

GridIndex nearest_grid_index(const GridSpec& g, const std::vector<double>& point) {
    if (point.size() != static_cast<std::size_t>(g.axes()))
        throw std::invalid_argument("nearest_grid_index: dimension mismatch");
    GridIndex idx(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double c = point[i];
        if (!(c >= 0.0 && c <= 1.0))
            throw std::invalid_argument("nearest_grid_index: coordinate outside [0,1]");
        const double scaled = c * static_cast<double>(g.k);
        double lo = std::floor(scaled);
        const double frac = scaled - lo;
        // strict > keeps exact halves on the smaller marker
        int v = static_cast<int>(lo) + (frac > 0.5 ? 1 : 0);
        v = std::min(std::max(v, 0), g.k);
        idx[i] = v;
    }
    return idx;
}

bool is_covered(const std::vector<double>& point, const Ball& ball, Norm norm) {
    if (ball.radius == kInfinity) return true;
    return distance(point, ball.center, norm) <= ball.radius;
}

bool is_covered(const std::vector<double>& point, const std::vector<Ball>& balls, Norm norm) {
    for (const Ball& b : balls)
        if (is_covered(point, b, norm)) return true;
    return false;
}

std::uint64_t level_markers_per_axis(int level) {
    if (level < 0 || level > 62) throw std::invalid_argument("doubling level outside [0, 62]");
    return (1ull << level) + 1;
}

std::uint64_t level_point_count(int level, int axes) {
    const std::uint64_t base = level_markers_per_axis(level);
    std::uint64_t total = 1;
    for (int i = 0; i < axes; ++i) {
        if (total > (1ull << 62) / base)
            throw std::overflow_error("doubling grid point count exceeds 2^62");
        total *= base;
    }
    return total;
}

std::uint64_t level_rank_of(int level, const GridIndex& idx) {
    check_index(level_markers_per_axis(level), static_cast<int>(idx.size()), idx);
    return rank_mixed(level_markers_per_axis(level), idx);
}

GridIndex level_unrank(int level, int axes, std::uint64_t rank) {
    if (rank >= level_point_count(level, axes))
        throw std::invalid_argument("rank outside doubling grid");
    return unrank_mixed(level_markers_per_axis(level), axes, rank);
}

std::vector<double> level_coords(int level, const GridIndex& idx) {
    const double denom = static_cast<double>(1ull << level);
    std::vector<double> c(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        c[i] = static_cast<double>(idx[i]) / denom;  // exact: dyadic rationals
    return c;
}

std::optional<UncoveredPoint> find_uncovered_point(const std::vector<Ball>& balls,
                                                   int start_level, int max_level,
                                                   Norm norm, int players, int dim) {
    if (start_level < 0 || max_level < start_level)
        throw std::invalid_argument("find_uncovered_point: bad level range");
    const int axes = players * dim;
    for (int lvl = start_level; lvl <= max_level; ++lvl) {
        const std::uint64_t total = level_point_count(lvl, axes);
        for (std::uint64_t r = 0; r < total; ++r) {
            GridIndex idx = level_unrank(lvl, axes, r);
            std::vector<double> pt = level_coords(lvl, idx);
            if (!is_covered(pt, balls, norm))
                return UncoveredPoint{std::move(idx), lvl, r, std::move(pt)};
        }
    }
    return std::nullopt;
}

} // namespace lipband
