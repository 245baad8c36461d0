#include "lipband/zooming.hpp"

#include <algorithm>
#include <cmath>

#include "lipband/rng.hpp"

namespace lipband {

double zoom_radius(const ArmStats& stats, double lipschitz, std::uint64_t horizon) {
    if (lipschitz <= 0.0) throw std::invalid_argument("zoom_radius: lipschitz must be > 0");
    const double w = confidence_width(stats.pulls, horizon);
    return w == kInfinity ? kInfinity : w / lipschitz;
}

double zoom_index(const ArmStats& stats, std::uint64_t horizon) {
    if (stats.pulls == 0) return kInfinity;
    return stats.mean() + 2.0 * confidence_width(stats.pulls, horizon);
}

// ------------------------------------------------------------- CoverageIndex

CoverageIndex::CoverageIndex(int axes, Norm norm, int max_level,
                             std::uint64_t max_cached_points)
    : axes_(axes), norm_(norm), max_level_(max_level), max_cached_points_(max_cached_points) {
    if (axes_ < 1 || axes_ > 16) throw std::invalid_argument("CoverageIndex: bad axis count");
    if (max_level_ < 1 || max_level_ > 30)
        throw std::invalid_argument("CoverageIndex: bad level cap");
    if (max_cached_points_ < 4) throw std::invalid_argument("CoverageIndex: bad cache bound");
    // Deepest level whose full point lattice fits the cache bound; overflow-safe
    // because the product is never formed once it would exceed the bound.
    for (int l = 1; l <= max_level_; ++l) {
        const std::uint64_t per = (std::uint64_t{1} << l) + 1;
        std::uint64_t n = 1;
        bool fits = true;
        for (int a = 0; a < axes_ && fits; ++a) {
            if (n > max_cached_points_ / per) fits = false;
            else n *= per;
        }
        if (!fits) break;
        dense_cap_ = l;
    }
}

namespace {

// Rank decoding into caller-owned scratch; the repair loops run hot and
// must not allocate.
inline void decode_rank(std::uint64_t rank, std::uint64_t per, int axes, int* digits) {
    for (int a = axes - 1; a >= 0; --a) {
        digits[a] = static_cast<int>(rank % per);
        rank /= per;
    }
}

constexpr int kMaxAxes = 16;

} // namespace

double CoverageIndex::point_dist(const double* coords, const Ball& b) const {
    double acc = 0.0;
    for (int a = 0; a < axes_; ++a) {
        const double d = std::abs(coords[a] - b.center[static_cast<std::size_t>(a)]);
        switch (norm_) {
            case Norm::L1: acc += d; break;
            case Norm::L2: acc += d * d; break;
            case Norm::LINF: acc = std::max(acc, d); break;
        }
    }
    return norm_ == Norm::L2 ? std::sqrt(acc) : acc;
}

// Whole-cell containment holds iff the farthest corner is inside the ball;
// per axis that corner sits at whichever cell edge is further from the
// center.
double CoverageIndex::far_corner(std::uint64_t per_axis, const int* cell, const Ball& b) const {
    const double step = 1.0 / static_cast<double>(per_axis);
    double acc = 0.0;
    for (int a = 0; a < axes_; ++a) {
        const double lo = static_cast<double>(cell[a]) * step;
        const double far = std::max(std::abs(b.center[static_cast<std::size_t>(a)] - lo),
                                    std::abs(b.center[static_cast<std::size_t>(a)] - (lo + step)));
        switch (norm_) {
            case Norm::L1: acc += far; break;
            case Norm::L2: acc += far * far; break;
            case Norm::LINF: acc = std::max(acc, far); break;
        }
    }
    return norm_ == Norm::L2 ? std::sqrt(acc) : acc;
}

// The returned distance is the member-heap key, so it must be the true
// distance even under an infinite radius: the ball may shrink later and the
// key decides when the entry escapes.
int CoverageIndex::witness_point(const double* coords, double& dist) const {
    for (std::size_t i = 0; i < balls_.size(); ++i) {
        const double d = point_dist(coords, balls_[i]);
        if (d <= balls_[i].radius) {
            dist = d;
            return static_cast<int>(i);
        }
    }
    return -1;
}

int CoverageIndex::witness_cell(std::uint64_t per_axis, const int* cell, double& far) const {
    for (std::size_t i = 0; i < balls_.size(); ++i) {
        const double f = far_corner(per_axis, cell, balls_[i]);
        if (f <= balls_[i].radius) {
            far = f;
            return static_cast<int>(i);
        }
    }
    return -1;
}

int CoverageIndex::add_ball(const std::vector<double>& center, double radius) {
    if (static_cast<int>(center.size()) != axes_)
        throw std::invalid_argument("CoverageIndex: center dimension mismatch");
    if (radius < 0.0) throw std::invalid_argument("CoverageIndex: negative radius");
    const int id = static_cast<int>(balls_.size());
    balls_.push_back(Ball{center, radius});
    const Ball& b = balls_.back();
    int digits[kMaxAxes];
    double coords[kMaxAxes];
    for (auto& [lvl, cache] : levels_) {
        const double step = 1.0 / static_cast<double>(cache.per_axis);
        cache.point_members.emplace_back();
        cache.cell_members.emplace_back();
        for (auto it = cache.open_points.begin(); it != cache.open_points.end();) {
            decode_rank(*it, cache.per_axis + 1, axes_, digits);
            for (int a = 0; a < axes_; ++a) coords[a] = digits[a] * step;
            const double d = point_dist(coords, b);
            if (d <= b.radius) {
                cache.point_witness[*it] = id;
                cache.point_members[static_cast<std::size_t>(id)].push({d, *it});
                it = cache.open_points.erase(it);
            } else {
                ++it;
            }
        }
        for (auto it = cache.open_cells.begin(); it != cache.open_cells.end();) {
            decode_rank(*it, cache.per_axis, axes_, digits);
            const double f = far_corner(cache.per_axis, digits, b);
            if (f <= b.radius) {
                cache.cell_witness[*it] = id;
                cache.cell_members[static_cast<std::size_t>(id)].push({f, *it});
                it = cache.open_cells.erase(it);
            } else {
                ++it;
            }
        }
    }
    return id;
}

void CoverageIndex::set_radius(int ball, double radius) {
    if (ball < 0 || static_cast<std::size_t>(ball) >= balls_.size())
        throw std::invalid_argument("CoverageIndex: unknown ball id");
    auto& b = balls_[static_cast<std::size_t>(ball)];
    if (radius > b.radius)
        throw std::invalid_argument("CoverageIndex: radius may only shrink");
    if (radius == b.radius) return;
    b.radius = radius;
    int digits[kMaxAxes];
    double coords[kMaxAxes];
    for (auto& [lvl, cache] : levels_) {
        const double step = 1.0 / static_cast<double>(cache.per_axis);
        auto& pts = cache.point_members[static_cast<std::size_t>(ball)];
        while (!pts.empty() && pts.top().first > radius) {
            const std::uint64_t rank = pts.top().second;
            pts.pop();
            decode_rank(rank, cache.per_axis + 1, axes_, digits);
            for (int a = 0; a < axes_; ++a) coords[a] = digits[a] * step;
            double d;
            const int w = witness_point(coords, d);
            cache.point_witness[rank] = w;
            if (w < 0) {
                cache.open_points.insert(rank);
            } else {
                cache.point_members[static_cast<std::size_t>(w)].push({d, rank});
            }
        }
        auto& cells = cache.cell_members[static_cast<std::size_t>(ball)];
        while (!cells.empty() && cells.top().first > radius) {
            const std::uint64_t rank = cells.top().second;
            cells.pop();
            decode_rank(rank, cache.per_axis, axes_, digits);
            double f;
            const int w = witness_cell(cache.per_axis, digits, f);
            cache.cell_witness[rank] = w;
            if (w < 0) {
                cache.open_cells.insert(rank);
            } else {
                cache.cell_members[static_cast<std::size_t>(w)].push({f, rank});
            }
        }
    }
}

CoverageIndex::LevelState& CoverageIndex::ensure_dense(int level) {
    auto it = levels_.find(level);
    if (it != levels_.end()) return it->second;
    LevelState cache;
    cache.per_axis = std::uint64_t{1} << level;
    const double step = 1.0 / static_cast<double>(cache.per_axis);
    const std::uint64_t npoints = level_point_count(level, axes_);
    std::uint64_t ncells = 1;
    for (int a = 0; a < axes_; ++a) ncells *= cache.per_axis;
    cache.point_witness.assign(npoints, -1);
    cache.cell_witness.assign(ncells, -1);
    cache.point_members.assign(balls_.size(), {});
    cache.cell_members.assign(balls_.size(), {});
    int digits[kMaxAxes];
    double coords[kMaxAxes];
    for (std::uint64_t r = 0; r < npoints; ++r) {
        decode_rank(r, cache.per_axis + 1, axes_, digits);
        for (int a = 0; a < axes_; ++a) coords[a] = digits[a] * step;
        double d;
        const int w = witness_point(coords, d);
        cache.point_witness[r] = w;
        if (w < 0) {
            cache.open_points.insert(r);
        } else {
            cache.point_members[static_cast<std::size_t>(w)].push({d, r});
        }
    }
    for (std::uint64_t r = 0; r < ncells; ++r) {
        decode_rank(r, cache.per_axis, axes_, digits);
        double f;
        const int w = witness_cell(cache.per_axis, digits, f);
        cache.cell_witness[r] = w;
        if (w < 0) {
            cache.open_cells.insert(r);
        } else {
            cache.cell_members[static_cast<std::size_t>(w)].push({f, r});
        }
    }
    return levels_.emplace(level, std::move(cache)).first->second;
}

// Refines the open cells of the deepest cached level down toward the cap.
// Children swallowed by a single ball are pruned; corner points of the
// survivors are the only places an uncovered point can live, and they are
// checked in rank order from start_level on.  last_checked names the last
// level whose full point lattice is known covered (-1 when none): one level
// deeper the even-coordinate corners are inherited points and can be
// skipped.
std::optional<UncoveredPoint> CoverageIndex::query_descend(int start_level,
                                                           std::vector<int> open,
                                                           int last_checked) const {
    std::uint64_t effort = 0;
    const auto charge = [&](std::uint64_t units) {
        effort += units;
        if (effort > kEffortCap)
            throw CoverageEffortError("coverage descent exceeded effort budget");
    };
    const std::uint32_t corners = 1u << axes_;
    std::vector<int> next;
    std::vector<std::uint64_t> candidates;
    int child[kMaxAxes];
    int digits[kMaxAxes];
    double coords[kMaxAxes];
    for (int lvl = dense_cap_ + 1; lvl <= max_level_ && !open.empty(); ++lvl) {
        const std::uint64_t per_axis = std::uint64_t{1} << lvl;
        const bool check_points = lvl >= start_level;
        const bool odd_only = check_points && lvl == last_checked + 1;
        next.clear();
        candidates.clear();
        const std::size_t ncells = open.size() / static_cast<std::size_t>(axes_);
        for (std::size_t c = 0; c < ncells; ++c) {
            const int* cell = open.data() + c * static_cast<std::size_t>(axes_);
            for (std::uint32_t mask = 0; mask < corners; ++mask) {
                for (int a = 0; a < axes_; ++a)
                    child[a] = cell[a] * 2 + static_cast<int>((mask >> a) & 1u);
                charge(balls_.size());
                double f;
                if (witness_cell(per_axis, child, f) >= 0) continue;
                if (check_points) {
                    for (std::uint32_t corner = 0; corner < corners; ++corner) {
                        std::uint64_t rank = 0;
                        bool odd = false;
                        for (int a = 0; a < axes_; ++a) {
                            const int v = child[a] + static_cast<int>((corner >> a) & 1u);
                            rank = rank * (per_axis + 1) + static_cast<std::uint64_t>(v);
                            odd = odd || (v & 1);
                        }
                        if (odd_only && !odd) continue;
                        candidates.push_back(rank);
                    }
                }
                next.insert(next.end(), child, child + axes_);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        const double step = 1.0 / static_cast<double>(per_axis);
        for (const std::uint64_t r : candidates) {
            decode_rank(r, per_axis + 1, axes_, digits);
            for (int a = 0; a < axes_; ++a) coords[a] = digits[a] * step;
            charge(balls_.size());
            double dist;
            if (witness_point(coords, dist) < 0) {
                UncoveredPoint p;
                p.idx.assign(digits, digits + axes_);
                p.level = lvl;
                p.rank = r;
                p.coords.assign(coords, coords + axes_);
                return p;
            }
        }
        if (check_points) last_checked = lvl;
        open.swap(next);
    }
    return std::nullopt;
}

std::optional<UncoveredPoint> CoverageIndex::query(int start_level) {
    if (start_level < 1) throw std::invalid_argument("CoverageIndex: bad start level");
    if (start_level > max_level_) return std::nullopt;
    int last_checked = -1;
    for (int lvl = start_level; lvl <= dense_cap_ && lvl <= max_level_; ++lvl) {
        LevelState& cache = ensure_dense(lvl);
        if (!cache.open_points.empty()) {
            const std::uint64_t r = *cache.open_points.begin();
            UncoveredPoint p;
            p.idx = level_unrank(lvl, axes_, r);
            p.level = lvl;
            p.rank = r;
            p.coords = level_coords(lvl, p.idx);
            return p;
        }
        if (cache.open_cells.empty()) return std::nullopt;
        last_checked = lvl;
    }
    if (dense_cap_ >= max_level_) return std::nullopt;
    std::vector<int> seeds;
    if (dense_cap_ == 0) {
        // Even level 1 is too big to cache; descend from the whole cube.
        seeds.assign(static_cast<std::size_t>(axes_), 0);
    } else {
        LevelState& base = ensure_dense(dense_cap_);
        if (base.open_cells.empty()) return std::nullopt;
        if (base.open_points.empty()) last_checked = std::max(last_checked, dense_cap_);
        int digits[kMaxAxes];
        seeds.reserve(base.open_cells.size() * static_cast<std::size_t>(axes_));
        for (const std::uint64_t r : base.open_cells) {
            decode_rank(r, base.per_axis, axes_, digits);
            seeds.insert(seeds.end(), digits, digits + axes_);
        }
    }
    return query_descend(start_level, std::move(seeds), last_checked);
}

void CoverageIndex::drop_below(int level) {
    // The deepest cached level survives: it seeds every descent.
    const int keep_from = std::min(level, dense_cap_);
    while (!levels_.empty() && levels_.begin()->first < keep_from)
        levels_.erase(levels_.begin());
}

// ---------------------------------------------------------------- ZoomAState

namespace {

std::vector<double> center_of_cube(int axes) {
    return std::vector<double>(static_cast<std::size_t>(axes), 0.5);
}

ZoomArm make_initial_arm(int axes) {
    ZoomArm arm;
    arm.center = center_of_cube(axes);
    arm.level = 1;
    arm.level_idx.assign(static_cast<std::size_t>(axes), 1);
    arm.level_rank = level_rank_of(1, arm.level_idx);
    arm.activated_at = 1;
    return arm;
}

} // namespace

ZoomAState::ZoomAState(int players, int dim, Norm norm, double lipschitz, std::uint64_t horizon,
                       int level_cap, int player)
    : players_(players),
      dim_(dim),
      axes_(players * dim),
      norm_(norm),
      lipschitz_(lipschitz),
      horizon_(horizon),
      level_cap_(level_cap),
      player_(player),
      coverage_(players * dim, norm, level_cap) {
    if (players_ < 1 || dim_ < 1) throw std::invalid_argument("ZoomAState: bad dimensions");
    if (lipschitz_ <= 0.0) throw std::invalid_argument("ZoomAState: lipschitz must be > 0");
    if (horizon_ < 2) throw std::invalid_argument("ZoomAState: horizon must be >= 2");
    if (player_ != kController && (player_ < 0 || player_ >= players_))
        throw std::invalid_argument("ZoomAState: player out of range");
}

std::vector<double> ZoomAState::emit(const std::vector<double>& center) const {
    if (player_ < 0) return center;
    return std::vector<double>(center.begin() + static_cast<std::size_t>(player_) * dim_,
                               center.begin() + static_cast<std::size_t>(player_ + 1) * dim_);
}

std::size_t ZoomAState::activate(const UncoveredPoint& p, std::uint64_t t) {
    ZoomArm arm;
    arm.center = p.coords;
    arm.level = p.level;
    arm.level_rank = p.rank;
    arm.level_idx = p.idx;
    arm.activated_at = t;
    arms_.push_back(std::move(arm));
    coverage_.add_ball(arms_.back().center, kInfinity);
    if (p.level > level_) {
        level_ = p.level;
        coverage_.drop_below(level_);
    }
    return arms_.size() - 1;
}

std::vector<double> ZoomAState::step(std::uint64_t t, const std::optional<SharedRewardObs>& obs) {
    if (t < 1 || t > horizon_) throw std::invalid_argument("ZoomAState: round out of range");
    if (t == 1) {
        if (obs) throw std::invalid_argument("ZoomAState: unexpected reward at t=1");
        arms_.push_back(make_initial_arm(axes_));
        coverage_.add_ball(arms_.back().center, kInfinity);
        chosen_ = 0;
        return emit(arms_[0].center);
    }
    if (!obs) throw std::invalid_argument("ZoomAState: missing reward");
    ZoomArm& played = arms_[chosen_];
    played.stats.add(obs->reward);
    coverage_.set_radius(static_cast<int>(chosen_), zoom_radius(played.stats, lipschitz_, horizon_));
    if (const auto p = coverage_.query(level_)) activate(*p, t);
    std::size_t best = 0;
    double best_index = -kInfinity;
    for (std::size_t i = 0; i < arms_.size(); ++i) {
        const double idx = zoom_index(arms_[i].stats, horizon_);
        const bool wins =
            idx > best_index ||
            (idx == best_index &&
             (arms_[i].level < arms_[best].level ||
              (arms_[i].level == arms_[best].level && arms_[i].level_rank < arms_[best].level_rank)));
        if (i == 0 || wins) {
            best = i;
            best_index = idx;
        }
    }
    chosen_ = best;
    return emit(arms_[chosen_].center);
}

// ---------------------------------------------------------------- ZoomBState

ZoomBState::ZoomBState(int players, int dim, Norm norm, double lipschitz, std::uint64_t horizon,
                       int level_cap, int player)
    : players_(players),
      dim_(dim),
      axes_(players * dim),
      norm_(norm),
      lipschitz_(lipschitz),
      horizon_(horizon),
      level_cap_(level_cap),
      player_(player),
      coverage_(players * dim, norm, level_cap) {
    if (players_ < 1 || dim_ < 1) throw std::invalid_argument("ZoomBState: bad dimensions");
    if (lipschitz_ <= 0.0) throw std::invalid_argument("ZoomBState: lipschitz must be > 0");
    if (horizon_ < 2) throw std::invalid_argument("ZoomBState: horizon must be >= 2");
    if (player_ < 0 || player_ >= players_)
        throw std::invalid_argument("ZoomBState: player out of range");
}

std::vector<double> ZoomBState::emit(const std::vector<double>& center) const {
    return std::vector<double>(center.begin() + static_cast<std::size_t>(player_) * dim_,
                               center.begin() + static_cast<std::size_t>(player_ + 1) * dim_);
}

std::size_t ZoomBState::activate(const UncoveredPoint& p, std::uint64_t t) {
    ZoomArm arm;
    arm.center = p.coords;
    arm.level = p.level;
    arm.level_rank = p.rank;
    arm.level_idx = p.idx;
    arm.activated_at = t;
    const std::size_t id = arms_.size();
    by_center_[arm.center] = id;
    arms_.push_back(std::move(arm));
    coverage_.add_ball(arms_.back().center, kInfinity);
    desired_.push_back(id);
    catchup_.push_back(id);
    digest_ = mix64(digest_ ^ (static_cast<std::uint64_t>(p.level) << 48) ^ (p.rank << 1) ^ 1u);
    if (p.level > level_) {
        level_ = p.level;
        coverage_.drop_below(level_);
    }
    return id;
}

void ZoomBState::eliminate(std::size_t id, std::uint64_t t) {
    ZoomArm& arm = arms_[id];
    arm.eliminated = true;
    arm.eliminated_at = t;
    arm.frozen_radius = zoom_radius(arm.stats, lipschitz_, horizon_);
    const auto pos = std::find(desired_.begin(), desired_.end(), id);
    if (pos == desired_.end()) throw std::logic_error("ZoomBState: eliminating unknown arm");
    const std::ptrdiff_t j = pos - desired_.begin();
    desired_.erase(pos);
    if (desired_.empty()) throw std::logic_error("ZoomBState: eliminated every arm");
    if (j <= cursor_) --cursor_;
    const auto q = std::find(catchup_.begin(), catchup_.end(), id);
    if (q != catchup_.end()) catchup_.erase(q);
    digest_ = mix64(digest_ ^ (id << 1));
}

std::vector<double> ZoomBState::signal_block(const ZoomArm& arm) const {
    // Advance this player's block on the arm's activation-level grid; the
    // result always differs from the arm's own block.
    GridIndex idx = arm.level_idx;
    const std::uint64_t markers = level_markers_per_axis(arm.level);
    for (int axis = (player_ + 1) * dim_ - 1; axis >= player_ * dim_; --axis) {
        if (static_cast<std::uint64_t>(++idx[static_cast<std::size_t>(axis)]) < markers) break;
        idx[static_cast<std::size_t>(axis)] = 0;
    }
    const auto coords = level_coords(arm.level, idx);
    return std::vector<double>(coords.begin() + static_cast<std::size_t>(player_) * dim_,
                               coords.begin() + static_cast<std::size_t>(player_ + 1) * dim_);
}

std::vector<double> ZoomBState::step(std::uint64_t t, const std::optional<JointActionObs>& obs) {
    if (t < 1 || t > horizon_) throw std::invalid_argument("ZoomBState: round out of range");
    signaled_ = false;
    if (t == 1) {
        if (obs) throw std::invalid_argument("ZoomBState: unexpected observation at t=1");
        ZoomArm arm = make_initial_arm(axes_);
        by_center_[arm.center] = 0;
        arms_.push_back(std::move(arm));
        coverage_.add_ball(arms_[0].center, kInfinity);
        desired_.push_back(0);
    } else {
        if (!obs) throw std::invalid_argument("ZoomBState: missing observation");
        const auto hit = by_center_.find(obs->joint);
        if (hit != by_center_.end()) {
            ZoomArm& arm = arms_[hit->second];
            arm.stats.add(obs->own_reward);
            if (!arm.eliminated)
                coverage_.set_radius(static_cast<int>(hit->second),
                                     zoom_radius(arm.stats, lipschitz_, horizon_));
        }
        if (have_designated_ && !arms_[designated_].eliminated &&
            obs->joint != arms_[designated_].center)
            eliminate(designated_, t);
        std::uint64_t guard = 0;
        while (const auto p = coverage_.query(level_)) {
            activate(*p, t);
            if (++guard > (std::uint64_t{1} << 20))
                throw std::logic_error("ZoomBState: activation did not restore coverage");
        }
    }
    std::uint64_t n_max = 0;
    for (const std::size_t id : desired_) n_max = std::max(n_max, arms_[id].stats.pulls);
    while (!catchup_.empty() && arms_[catchup_.front()].stats.pulls >= n_max)
        catchup_.pop_front();
    if (!catchup_.empty()) {
        designated_ = catchup_.front();
    } else {
        cursor_ = (cursor_ + 1) % static_cast<std::ptrdiff_t>(desired_.size());
        designated_ = desired_[static_cast<std::size_t>(cursor_)];
    }
    have_designated_ = true;
    digest_ = mix64(digest_ + (designated_ << 1));

    const ZoomArm& c = arms_[designated_];
    if (c.stats.pulls > 0) {
        const double c_upper = c.stats.mean() + 2.0 * confidence_width(c.stats.pulls, horizon_);
        for (const std::size_t id : desired_) {
            if (id == designated_) continue;
            const ZoomArm& a = arms_[id];
            if (a.stats.pulls == 0) continue;
            if (c_upper < a.stats.mean() - confidence_width(a.stats.pulls, horizon_)) {
                signaled_ = true;
                break;
            }
        }
    }
    return signaled_ ? signal_block(c) : emit(c.center);
}

} // namespace lipband
