#include "doctest.h"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lipband/env.hpp"
#include "lipband/rng.hpp"
#include "lipband/zooming.hpp"

using namespace lipband;

TEST_CASE("zoom radius and index shrink with pulls") {
    const std::uint64_t T = 10000;
    ArmStats s;
    CHECK(zoom_radius(s, 2.0, T) == kInfinity);
    CHECK(zoom_index(s, T) == kInfinity);
    s.pulls = 600;
    s.reward_sum = 300.0;
    const double w = confidence_width(600, T);
    CHECK(zoom_radius(s, 2.0, T) == doctest::Approx(w / 2.0));
    CHECK(zoom_radius(s, 0.5, T) == doctest::Approx(w * 2.0));
    CHECK(zoom_index(s, T) == doctest::Approx(0.5 + 2.0 * w));
}

TEST_CASE("coverage index validates construction") {
    CHECK_THROWS_AS(CoverageIndex(0, Norm::L2, 4), std::invalid_argument);
    CHECK_THROWS_AS(CoverageIndex(17, Norm::L2, 4), std::invalid_argument);
    CHECK_THROWS_AS(CoverageIndex(2, Norm::L2, 0), std::invalid_argument);
    CHECK_THROWS_AS(CoverageIndex(2, Norm::L2, 31), std::invalid_argument);
    CHECK_THROWS_AS(CoverageIndex(2, Norm::L2, 4, 3), std::invalid_argument);

    CoverageIndex ci(2, Norm::L2, 4);
    CHECK_THROWS_AS(ci.add_ball({0.5}, 0.1), std::invalid_argument);
    ci.add_ball({0.5, 0.5}, 0.3);
    CHECK(ci.ball_count() == 1);
    CHECK_THROWS_AS(ci.set_radius(0, 0.4), std::invalid_argument);  // shrink only
    ci.set_radius(0, 0.3);
    ci.set_radius(0, 0.1);
    CHECK_THROWS_AS(ci.set_radius(1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(ci.query(0), std::invalid_argument);
    CHECK_FALSE(ci.query(5).has_value());  // past the cap there is nothing to report
}

TEST_CASE("coverage gaps open exactly where the scan finds them") {
    // Balls of radius 0.2 on the nine level-1 points cover level 1 but leave
    // (0, 0.25) as the first exposed level-2 point.  The answer must not
    // depend on how much of the lattice is cached.
    for (const std::uint64_t cache : {std::uint64_t{1} << 19, std::uint64_t{64}, std::uint64_t{4}}) {
        CoverageIndex ci(2, Norm::L2, 4, cache);
        for (double x : {0.0, 0.5, 1.0})
            for (double y : {0.0, 0.5, 1.0})
                ci.add_ball({x, y}, 0.2);
        const auto p = ci.query(1);
        REQUIRE(p.has_value());
        CHECK(p->level == 2);
        CHECK(p->rank == 1);
        CHECK(p->idx == GridIndex{0, 1});
        CHECK(p->coords == std::vector<double>{0.0, 0.25});

        const auto again = ci.query(1);
        REQUIRE(again.has_value());
        CHECK(again->rank == p->rank);

        const auto deep = ci.query(3);
        REQUIRE(deep.has_value());
        CHECK(deep->level == 3);
        CHECK(deep->rank == 2);
    }
}

TEST_CASE("an infinite ball covers every level") {
    CoverageIndex ci(3, Norm::LINF, 3, 8);
    ci.add_ball({0.5, 0.5, 0.5}, kInfinity);
    for (int s = 1; s <= 3; ++s) CHECK_FALSE(ci.query(s).has_value());
    // shrinking it to nothing exposes the origin again
    ci.set_radius(0, 0.01);
    const auto p = ci.query(1);
    REQUIRE(p.has_value());
    CHECK(p->level == 1);
    CHECK(p->rank == 0);
}

TEST_CASE("coverage queries match the reference scan") {
    RngStream rng = derive_stream(2024, 0, 0, StreamPurpose::Policy);
    for (int inst = 0; inst < 12; ++inst) {
        const int axes = 1 + inst % 3;
        const Norm norm = static_cast<Norm>(inst % 3);
        const int cap = axes == 3 ? 3 : 4;
        const std::uint64_t caches[] = {std::uint64_t{1} << 19, 64, 8, 4};
        CoverageIndex ci(axes, norm, cap, caches[inst % 4]);
        std::vector<Ball> mirror;

        for (int op = 0; op < 30; ++op) {
            if (mirror.empty() || rng.below(3) < 2) {
                std::vector<double> center(static_cast<std::size_t>(axes));
                for (double& c : center)
                    c = rng.below(2) ? rng.uniform01()
                                     : static_cast<double>(rng.below(9)) / 8.0;
                const double r = op % 5 == 0 ? kInfinity : 0.03 + 0.6 * rng.uniform01();
                ci.add_ball(center, r);
                mirror.push_back(Ball{std::move(center), r});
            } else {
                const std::size_t id = rng.below(mirror.size());
                const double cur = mirror[id].radius;
                const double r = cur == kInfinity ? 0.05 + 0.5 * rng.uniform01()
                                                  : cur * (0.3 + 0.5 * rng.uniform01());
                ci.set_radius(static_cast<int>(id), r);
                mirror[id].radius = r;
            }
            for (const int start : {1, 2, cap}) {
                const auto got = ci.query(start);
                const auto want = find_uncovered_point(mirror, start, cap, norm, axes, 1);
                REQUIRE(got.has_value() == want.has_value());
                if (got) {
                    CHECK(got->level == want->level);
                    CHECK(got->rank == want->rank);
                    CHECK(got->coords == want->coords);
                }
            }
        }
    }
}

TEST_CASE("dropping shallow levels keeps deeper queries intact") {
    CoverageIndex ci(2, Norm::L2, 5, 64);
    std::vector<Ball> mirror;
    RngStream rng = derive_stream(77, 0, 0, StreamPurpose::Policy);
    for (int i = 0; i < 8; ++i) {
        std::vector<double> c{rng.uniform01(), rng.uniform01()};
        const double r = 0.05 + 0.4 * rng.uniform01();
        ci.add_ball(c, r);
        mirror.push_back(Ball{std::move(c), r});
    }
    ci.drop_below(3);
    for (const int start : {3, 4, 5}) {
        const auto got = ci.query(start);
        const auto want = find_uncovered_point(mirror, start, 5, Norm::L2, 2, 1);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->level == want->level);
            CHECK(got->rank == want->rank);
        }
    }
}

TEST_CASE("a hopeless descent trips the effort budget") {
    // Dense union fringe: 65x65 small balls cover every dyadic point, yet no
    // cell is inside any single ball until level 7, so the frontier grows
    // geometrically with no exposed point to stop at.
    CoverageIndex ci(2, Norm::L2, 30, 4);
    const double spacing = 1.0 / 64.0;
    for (int i = 0; i <= 64; ++i)
        for (int j = 0; j <= 64; ++j)
            ci.add_ball({i * spacing, j * spacing}, 0.75 * spacing);
    CHECK_THROWS_AS(ci.query(1), CoverageEffortError);
}

TEST_CASE("zoom players activate arms from the uncovered frontier") {
    const std::uint64_t T = 64;
    ZoomAState controller(2, 1, Norm::L2, 1.0, T, 10, ZoomAState::kController);
    ZoomAState p0(2, 1, Norm::L2, 1.0, T, 10, 0);
    ZoomAState p1(2, 1, Norm::L2, 1.0, T, 10, 1);

    std::optional<SharedRewardObs> obs;
    for (std::uint64_t t = 1; t <= T; ++t) {
        const auto joint = controller.step(t, obs);
        auto mine = p0.step(t, obs);
        const auto other = p1.step(t, obs);
        mine.insert(mine.end(), other.begin(), other.end());
        CHECK(mine == joint);
        CHECK(p0.last_arm() == controller.last_arm());
        CHECK(p1.last_arm() == controller.last_arm());
        obs = SharedRewardObs{0.5};
    }

    // One arm at the centre until its ball shrinks below the corner
    // distance 1/sqrt(2); with these widths that takes exactly 50 pulls.
    // The fresh corner ball then soaks up pulls until its own radius drops
    // under sqrt(2) and the opposite corner pops out on the last round.
    const auto& arms = controller.arms();
    REQUIRE(arms.size() == 3);
    CHECK(arms[0].center == std::vector<double>{0.5, 0.5});
    CHECK(arms[0].level == 1);
    CHECK(arms[0].stats.pulls == 50);
    CHECK(arms[1].center == std::vector<double>{0.0, 0.0});
    CHECK(arms[1].level == 1);
    CHECK(arms[1].level_rank == 0);
    CHECK(arms[1].activated_at == 51);
    CHECK(arms[1].stats.pulls == 13);
    CHECK(arms[2].center == std::vector<double>{1.0, 1.0});
    CHECK(arms[2].activated_at == T);
    CHECK(arms[2].stats.pulls == 0);  // chosen on the last round, never credited
    CHECK(controller.current_level() == 1);
}

TEST_CASE("zoom state validates its inputs") {
    CHECK_THROWS_AS(ZoomAState(2, 1, Norm::L2, 0.0, 100, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(ZoomAState(2, 1, Norm::L2, 1.0, 1, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(ZoomAState(2, 1, Norm::L2, 1.0, 100, 10, 2), std::invalid_argument);
    ZoomAState s(2, 1, Norm::L2, 1.0, 100, 10, 0);
    CHECK_THROWS_AS(s.step(1, SharedRewardObs{0.5}), std::invalid_argument);
    s.step(1, std::nullopt);
    CHECK_THROWS_AS(s.step(2, std::nullopt), std::invalid_argument);

    CHECK_THROWS_AS(ZoomBState(2, 1, Norm::L2, 1.0, 100, 10, -1), std::invalid_argument);
    CHECK_THROWS_AS(ZoomBState(2, 1, Norm::L2, 1.0, 100, 10, 2), std::invalid_argument);
}

TEST_CASE("rotating zoom players stay aligned and freeze eliminated balls") {
    const EnvModel env(2, 1, 0.8, Norm::L2, MeanFamily::CONE, {Peak{{1.0, 1.0}, 0.9}},
                       NoiseKind::BERNOULLI, 0.5);
    const std::uint64_t T = 5000;
    ZoomBState p0(2, 1, Norm::L2, 0.8, T, 12, 0);
    ZoomBState p1(2, 1, Norm::L2, 0.8, T, 12, 1);
    RngStream r0 = derive_stream(33, 0, 0, StreamPurpose::Reward);
    RngStream r1 = derive_stream(33, 0, 1, StreamPurpose::Reward);

    std::vector<double> prev_joint;
    double prev_r0 = 0.0, prev_r1 = 0.0;
    bool saw_first_activation = false;
    for (std::uint64_t t = 1; t <= T; ++t) {
        std::optional<JointActionObs> o0, o1;
        if (t > 1) {
            o0 = JointActionObs{prev_joint, prev_r0};
            o1 = JointActionObs{prev_joint, prev_r1};
        }
        std::vector<double> joint = p0.step(t, o0);
        const auto b1 = p1.step(t, o1);
        joint.insert(joint.end(), b1.begin(), b1.end());

        CHECK(p0.desired() == p1.desired());
        CHECK(p0.last_designated() == p1.last_designated());
        CHECK(p0.consistency_digest() == p1.consistency_digest());

        // the first activated arm is designated immediately to catch up
        if (!saw_first_activation && p0.arms().size() == 2) {
            CHECK(p0.last_designated() == 1);
            saw_first_activation = true;
        }

        prev_r0 = env.sample_reward(joint, r0);
        prev_r1 = env.sample_reward(joint, r1);
        prev_joint = std::move(joint);
    }

    CHECK(saw_first_activation);
    const auto& arms = p0.arms();
    REQUIRE(arms.size() >= 2);
    CHECK(arms[0].center == std::vector<double>{0.5, 0.5});

    std::size_t eliminated = 0;
    for (std::size_t id = 0; id < arms.size(); ++id) {
        const ZoomArm& a = arms[id];
        if (!a.eliminated) continue;
        ++eliminated;
        CHECK(a.eliminated_at >= 2);
        CHECK(a.frozen_radius > 0.0);
        CHECK(a.frozen_radius < kInfinity);
        for (const std::size_t d : p0.desired()) CHECK(d != id);
        // the frozen ball must match the stats at elimination time
        CHECK(a.frozen_radius >= zoom_radius(a.stats, 0.8, T));
    }
    CHECK(eliminated >= 1);

    // both players hold identical final arm books
    const auto& other = p1.arms();
    REQUIRE(other.size() == arms.size());
    for (std::size_t id = 0; id < arms.size(); ++id) {
        CHECK(other[id].center == arms[id].center);
        CHECK(other[id].eliminated == arms[id].eliminated);
        CHECK(other[id].frozen_radius == arms[id].frozen_radius);
        CHECK(other[id].stats.pulls == arms[id].stats.pulls);
    }
}
