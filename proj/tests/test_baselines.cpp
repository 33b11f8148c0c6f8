#include "irsplan/baselines.hpp"
#include "irsplan/error.hpp"
#include "irsplan/pipeline.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace irsplan;

namespace
{

/// Rate depends on the AP distance only.
SnrModel ap_only_model()
{
    SnrModel m;
    m.C = 5e-8;
    m.mu = 2.0;
    return m;
}

double mean_ap_distance(const Scenario &s, const Path &p)
{
    double d = 0.0;
    for (const auto &q : p)
    {
        d += s.dist_ap(q);
    }
    return d / static_cast<double>(p.size());
}

} // namespace

TEST_CASE("lower bound on the base layout")
{
    const Scenario s = test::base_scenario();
    const LowerBound lb = lower_bound(s);
    CHECK(lb.status == socp::Status::Optimal);
    CHECK(lb.energy == doctest::Approx(1349.04).epsilon(1e-5));
    CHECK(test::rel_err(lb.energy, test::equal_spacing_energy(s)) < 1e-7);
    REQUIRE(lb.positions.size() == static_cast<std::size_t>(s.K + 1));
    CHECK(lb.positions.front() == s.q_s);
    CHECK(lb.positions.back() == s.q_d);
    // Collinear and equally spaced.
    const Vec2 dir = (s.q_d - s.q_s).normalized();
    const double step = (s.q_d - s.q_s).norm() / s.K;
    for (int k = 1; k <= s.K; ++k)
    {
        const Vec2 d = lb.positions[k] - lb.positions[k - 1];
        CHECK(std::abs(d.norm() - step) < 1e-5);
        CHECK(std::abs(dir.x() * d.y() - dir.y() * d.x()) < 1e-5);
    }
}

TEST_CASE("lower bound with coinciding endpoints is the hovering cost")
{
    Scenario s = test::base_scenario();
    s.q_d = s.q_s;
    CHECK(lower_bound(s).energy == doctest::Approx(s.K * s.motion.c3 * s.delta_t).epsilon(1e-7));
}

TEST_CASE("max-rate baseline heads for a central AP")
{
    Scenario s = test::open_scenario();
    s.q_a = Vec2(25.0, 15.0);
    const SnrModel m = ap_only_model();
    const RadioMap map = test::synthetic_map(s, m, 50, 30);
    RmapConfig cfg;
    const BaselineResult b = plan_max_rate(s, m, map, cfg);
    const TimeExpandedGraph g = build_graph(s, map);
    const Path me = initial_path(s, g, InitMode::MinEnergy);
    CHECK(mean_ap_distance(s, b.trajectory.positions) < mean_ap_distance(s, me));
    double min_d = 1e9;
    for (const auto &q : b.trajectory.positions)
    {
        min_d = std::min(min_d, (q - s.q_a).norm());
    }
    CHECK(min_d < 1.0);
    double prev = b.trace.initial_objective;
    for (const auto &rec : b.trace.records)
    {
        CHECK(rec.objective >= prev - 1e-9 * std::abs(prev));
        prev = rec.objective;
    }
    check_trajectory(s, b.trajectory.positions);
}

TEST_CASE("ordering of bound, RMAP and max-rate energies")
{
    const Scenario s = test::base_scenario();
    const MapAndModel mm = build_map_and_model(s, 25, 15, 20, 1);
    const TimeExpandedGraph g = build_graph(s, mm.map);
    const double me_rate = avg_map_rate(mm.map, s, initial_path(s, g, InitMode::MinEnergy));
    const double mr_rate = avg_map_rate(mm.map, s, initial_path(s, g, InitMode::MaxRate));
    RmapConfig cfg;
    cfg.r_min = 0.5 * (me_rate + mr_rate);
    const PlanOutcome r = plan(s, mm.model, mm.map, cfg);
    const BaselineResult b = plan_max_rate(s, mm.model, mm.map, cfg);
    const double lb = lower_bound(s).energy;
    CHECK(lb <= r.rmap.trajectory.energy_j);
    CHECK(r.rmap.trajectory.energy_j <= r.rmap.trace.initial_energy);
    CHECK(r.rmap.trajectory.energy_j < b.trajectory.energy_j);
    CHECK(b.meets_rate == (b.trajectory.avg_rate_map >= cfg.r_min));
    CHECK(b.trajectory.avg_rate_map >= r.rmap.trajectory.avg_rate_map * 0.95);
}

TEST_CASE("lower bound stays below RMAP on random obstacle layouts")
{
    const Scenario base = test::base_scenario();
    const double lb = lower_bound(base).energy;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        const Scenario s = random_obstacle_scenario(base, 4, seed);
        const MapAndModel mm = build_map_and_model(s, 10, 6, 4, seed);
        RmapConfig cfg;
        const PlanOutcome r = plan(s, mm.model, mm.map, cfg);
        CHECK(lb <= r.rmap.trajectory.energy_j + 1e-9);
        CHECK(r.rmap.trace.monotone());
        check_trajectory(s, r.rmap.trajectory.positions);
    }
}

TEST_CASE("random layouts are reproducible and keep the endpoints clear")
{
    const Scenario base = test::base_scenario();
    const Scenario a = random_obstacle_scenario(base, 6, 9);
    const Scenario b = random_obstacle_scenario(base, 6, 9);
    CHECK(to_json_text(a) == to_json_text(b));
    CHECK(a.obstacles.size() == 6);
    CHECK_FALSE(collides(a, a.q_s, a.d_s));
    CHECK_FALSE(collides(a, a.q_d, a.d_s));
    CHECK(min_slots(build_lattice(a)) <= a.K);
    CHECK_THROWS_AS(random_obstacle_scenario(base, -1, 1), DomainError);
}
