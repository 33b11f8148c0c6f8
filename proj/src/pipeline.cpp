// SPDX-License-Identifier: Apache-2.0
#include "irsplan/pipeline.hpp"

#include "irsplan/error.hpp"

#include <random>

namespace irsplan
{

PlanOutcome plan(const Scenario &s, const SnrModel &m, const RadioMap &map, const RmapConfig &cfg, double grid_step)
{
    PlanOutcome out;
    const auto g = build_graph(s, map, grid_step);
    out.me = initial_path(s, g, InitMode::MinEnergy);
    out.mr = initial_path(s, g, InitMode::MaxRate);
    out.choice = select_initial(s, map, out.me, out.mr, cfg.r_min);
    out.rmap = run_rmap(s, m, map, out.choice.positions, cfg);
    return out;
}

BaselineResult plan_max_rate(const Scenario &s, const SnrModel &m, const RadioMap &map, const RmapConfig &cfg,
                             double grid_step)
{
    const auto g = build_graph(s, map, grid_step);
    return max_rate_trajectory(s, m, map, initial_path(s, g, InitMode::MaxRate), cfg);
}

Scenario random_obstacle_scenario(const Scenario &base, int count, std::uint64_t seed)
{
    if (count < 0)
    {
        throw DomainError("obstacle count must be nonnegative");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, base.area_width_m), uy(0.0, base.area_height_m);
    Scenario s = base;
    s.obstacles.clear();
    int rejected = 0;
    while (static_cast<int>(s.obstacles.size()) < count)
    {
        if (rejected > 10000)
        {
            throw DomainError("could not place the requested number of obstacles");
        }
        const Vec2 c(ux(rng), uy(rng));
        s.obstacles.push_back(Obstacle::ellipse(c, 3.0, 2.0, 2.0));
        bool ok = !collides(s, s.q_s, s.d_s) && !collides(s, s.q_d, s.d_s);
        if (ok)
        {
            try
            {
                const auto g = build_lattice(s);
                const int need = min_slots(g);
                ok = need >= 0 && need <= s.K;
            }
            catch (const NoPathError &)
            {
                ok = false;
            }
        }
        if (!ok)
        {
            s.obstacles.pop_back();
            ++rejected;
        }
    }
    s.validate();
    return s;
}

MapAndModel build_map_and_model(const Scenario &s, int nx, int ny, int samples, std::uint64_t seed, unsigned threads)
{
    MapAndModel out;
    out.map = generate_map(s, nx, ny, samples, seed, threads);
    out.model = fit_model(out.map, s);
    return out;
}

} // namespace irsplan
