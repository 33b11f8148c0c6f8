// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/baselines.hpp"
#include "irsplan/graph.hpp"
#include "irsplan/rmap.hpp"

#include <cstdint>

namespace irsplan
{

struct PlanOutcome
{
    Path me;
    Path mr;
    InitialChoice choice;
    RmapResult rmap;
};

/// Graph initial solutions, selection against cfg.r_min, then RMAP.
/// Throws InfeasibleError when neither initial path meets the rate.
PlanOutcome plan(const Scenario &s, const SnrModel &m, const RadioMap &map, const RmapConfig &cfg,
                 double grid_step = 0.0);

/// Max-rate baseline started from the MR graph path.
BaselineResult plan_max_rate(const Scenario &s, const SnrModel &m, const RadioMap &map, const RmapConfig &cfg,
                             double grid_step = 0.0);

/// Copy of `base` with `count` axis-aligned elliptic obstacles (6 m x 4 m
/// footprint, 2 m tall) at uniformly drawn centers. Placements covering the
/// start or goal, or cutting the lattice path between them within K slots,
/// are redrawn. Throws DomainError after too many rejections.
Scenario random_obstacle_scenario(const Scenario &base, int count, std::uint64_t seed);

struct MapAndModel
{
    RadioMap map;
    SnrModel model;
};

MapAndModel build_map_and_model(const Scenario &s, int nx, int ny, int samples, std::uint64_t seed,
                                unsigned threads = 0);

} // namespace irsplan
