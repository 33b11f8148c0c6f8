// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/scenario.hpp"
#include "irsplan/trajectory.hpp"

#include <vector>

namespace irsplan
{

/// Collision-free lattice replicated over K+1 time layers.
///
/// The node nearest to the start (goal) carries the exact start (goal)
/// position, so paths read off the graph begin and end at q_s and q_d.
/// Layer 0 holds only the start node and layer K only the goal node.
struct TimeExpandedGraph
{
    int K = 0;
    double step = 0.0;
    int nx = 0; ///< lattice columns
    int ny = 0; ///< lattice rows
    std::vector<Vec2> lattice;    ///< lattice point of each node
    std::vector<Vec2> position;   ///< effective position (lattice point, or q_s / q_d)
    std::vector<int> lattice_id;  ///< row-major lattice index of each node
    std::vector<std::vector<int>> adj; ///< successors incl. self, ascending, length <= D_max
    std::vector<double> rate;     ///< map rate at the effective position [bit/s]
    int start = -1;
    int goal = -1;

    int size() const { return static_cast<int>(position.size()); }
};

/// Lattice part of build_graph; rates are left empty.
TimeExpandedGraph build_lattice(const Scenario &s, double grid_step = 0.0);

/// Fewest slots needed to reach the goal node from the start node, or -1.
int min_slots(const TimeExpandedGraph &g);

/// Lattice with spacing `grid_step` (0 selects D_max / 2), 8-neighbour moves
/// plus stays. Throws DomainError when grid_step exceeds D_max and
/// NoPathError when the start or goal has no collision-free node.
TimeExpandedGraph build_graph(const Scenario &s, const RadioMap &map, double grid_step = 0.0);

enum class InitMode
{
    MinEnergy,
    MaxRate,
};

const char *to_string(InitMode m);

/// Shortest layered path: slot energy (MinEnergy) or r_ub - rate(destination)
/// (MaxRate, the start rate counted once). Ties go to the smallest node index.
/// Throws NoPathError when the goal cannot be reached in K slots.
Path initial_path(const Scenario &s, const TimeExpandedGraph &g, InitMode mode);

struct InitialChoice
{
    InitMode mode = InitMode::MinEnergy;
    Path positions;
    double me_rate = 0.0; ///< map average rate of the ME path
    double mr_rate = 0.0; ///< map average rate of the MR path
};

/// ME when its map average rate reaches r_min, otherwise MR when it does,
/// otherwise InfeasibleError carrying both rates.
InitialChoice select_initial(const Scenario &s, const RadioMap &map, const Path &me, const Path &mr, double r_min);

} // namespace irsplan
