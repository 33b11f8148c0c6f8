// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/scenario.hpp"
#include "irsplan/snr_model.hpp"

#include <vector>

namespace irsplan
{

using Path = std::vector<Vec2>;

/// K+1 positions with the derived per-slot and per-position quantities.
struct Trajectory
{
    Path positions;
    double energy_j = 0.0;
    std::vector<double> step_len;    ///< K entries, slot k-1 -> k
    std::vector<double> slot_energy; ///< K entries
    std::vector<double> rates_model; ///< K+1 entries [bit/s], empty without a model
    std::vector<double> rates_map;   ///< K+1 entries [bit/s], empty without a map
    double avg_rate_model = 0.0;
    double avg_rate_map = 0.0;

    int K() const { return static_cast<int>(positions.size()) - 1; }
};

/// Energy of one slot moving `dist` meters.
double slot_energy(double dist, const MotionConstants &c, double delta_t);

/// Sum of slot energies over consecutive positions. Needs at least two positions.
double motion_energy(const Path &positions, const MotionConstants &c, double delta_t);

/// (B_w / K) sum_{k=0..K} log2(1 + model_snr) over K+1 positions.
double avg_model_rate(const SnrModel &m, const Scenario &s, const Path &positions);

/// Same 1/K convention on interpolated map rates.
double avg_map_rate(const RadioMap &map, const Scenario &s, const Path &positions);

/// Fills every derived field; model and map may be null.
Trajectory evaluate(const Scenario &s, const SnrModel *m, const RadioMap *map, const Path &positions);

/// Throws InvariantError unless endpoints match, steps are at most D_max + tol
/// and no position collides at margin d_s.
void check_trajectory(const Scenario &s, const Path &positions, double tol = 1e-9);

} // namespace irsplan
