// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/rmap.hpp"

namespace irsplan
{

struct BaselineResult
{
    Trajectory trajectory;
    RmapTrace trace;        ///< `objective` holds the model average rate of the incumbent
    bool meets_rate = false; ///< map average rate >= cfg.r_min
};

/// Successive convex maximization of the average-rate surrogate with a fixed
/// trust radius cfg.t_init, stopping on cfg.epsilon relative improvement of
/// the model average rate. cfg.r_min is only used to fill meets_rate.
BaselineResult max_rate_trajectory(const Scenario &s, const SnrModel &m, const RadioMap &map, const Path &init,
                                   const RmapConfig &cfg);

struct LowerBound
{
    double energy = 0.0;
    Path positions;
    socp::Status status = socp::Status::MaxIter;
};

/// Minimum motion energy with only the step and endpoint constraints.
/// Throws DomainError when the solver does not reach an optimum.
LowerBound lower_bound(const Scenario &s, const socp::SolveOptions &opt = {});

} // namespace irsplan
