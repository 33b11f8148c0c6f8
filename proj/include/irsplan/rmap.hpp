// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/scenario.hpp"
#include "irsplan/snr_model.hpp"
#include "irsplan/socp.hpp"
#include "irsplan/trajectory.hpp"

#include <string>
#include <vector>

namespace irsplan
{

struct TrustRegionState
{
    std::vector<double> T; ///< K+1 radii [m]
    double tau = 0.5;      ///< shrink factor in [0, 1)

    /// Throws InvariantError on a negative radius or tau outside [0, 1).
    void validate() const;
};

struct RmapConfig
{
    double epsilon = 0.01;
    int n_it_max = 100;
    double tau = 0.5;
    double t_init = 1.0; ///< [m]
    double r_min = 0.0;  ///< [bit/s]
    socp::SolveOptions solver;

    void validate() const;
};

struct RmapIteration
{
    int iteration = 0;
    double energy = 0.0;           ///< incumbent energy after this iteration
    bool accepted = false;
    int shrunk_k = -1;             ///< -1 when no radius was shrunk
    double avg_rate_map = 0.0;     ///< candidate map average (incumbent's when no candidate)
    std::string solver_status;
    double objective = 0.0;        ///< incumbent model average rate (used by the max-rate baseline)
};

struct RmapTrace
{
    double initial_energy = 0.0;
    double initial_objective = 0.0;
    std::vector<RmapIteration> records;
    std::string stop_reason;

    /// True iff accepted energies never increase by more than tol.
    bool monotone(double tol = 1e-9) const;
};

struct RmapResult
{
    Trajectory trajectory;
    RmapTrace trace;
};

/// Variable layout of the convexified subproblem: positions, then the
/// per-slot length and squared-length epigraphs, then the distance epigraphs.
struct P4Layout
{
    int K = 0;
    bool has_energy = true;
    bool has_rate = false;

    int x(int k) const { return 2 * k; }
    int y(int k) const { return 2 * k + 1; }
    int len(int k) const { return 2 * (K + 1) + (k - 1); }      ///< k = 1..K
    int sq(int k) const { return 2 * (K + 1) + K + (k - 1); }   ///< k = 1..K
    int dist_ap(int k) const { return rate_base() + k; }         ///< k = 0..K
    int dist_irs(int k) const { return rate_base() + K + 1 + k; } ///< k = 0..K
    int n_vars() const { return rate_base() + (has_rate ? 2 * (K + 1) : 0); }

private:
    int rate_base() const { return 2 * (K + 1) + (has_energy ? 2 * K : 0); }
};

struct P4
{
    socp::ConeProgram program;
    P4Layout layout;
    double rate_rhs = 0.0; ///< right side of the lowered rate constraint [bit/s/Hz]
};

enum class P4Goal
{
    MinEnergy, ///< energy objective with optional rate constraint
    MaxRate,   ///< maximize the surrogate average rate, no energy term
};

/// Convexified subproblem around `incumbent`. The rate constraint is added when
/// r_min > 0 and the goal is MinEnergy. Interior positions are boxed to the
/// area. Obstacles use the first-order lower bound
/// of the quadratic form with right side d_s.
P4 build_p4(const Scenario &s, const SnrModel &m, const Path &incumbent, const TrustRegionState &tr, double r_min,
            P4Goal goal = P4Goal::MinEnergy);

/// Positions of a P4 solution with endpoints snapped to q_s, q_d.
Path extract_positions(const Scenario &s, const P4 &p4, const Eigen::VectorXd &x);

/// Per-point first-order surrogate r0 + g_i (d_i(q) - d_i0) + g_a (d_a(q) - d_a0) [bit/s].
double surrogate_rate(const SnrModel &m, const Scenario &s, const Vec2 &q0, const Vec2 &q);
/// (1/K) sum of per-point surrogates.
double avg_surrogate_rate(const SnrModel &m, const Scenario &s, const Path &q0, const Path &q);
/// Closed-form Hessian of the per-point surrogate with respect to (x, y).
Eigen::Matrix2d surrogate_hessian(const SnrModel &m, const Scenario &s, const Vec2 &q0, const Vec2 &q);
/// Gradient of the per-point model rate with respect to (x, y).
Vec2 rate_position_gradient(const SnrModel &m, const Scenario &s, const Vec2 &q);

/// f(q0) + 2 (q0 - c)^T P^-1 (q - q0), a lower bound of the quadratic form at q.
double obstacle_linearization(const Obstacle &o, const Vec2 &q0, const Vec2 &q);

/// Interior index with the largest rate drop before[k] - after[k]; ties go to the smallest k.
int max_drop_index(const std::vector<double> &before, const std::vector<double> &after);

/// Radio-map-assisted successive convex planning from a map-feasible start.
RmapResult run_rmap(const Scenario &s, const SnrModel &m, const RadioMap &map, const Path &init,
                    const RmapConfig &cfg);

} // namespace irsplan
