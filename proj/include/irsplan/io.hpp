// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/rmap.hpp"
#include "irsplan/scenario.hpp"
#include "irsplan/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace irsplan::io
{

/// Shortest round-trip decimal form; NaN is written as an empty field.
std::string format_number(double v);

// Trajectory CSV: k,x,y,step_len,slot_energy,rate_model,rate_map
struct TrajectoryRow
{
    int k = 0;
    double x = 0, y = 0, step_len = 0, slot_energy = 0, rate_model = 0, rate_map = 0;
};
std::string trajectory_csv(const Trajectory &t);
std::vector<TrajectoryRow> parse_trajectory_csv(const std::string &text);

// Trace CSV: iteration,energy,accepted,shrunk_k,avg_rate_map,solver_status
struct TraceRow
{
    int iteration = 0;
    double energy = 0;
    bool accepted = false;
    int shrunk_k = -1;
    double avg_rate_map = 0;
    std::string solver_status;
};
std::string trace_csv(const RmapTrace &t);
std::vector<TraceRow> parse_trace_csv(const std::string &text);

// Aggregate CSV: M,K,r_min,seed,method,energy,avg_rate_map,iterations,status
struct AggregateRow
{
    int M = 0;
    int K = 0;
    double r_min = 0;
    std::uint64_t seed = 0;
    std::string method;
    double energy = 0;
    double avg_rate_map = 0;
    int iterations = 0;
    std::string status;
};
std::string aggregate_header();
std::string aggregate_line(const AggregateRow &r);
std::vector<AggregateRow> parse_aggregate_csv(const std::string &text);

struct SvgPath
{
    std::string label;
    Path positions;
    std::string color;
};

/// Scenario overlay: area, LOS shading from the map masks (when given),
/// obstacles, AP and IRS, and one polyline per path.
std::string scenario_svg(const Scenario &s, const RadioMap *map, const std::vector<SvgPath> &paths);

void write_text(const std::string &path, const std::string &text);
std::string read_text(const std::string &path);

} // namespace irsplan::io
