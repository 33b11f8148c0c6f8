// SPDX-License-Identifier: Apache-2.0
#include "irsplan/io.hpp"

#include "irsplan/error.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace irsplan::io
{

namespace
{

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line)
    {
        if (c == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else if (c != '\r')
        {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// Data lines after checking the header; throws ParseError with the line number.
std::vector<std::vector<std::string>> table(const std::string &text, const std::string &header)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split(line) != split(header))
    {
        throw ParseError("expected header '" + header + "'", 1);
    }
    const auto width = split(header).size();
    std::vector<std::vector<std::string>> rows;
    int n = 1;
    while (std::getline(in, line))
    {
        ++n;
        if (line.empty())
        {
            continue;
        }
        auto f = split(line);
        if (f.size() != width)
        {
            throw ParseError("expected " + std::to_string(width) + " fields", n);
        }
        rows.push_back(std::move(f));
    }
    return rows;
}

double to_double(const std::string &f)
{
    if (f.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (r.ec != std::errc() || r.ptr != f.data() + f.size())
    {
        throw ParseError("bad number '" + f + "'");
    }
    return v;
}

template <typename Int>
Int to_int(const std::string &f)
{
    Int v = 0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (r.ec != std::errc() || r.ptr != f.data() + f.size())
    {
        throw ParseError("bad integer '" + f + "'");
    }
    return v;
}

const char *kTrajectoryHeader = "k,x,y,step_len,slot_energy,rate_model,rate_map";
const char *kTraceHeader = "iteration,energy,accepted,shrunk_k,avg_rate_map,solver_status";
const char *kAggregateHeader = "M,K,r_min,seed,method,energy,avg_rate_map,iterations,status";

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
    {
        return "";
    }
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string trajectory_csv(const Trajectory &t)
{
    std::string out = std::string(kTrajectoryHeader) + "\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k <= t.K(); ++k)
    {
        const double step = k > 0 ? t.step_len[k - 1] : 0.0;
        const double e = k > 0 ? t.slot_energy[k - 1] : 0.0;
        const double rm = t.rates_model.empty() ? nan : t.rates_model[k];
        const double rp = t.rates_map.empty() ? nan : t.rates_map[k];
        out += std::to_string(k) + "," + format_number(t.positions[k].x()) + "," + format_number(t.positions[k].y()) +
               "," + format_number(step) + "," + format_number(e) + "," + format_number(rm) + "," +
               format_number(rp) + "\n";
    }
    return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(const std::string &text)
{
    std::vector<TrajectoryRow> rows;
    for (const auto &f : table(text, kTrajectoryHeader))
    {
        TrajectoryRow r;
        r.k = to_int<int>(f[0]);
        r.x = to_double(f[1]);
        r.y = to_double(f[2]);
        r.step_len = to_double(f[3]);
        r.slot_energy = to_double(f[4]);
        r.rate_model = to_double(f[5]);
        r.rate_map = to_double(f[6]);
        rows.push_back(r);
    }
    return rows;
}

std::string trace_csv(const RmapTrace &t)
{
    std::string out = std::string(kTraceHeader) + "\n";
    for (const auto &r : t.records)
    {
        out += std::to_string(r.iteration) + "," + format_number(r.energy) + "," + (r.accepted ? "1" : "0") + "," +
               std::to_string(r.shrunk_k) + "," + format_number(r.avg_rate_map) + "," + r.solver_status + "\n";
    }
    return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string &text)
{
    std::vector<TraceRow> rows;
    for (const auto &f : table(text, kTraceHeader))
    {
        TraceRow r;
        r.iteration = to_int<int>(f[0]);
        r.energy = to_double(f[1]);
        r.accepted = to_int<int>(f[2]) != 0;
        r.shrunk_k = to_int<int>(f[3]);
        r.avg_rate_map = to_double(f[4]);
        r.solver_status = f[5];
        rows.push_back(r);
    }
    return rows;
}

std::string aggregate_header()
{
    return std::string(kAggregateHeader) + "\n";
}

std::string aggregate_line(const AggregateRow &r)
{
    return std::to_string(r.M) + "," + std::to_string(r.K) + "," + format_number(r.r_min) + "," +
           std::to_string(r.seed) + "," + r.method + "," + format_number(r.energy) + "," +
           format_number(r.avg_rate_map) + "," + std::to_string(r.iterations) + "," + r.status + "\n";
}

std::vector<AggregateRow> parse_aggregate_csv(const std::string &text)
{
    std::vector<AggregateRow> rows;
    for (const auto &f : table(text, kAggregateHeader))
    {
        AggregateRow r;
        r.M = to_int<int>(f[0]);
        r.K = to_int<int>(f[1]);
        r.r_min = to_double(f[2]);
        r.seed = to_int<std::uint64_t>(f[3]);
        r.method = f[4];
        r.energy = to_double(f[5]);
        r.avg_rate_map = to_double(f[6]);
        r.iterations = to_int<int>(f[7]);
        r.status = f[8];
        rows.push_back(r);
    }
    return rows;
}

std::string scenario_svg(const Scenario &s, const RadioMap *map, const std::vector<SvgPath> &paths)
{
    const double px = 20.0; // pixels per meter
    const double W = s.area_width_m * px, H = s.area_height_m * px;
    auto X = [&](double x) { return format_number(std::round(x * px * 100.0) / 100.0); };
    auto Y = [&](double y) { return format_number(std::round((s.area_height_m - y) * px * 100.0) / 100.0); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\" stroke=\"black\"/>\n";
    if (map)
    {
        o << "<g id=\"los\">\n";
        for (int j = 0; j < map->ny; ++j)
        {
            for (int i = 0; i < map->nx; ++i)
            {
                const auto c = map->index(i, j);
                const bool ap = map->los_ap[c], irs = map->los_irs[c];
                if (ap && irs)
                {
                    continue;
                }
                const char *fill = !ap && !irs ? "#909090" : (!ap ? "#c8c8c8" : "#e6e6f5");
                o << "<rect x=\"" << X(i * map->cell_w) << "\" y=\"" << Y((j + 1) * map->cell_h) << "\" width=\""
                  << X(map->cell_w) << "\" height=\"" << X(map->cell_h) << "\" fill=\"" << fill << "\"/>\n";
            }
        }
        o << "</g>\n";
    }
    o << "<g id=\"obstacles\">\n";
    for (const auto &ob : s.obstacles)
    {
        Eigen::SelfAdjointEigenSolver<Mat2> es(ob.shape);
        const Vec2 ax = es.eigenvectors().col(1);
        const double angle = -std::atan2(ax.y(), ax.x()) * 180.0 / M_PI;
        o << "<ellipse cx=\"" << X(ob.center.x()) << "\" cy=\"" << Y(ob.center.y()) << "\" rx=\""
          << X(std::sqrt(es.eigenvalues()[1])) << "\" ry=\"" << X(std::sqrt(es.eigenvalues()[0]))
          << "\" transform=\"rotate(" << format_number(std::round(angle * 100.0) / 100.0) << ' ' << X(ob.center.x())
          << ' ' << Y(ob.center.y()) << ")\" fill=\"#804020\" fill-opacity=\"0.7\"/>\n";
    }
    o << "</g>\n";
    o << "<circle id=\"ap\" cx=\"" << X(s.q_a.x()) << "\" cy=\"" << Y(s.q_a.y()) << "\" r=\"6\" fill=\"red\"/>\n";
    o << "<rect id=\"irs\" x=\"" << X(s.q_i.x() - 1.0) << "\" y=\"" << Y(s.q_i.y() + 0.3) << "\" width=\"" << X(2.0)
      << "\" height=\"" << X(0.3) << "\" fill=\"blue\"/>\n";
    for (const auto &p : paths)
    {
        o << "<polyline class=\"trajectory\" data-label=\"" << p.label << "\" fill=\"none\" stroke=\""
          << (p.color.empty() ? "black" : p.color) << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < p.positions.size(); ++k)
        {
            o << (k ? " " : "") << X(p.positions[k].x()) << ',' << Y(p.positions[k].y());
        }
        o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw IoError("cannot write '" + path + "'");
    }
    out << text;
    if (!out)
    {
        throw IoError("failed writing '" + path + "'");
    }
}

std::string read_text(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace irsplan::io
