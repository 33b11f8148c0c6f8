// SPDX-License-Identifier: Apache-2.0
#include "irsplan/graph.hpp"

#include "irsplan/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irsplan
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

int nearest(const std::vector<Vec2> &pts, const Vec2 &q)
{
    int best = -1;
    double bd = kInf;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
    {
        const double d = (pts[i] - q).squaredNorm();
        if (d < bd)
        {
            bd = d;
            best = i;
        }
    }
    return best;
}

} // namespace

const char *to_string(InitMode m)
{
    return m == InitMode::MinEnergy ? "ME" : "MR";
}

TimeExpandedGraph build_lattice(const Scenario &s, double grid_step)
{
    const double dmax = s.d_max();
    if (grid_step == 0.0)
    {
        grid_step = dmax / 2.0;
    }
    if (!(grid_step > 0.0) || grid_step > dmax)
    {
        throw DomainError("grid step must lie in (0, D_max]");
    }
    TimeExpandedGraph g;
    g.K = s.K;
    g.step = grid_step;
    g.nx = static_cast<int>(std::floor(s.area_width_m / grid_step + 1e-9)) + 1;
    g.ny = static_cast<int>(std::floor(s.area_height_m / grid_step + 1e-9)) + 1;

    std::vector<int> node_of(static_cast<std::size_t>(g.nx) * g.ny, -1);
    for (int j = 0; j < g.ny; ++j)
    {
        for (int i = 0; i < g.nx; ++i)
        {
            const Vec2 q(i * grid_step, j * grid_step);
            if (!collides(s, q, s.d_s))
            {
                node_of[static_cast<std::size_t>(j) * g.nx + i] = static_cast<int>(g.lattice.size());
                g.lattice.push_back(q);
                g.lattice_id.push_back(j * g.nx + i);
            }
        }
    }
    if (g.lattice.empty())
    {
        throw NoPathError("no collision-free lattice node");
    }
    g.start = nearest(g.lattice, s.q_s);
    g.goal = nearest(g.lattice, s.q_d);
    if (g.start == g.goal && (s.q_s - s.q_d).norm() > 0.0)
    {
        throw NoPathError("start and goal share the nearest lattice node; use a finer grid");
    }
    g.position = g.lattice;
    g.position[g.start] = s.q_s;
    g.position[g.goal] = s.q_d;

    g.adj.resize(g.lattice.size());
    for (int v = 0; v < g.size(); ++v)
    {
        const int i = g.lattice_id[v] % g.nx;
        const int j = g.lattice_id[v] / g.nx;
        for (int dj = -1; dj <= 1; ++dj)
        {
            for (int di = -1; di <= 1; ++di)
            {
                const int ii = i + di, jj = j + dj;
                if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny)
                {
                    continue;
                }
                const int u = node_of[static_cast<std::size_t>(jj) * g.nx + ii];
                if (u >= 0 && (g.position[u] - g.position[v]).norm() <= dmax)
                {
                    g.adj[v].push_back(u);
                }
            }
        }
        std::sort(g.adj[v].begin(), g.adj[v].end());
    }
    return g;
}

int min_slots(const TimeExpandedGraph &g)
{
    std::vector<int> dist(g.size(), -1);
    std::vector<int> queue{g.start};
    dist[g.start] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
    {
        const int u = queue[h];
        for (int v : g.adj[u])
        {
            if (dist[v] < 0)
            {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist[g.goal];
}

TimeExpandedGraph build_graph(const Scenario &s, const RadioMap &map, double grid_step)
{
    TimeExpandedGraph g = build_lattice(s, grid_step);
    g.rate.resize(g.lattice.size());
    for (int v = 0; v < g.size(); ++v)
    {
        g.rate[v] = query_rate(map, s, g.position[v]);
    }
    return g;
}

Path initial_path(const Scenario &s, const TimeExpandedGraph &g, InitMode mode)
{
    const int V = g.size();
    const double r_ub = *std::max_element(g.rate.begin(), g.rate.end());
    auto edge_cost = [&](int u, int v) {
        if (mode == InitMode::MinEnergy)
        {
            return slot_energy((g.position[v] - g.position[u]).norm(), s.motion, s.delta_t);
        }
        return r_ub - g.rate[v];
    };

    std::vector<double> cost(V, kInf), next(V);
    std::vector<std::vector<int>> pred(g.K + 1, std::vector<int>(V, -1));
    cost[g.start] = mode == InitMode::MinEnergy ? 0.0 : r_ub - g.rate[g.start];
    for (int k = 1; k <= g.K; ++k)
    {
        std::fill(next.begin(), next.end(), kInf);
        // Nodes are visited in ascending order and adjacency is sorted, so a strict
        // comparison keeps the smallest predecessor index on ties.
        for (int u = 0; u < V; ++u)
        {
            if (cost[u] == kInf)
            {
                continue;
            }
            for (int v : g.adj[u])
            {
                const double c = cost[u] + edge_cost(u, v);
                if (c < next[v])
                {
                    next[v] = c;
                    pred[k][v] = u;
                }
            }
        }
        cost.swap(next);
    }
    if (cost[g.goal] == kInf)
    {
        throw NoPathError("goal not reachable within the slot budget");
    }
    Path out(g.K + 1);
    int v = g.goal;
    for (int k = g.K; k >= 0; --k)
    {
        out[k] = g.position[v];
        if (k > 0)
        {
            v = pred[k][v];
        }
    }
    check_trajectory(s, out);
    return out;
}

InitialChoice select_initial(const Scenario &s, const RadioMap &map, const Path &me, const Path &mr, double r_min)
{
    InitialChoice c;
    c.me_rate = avg_map_rate(map, s, me);
    c.mr_rate = avg_map_rate(map, s, mr);
    if (c.me_rate >= r_min)
    {
        c.mode = InitMode::MinEnergy;
        c.positions = me;
    }
    else if (c.mr_rate >= r_min)
    {
        c.mode = InitMode::MaxRate;
        c.positions = mr;
    }
    else
    {
        throw InfeasibleError("no initial trajectory reaches the required average rate (ME " +
                                  std::to_string(c.me_rate) + " bit/s, MR " + std::to_string(c.mr_rate) +
                                  " bit/s)",
                              c.me_rate, c.mr_rate);
    }
    return c;
}

} // namespace irsplan
