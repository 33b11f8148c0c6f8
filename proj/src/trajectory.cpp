// SPDX-License-Identifier: Apache-2.0
#include "irsplan/trajectory.hpp"

#include "irsplan/error.hpp"

#include <cmath>
#include <string>

namespace irsplan
{

double slot_energy(double dist, const MotionConstants &c, double delta_t)
{
    return c.c1 * dist * dist / delta_t + c.c2 * dist + c.c3 * delta_t;
}

double motion_energy(const Path &q, const MotionConstants &c, double delta_t)
{
    if (q.size() < 2)
    {
        throw DomainError("motion energy needs at least two positions");
    }
    double e = 0.0;
    for (std::size_t k = 1; k < q.size(); ++k)
    {
        e += slot_energy((q[k] - q[k - 1]).norm(), c, delta_t);
    }
    return e;
}

double avg_model_rate(const SnrModel &m, const Scenario &s, const Path &q)
{
    if (q.size() < 2)
    {
        throw DomainError("average rate needs at least two positions");
    }
    double sum = 0.0;
    for (const auto &p : q)
    {
        sum += model_rate(m, s.dist_irs(p), s.dist_ap(p), s.radio.tx_power_w, s.radio.noise_power_w,
                          s.radio.bandwidth_hz);
    }
    return sum / static_cast<double>(q.size() - 1);
}

double avg_map_rate(const RadioMap &map, const Scenario &s, const Path &q)
{
    if (q.size() < 2)
    {
        throw DomainError("average rate needs at least two positions");
    }
    double sum = 0.0;
    for (const auto &p : q)
    {
        sum += query_rate(map, s, p);
    }
    return sum / static_cast<double>(q.size() - 1);
}

Trajectory evaluate(const Scenario &s, const SnrModel *m, const RadioMap *map, const Path &q)
{
    if (q.size() < 2)
    {
        throw DomainError("trajectory needs at least two positions");
    }
    Trajectory t;
    t.positions = q;
    const int K = t.K();
    t.step_len.resize(K);
    t.slot_energy.resize(K);
    for (int k = 1; k <= K; ++k)
    {
        t.step_len[k - 1] = (q[k] - q[k - 1]).norm();
        t.slot_energy[k - 1] = slot_energy(t.step_len[k - 1], s.motion, s.delta_t);
        t.energy_j += t.slot_energy[k - 1];
    }
    if (m)
    {
        double sum = 0.0;
        for (const auto &p : q)
        {
            t.rates_model.push_back(model_rate(*m, s.dist_irs(p), s.dist_ap(p), s.radio.tx_power_w,
                                               s.radio.noise_power_w, s.radio.bandwidth_hz));
            sum += t.rates_model.back();
        }
        t.avg_rate_model = sum / K;
    }
    if (map)
    {
        double sum = 0.0;
        for (const auto &p : q)
        {
            t.rates_map.push_back(query_rate(*map, s, p));
            sum += t.rates_map.back();
        }
        t.avg_rate_map = sum / K;
    }
    return t;
}

void check_trajectory(const Scenario &s, const Path &q, double tol)
{
    if (static_cast<int>(q.size()) != s.K + 1)
    {
        throw InvariantError("positions", "expected " + std::to_string(s.K + 1) + " positions");
    }
    if ((q.front() - s.q_s).norm() > tol)
    {
        throw InvariantError("positions[0]", "does not match the start");
    }
    if ((q.back() - s.q_d).norm() > tol)
    {
        throw InvariantError("positions[K]", "does not match the goal");
    }
    for (std::size_t k = 1; k < q.size(); ++k)
    {
        if ((q[k] - q[k - 1]).norm() > s.d_max() + tol)
        {
            throw InvariantError("positions[" + std::to_string(k) + "]", "step exceeds the maximum distance");
        }
    }
    for (std::size_t k = 0; k < q.size(); ++k)
    {
        if (collides(s, q[k], s.d_s))
        {
            throw InvariantError("positions[" + std::to_string(k) + "]", "collides at the safety margin");
        }
    }
}

} // namespace irsplan
