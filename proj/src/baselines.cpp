// SPDX-License-Identifier: Apache-2.0
#include "irsplan/baselines.hpp"

#include "irsplan/error.hpp"

#include <cmath>

namespace irsplan
{

BaselineResult max_rate_trajectory(const Scenario &s, const SnrModel &m, const RadioMap &map, const Path &init,
                                   const RmapConfig &cfg)
{
    cfg.validate();
    check_trajectory(s, init);
    Path inc = init;
    double obj = avg_model_rate(m, s, inc);

    TrustRegionState tr;
    tr.T.assign(s.K + 1, cfg.t_init);
    tr.tau = cfg.tau;

    BaselineResult out;
    RmapTrace &trace = out.trace;
    trace.initial_energy = motion_energy(inc, s.motion, s.delta_t);
    trace.initial_objective = obj;
    trace.stop_reason = "n_it_max";
    double E = trace.initial_energy;
    double avg_map = avg_map_rate(map, s, inc);

    for (int j = 1; j <= cfg.n_it_max; ++j)
    {
        RmapIteration rec;
        rec.iteration = j;
        rec.energy = E;
        rec.avg_rate_map = avg_map;
        rec.objective = obj;

        const P4 p4 = build_p4(s, m, inc, tr, 0.0, P4Goal::MaxRate);
        const auto res = socp::solve(p4.program, cfg.solver);
        rec.solver_status = socp::to_string(res.status);
        if (res.status != socp::Status::Optimal && res.status != socp::Status::Inaccurate)
        {
            trace.records.push_back(rec);
            trace.stop_reason = "solver_failure";
            break;
        }
        const Path cand = extract_positions(s, p4, res.x);
        try
        {
            check_trajectory(s, cand);
        }
        catch (const InvariantError &)
        {
            rec.solver_status += "/invalid";
            trace.records.push_back(rec);
            trace.stop_reason = "solver_failure";
            break;
        }
        const double cand_obj = avg_model_rate(m, s, cand);
        if (cand_obj < obj)
        {
            trace.records.push_back(rec);
            trace.stop_reason = "no_ascent";
            break;
        }
        const double rel = obj > 0.0 ? (cand_obj - obj) / obj : 0.0;
        inc = cand;
        obj = cand_obj;
        E = motion_energy(inc, s.motion, s.delta_t);
        avg_map = avg_map_rate(map, s, inc);
        rec.accepted = true;
        rec.energy = E;
        rec.avg_rate_map = avg_map;
        rec.objective = obj;
        trace.records.push_back(rec);
        if (rel <= cfg.epsilon)
        {
            trace.stop_reason = "epsilon";
            break;
        }
    }
    out.trajectory = evaluate(s, &m, &map, inc);
    out.meets_rate = out.trajectory.avg_rate_map >= cfg.r_min;
    return out;
}

LowerBound lower_bound(const Scenario &s, const socp::SolveOptions &opt)
{
    const int K = s.K;
    P4Layout L;
    L.K = K;
    L.has_energy = true;
    L.has_rate = false;
    socp::ConeProgram p(L.n_vars());
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    for (int k = 1; k <= K; ++k)
    {
        const std::vector<std::pair<int, double>> dx{{L.x(k), 1.0}, {L.x(k - 1), -1.0}};
        const std::vector<std::pair<int, double>> dy{{L.y(k), 1.0}, {L.y(k - 1), -1.0}};
        const std::vector<std::pair<int, double>> dx2{{L.x(k), 2.0}, {L.x(k - 1), -2.0}};
        const std::vector<std::pair<int, double>> dy2{{L.y(k), 2.0}, {L.y(k - 1), -2.0}};
        p.objective[L.len(k)] = s.motion.c2;
        p.objective[L.sq(k)] = s.motion.c1 / s.delta_t;
        p.add_soc({dx, dy}, zero2, {}, s.d_max());
        p.add_soc({dx, dy}, zero2, {{L.len(k), 1.0}}, 0.0);
        Eigen::VectorXd b(3);
        b << 0.0, 0.0, -1.0;
        p.add_soc({dx2, dy2, {{L.sq(k), 1.0}}}, b, {{L.sq(k), 1.0}}, 1.0);
    }
    p.objective_constant = K * s.motion.c3 * s.delta_t;
    p.add_equality({{L.x(0), 1.0}}, s.q_s.x());
    p.add_equality({{L.y(0), 1.0}}, s.q_s.y());
    p.add_equality({{L.x(K), 1.0}}, s.q_d.x());
    p.add_equality({{L.y(K), 1.0}}, s.q_d.y());

    const auto res = socp::solve(p, opt);
    LowerBound lb;
    lb.status = res.status;
    if (res.status != socp::Status::Optimal && res.status != socp::Status::Inaccurate)
    {
        throw DomainError(std::string("lower bound solve ended with status ") + socp::to_string(res.status));
    }
    lb.positions.resize(K + 1);
    for (int k = 0; k <= K; ++k)
    {
        lb.positions[k] = Vec2(res.x[L.x(k)], res.x[L.y(k)]);
    }
    lb.positions.front() = s.q_s;
    lb.positions.back() = s.q_d;
    // Reported energy is the exact motion energy of the returned positions.
    lb.energy = motion_energy(lb.positions, s.motion, s.delta_t);
    return lb;
}

} // namespace irsplan
