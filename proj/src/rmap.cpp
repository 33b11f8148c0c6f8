// SPDX-License-Identifier: Apache-2.0
#include "irsplan/rmap.hpp"

#include "irsplan/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irsplan
{

namespace
{

/// Absolute slack kept on the step and obstacle constraints so that solver
/// round-off never breaks the exact trajectory invariants.
constexpr double kStepMargin = 1e-7;
constexpr double kObstacleMargin = 1e-7;
/// Radii below this pin the position with equalities.
constexpr double kFixedRadius = 1e-12;
constexpr double kCollapsedRadius = 1e-6;

struct PointRate
{
    double d_i, d_a, r0;
    RateGradient g;
};

PointRate point_rate(const SnrModel &m, const Scenario &s, const Vec2 &q)
{
    PointRate p;
    p.d_i = s.dist_irs(q);
    p.d_a = s.dist_ap(q);
    const auto &r = s.radio;
    p.r0 = model_rate(m, p.d_i, p.d_a, r.tx_power_w, r.noise_power_w, r.bandwidth_hz);
    p.g = rate_gradient(m, p.d_i, p.d_a, r.tx_power_w, r.noise_power_w, r.bandwidth_hz);
    return p;
}

/// Hessian of ||(dz, q - c)|| with respect to q.
Eigen::Matrix2d distance_hessian(const Vec2 &q, const Vec2 &c, double dz)
{
    const Vec2 r = q - c;
    const double d = std::hypot(dz, r.norm());
    return (Eigen::Matrix2d::Identity() - r * r.transpose() / (d * d)) / d;
}

using Coeffs = std::vector<std::pair<int, double>>;

Coeffs diff(const P4Layout &L, int k, bool y_axis, double scale = 1.0)
{
    return y_axis ? Coeffs{{L.y(k), scale}, {L.y(k - 1), -scale}} : Coeffs{{L.x(k), scale}, {L.x(k - 1), -scale}};
}

} // namespace

void TrustRegionState::validate() const
{
    if (!(tau >= 0.0 && tau < 1.0))
    {
        throw InvariantError("tau", "must lie in [0, 1)");
    }
    for (std::size_t k = 0; k < T.size(); ++k)
    {
        if (!(T[k] >= 0.0))
        {
            throw InvariantError("T[" + std::to_string(k) + "]", "must be nonnegative");
        }
    }
}

void RmapConfig::validate() const
{
    if (!(epsilon > 0.0))
    {
        throw InvariantError("epsilon", "must be positive");
    }
    if (!(tau >= 0.0 && tau < 1.0))
    {
        throw InvariantError("tau", "must lie in [0, 1)");
    }
    if (!(t_init > 0.0))
    {
        throw InvariantError("t_init", "must be positive");
    }
    if (n_it_max < 1)
    {
        throw InvariantError("n_it_max", "must be at least 1");
    }
}

bool RmapTrace::monotone(double tol) const
{
    double prev = initial_energy;
    for (const auto &r : records)
    {
        if (r.accepted)
        {
            if (r.energy > prev + tol)
            {
                return false;
            }
            prev = r.energy;
        }
    }
    return true;
}

double surrogate_rate(const SnrModel &m, const Scenario &s, const Vec2 &q0, const Vec2 &q)
{
    const auto p = point_rate(m, s, q0);
    return p.r0 + p.g.d_i * (s.dist_irs(q) - p.d_i) + p.g.d_a * (s.dist_ap(q) - p.d_a);
}

double avg_surrogate_rate(const SnrModel &m, const Scenario &s, const Path &q0, const Path &q)
{
    if (q0.size() != q.size() || q.size() < 2)
    {
        throw DomainError("surrogate needs matching paths of at least two positions");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k)
    {
        sum += surrogate_rate(m, s, q0[k], q[k]);
    }
    return sum / static_cast<double>(q.size() - 1);
}

Eigen::Matrix2d surrogate_hessian(const SnrModel &m, const Scenario &s, const Vec2 &q0, const Vec2 &q)
{
    const auto p = point_rate(m, s, q0);
    return p.g.d_i * distance_hessian(q, s.q_i, s.z_r - s.z_i) + p.g.d_a * distance_hessian(q, s.q_a, s.z_r - s.z_a);
}

Vec2 rate_position_gradient(const SnrModel &m, const Scenario &s, const Vec2 &q)
{
    const auto p = point_rate(m, s, q);
    return p.g.d_i * (q - s.q_i) / p.d_i + p.g.d_a * (q - s.q_a) / p.d_a;
}

double obstacle_linearization(const Obstacle &o, const Vec2 &q0, const Vec2 &q)
{
    const Vec2 g = 2.0 * o.shape_inverse() * (q0 - o.center);
    return o.quadratic_form(q0) + g.dot(q - q0);
}

P4 build_p4(const Scenario &s, const SnrModel &m, const Path &q0, const TrustRegionState &tr, double r_min,
            P4Goal goal)
{
    const int K = s.K;
    if (static_cast<int>(q0.size()) != K + 1 || static_cast<int>(tr.T.size()) != K + 1)
    {
        throw DomainError("incumbent and trust radii need K+1 entries");
    }
    tr.validate();
    P4 out;
    P4Layout &L = out.layout;
    L.K = K;
    L.has_energy = goal == P4Goal::MinEnergy;
    L.has_rate = goal == P4Goal::MaxRate || r_min > 0.0;
    socp::ConeProgram &p = out.program;
    p = socp::ConeProgram(L.n_vars());

    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    for (int k = 1; k <= K; ++k)
    {
        const Coeffs dx = diff(L, k, false), dy = diff(L, k, true);
        p.add_soc({dx, dy}, zero2, {}, s.d_max() - kStepMargin);
        if (L.has_energy)
        {
            p.objective[L.len(k)] = s.motion.c2;
            p.objective[L.sq(k)] = s.motion.c1 / s.delta_t;
            p.add_soc({dx, dy}, zero2, {{L.len(k), 1.0}}, 0.0);
            // ||dq||^2 <= t  <=>  ||(2 dq, t - 1)|| <= t + 1
            Eigen::VectorXd b(3);
            b << 0.0, 0.0, -1.0;
            p.add_soc({diff(L, k, false, 2.0), diff(L, k, true, 2.0), {{L.sq(k), 1.0}}}, b, {{L.sq(k), 1.0}}, 1.0);
        }
    }
    if (L.has_energy)
    {
        p.objective_constant = K * s.motion.c3 * s.delta_t;
    }

    p.add_equality({{L.x(0), 1.0}}, s.q_s.x());
    p.add_equality({{L.y(0), 1.0}}, s.q_s.y());
    p.add_equality({{L.x(K), 1.0}}, s.q_d.x());
    p.add_equality({{L.y(K), 1.0}}, s.q_d.y());

    for (int k = 1; k < K; ++k)
    {
        p.set_bounds(L.x(k), 0.0, s.area_width_m);
        p.set_bounds(L.y(k), 0.0, s.area_height_m);
        const double T = tr.T[k];
        if (T <= kFixedRadius)
        {
            p.add_equality({{L.x(k), 1.0}}, q0[k].x());
            p.add_equality({{L.y(k), 1.0}}, q0[k].y());
        }
        else
        {
            Eigen::VectorXd b(2);
            b << -q0[k].x(), -q0[k].y();
            p.add_soc({{{L.x(k), 1.0}}, {{L.y(k), 1.0}}}, b, {}, T);
        }
        for (const auto &o : s.obstacles)
        {
            const Vec2 g = 2.0 * o.shape_inverse() * (q0[k] - o.center);
            const double f0 = o.quadratic_form(q0[k]);
            const double need = s.d_s + kObstacleMargin;
            // Implied by the trust region: the half-plane cannot be reached.
            if (T > kFixedRadius && f0 - g.norm() * T >= need)
            {
                continue;
            }
            if (T <= kFixedRadius && f0 >= need)
            {
                continue;
            }
            // f0 + g^T (q - q0) >= need
            p.add_linear_le({{L.x(k), -g.x()}, {L.y(k), -g.y()}}, f0 - g.dot(q0[k]) - need);
        }
    }

    if (L.has_rate)
    {
        const double Bw = s.radio.bandwidth_hz;
        Coeffs lhs;
        double rhs = 0.0;
        for (int k = 0; k <= K; ++k)
        {
            const auto pr = point_rate(m, s, q0[k]);
            const double a = std::abs(pr.g.d_a) / Bw;
            const double b = std::abs(pr.g.d_i) / Bw;
            Eigen::VectorXd off_a(3), off_i(3);
            off_a << s.z_r - s.z_a, -s.q_a.x(), -s.q_a.y();
            off_i << s.z_r - s.z_i, -s.q_i.x(), -s.q_i.y();
            p.add_soc({{}, {{L.x(k), 1.0}}, {{L.y(k), 1.0}}}, off_a, {{L.dist_ap(k), 1.0}}, 0.0);
            p.add_soc({{}, {{L.x(k), 1.0}}, {{L.y(k), 1.0}}}, off_i, {{L.dist_irs(k), 1.0}}, 0.0);
            lhs.emplace_back(L.dist_ap(k), a);
            lhs.emplace_back(L.dist_irs(k), b);
            rhs += pr.r0 / Bw + a * pr.d_a + b * pr.d_i;
        }
        if (goal == P4Goal::MinEnergy)
        {
            out.rate_rhs = rhs - K * r_min / Bw;
            p.add_linear_le(lhs, out.rate_rhs);
        }
        else
        {
            // Minimizing the negated surrogate average in bit/s/Hz.
            for (const auto &[i, v] : lhs)
            {
                p.objective[i] = v / K;
            }
            p.objective_constant = -rhs / K;
            out.rate_rhs = rhs;
        }
    }
    return out;
}

Path extract_positions(const Scenario &s, const P4 &p4, const Eigen::VectorXd &x)
{
    const auto &L = p4.layout;
    Path q(L.K + 1);
    for (int k = 0; k <= L.K; ++k)
    {
        q[k] = Vec2(x[L.x(k)], x[L.y(k)]);
    }
    q.front() = s.q_s;
    q.back() = s.q_d;
    return q;
}

namespace
{

std::vector<double> map_rates(const RadioMap &map, const Scenario &s, const Path &q)
{
    std::vector<double> r(q.size());
    for (std::size_t k = 0; k < q.size(); ++k)
    {
        r[k] = query_rate(map, s, q[k]);
    }
    return r;
}

double average(const std::vector<double> &r)
{
    double sum = 0.0;
    for (double v : r)
    {
        sum += v;
    }
    return sum / static_cast<double>(r.size() - 1);
}

double interior_max(const std::vector<double> &T)
{
    double m = 0.0;
    for (std::size_t k = 1; k + 1 < T.size(); ++k)
    {
        m = std::max(m, T[k]);
    }
    return m;
}

} // namespace

int max_drop_index(const std::vector<double> &before, const std::vector<double> &after)
{
    if (before.size() != after.size() || before.size() < 3)
    {
        throw DomainError("rate drop needs matching vectors with an interior position");
    }
    int kmax = 1;
    double drop = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < before.size(); ++k)
    {
        if (before[k] - after[k] > drop)
        {
            drop = before[k] - after[k];
            kmax = static_cast<int>(k);
        }
    }
    return kmax;
}

RmapResult run_rmap(const Scenario &s, const SnrModel &m, const RadioMap &map, const Path &init, const RmapConfig &cfg)
{
    cfg.validate();
    check_trajectory(s, init);
    const int K = s.K;

    Path inc = init;
    double E = motion_energy(inc, s.motion, s.delta_t);
    std::vector<double> r_inc = map_rates(map, s, inc);
    double avg_inc = average(r_inc);
    if (avg_inc < cfg.r_min)
    {
        throw DomainError("initial trajectory does not meet the map rate requirement");
    }

    TrustRegionState tr;
    tr.T.assign(K + 1, cfg.t_init);
    tr.tau = cfg.tau;

    RmapResult out;
    RmapTrace &trace = out.trace;
    trace.initial_energy = E;
    trace.initial_objective = avg_model_rate(m, s, inc);
    trace.stop_reason = "n_it_max";

    for (int j = 1; j <= cfg.n_it_max; ++j)
    {
        if (K < 2 || interior_max(tr.T) < kCollapsedRadius)
        {
            trace.stop_reason = "trust_region_collapsed";
            break;
        }
        RmapIteration rec;
        rec.iteration = j;
        rec.energy = E;
        rec.avg_rate_map = avg_inc;

        // The model can under-predict the map; never ask P4 for more model rate than the incumbent has.
        double target = cfg.r_min;
        if (target > 0.0)
        {
            const double inc_model = avg_model_rate(m, s, inc);
            target = std::min(target, inc_model - 1e-9 * std::abs(inc_model));
        }
        const P4 p4 = build_p4(s, m, inc, tr, target);
        const auto res = socp::solve(p4.program, cfg.solver);
        rec.solver_status = socp::to_string(res.status);
        bool solved = res.status == socp::Status::Optimal || res.status == socp::Status::Inaccurate;
        Path cand;
        if (solved)
        {
            cand = extract_positions(s, p4, res.x);
            try
            {
                check_trajectory(s, cand);
            }
            catch (const InvariantError &)
            {
                solved = false;
                rec.solver_status += "/invalid";
            }
        }

        if (!solved)
        {
            // Shrink where the model rate is lowest.
            int kmin = 1;
            double rmin_model = std::numeric_limits<double>::infinity();
            for (int k = 1; k < K; ++k)
            {
                if (tr.T[k] <= 0.0)
                {
                    continue;
                }
                const double r = model_rate(m, s.dist_irs(inc[k]), s.dist_ap(inc[k]), s.radio.tx_power_w,
                                            s.radio.noise_power_w, s.radio.bandwidth_hz);
                if (r < rmin_model)
                {
                    rmin_model = r;
                    kmin = k;
                }
            }
            tr.T[kmin] *= tr.tau;
            rec.shrunk_k = kmin;
        }
        else
        {
            const std::vector<double> r_cand = map_rates(map, s, cand);
            const double avg_cand = average(r_cand);
            rec.avg_rate_map = avg_cand;
            if (avg_cand < cfg.r_min)
            {
                const int kmax = max_drop_index(r_inc, r_cand);
                tr.T[kmax] *= tr.tau;
                rec.shrunk_k = kmax;
            }
            else
            {
                const double Ec = motion_energy(cand, s.motion, s.delta_t);
                if (Ec > E + 1e-9)
                {
                    // The subproblem optimum did not improve on the incumbent.
                    rec.objective = avg_model_rate(m, s, inc);
                    trace.records.push_back(rec);
                    trace.stop_reason = "no_descent";
                    break;
                }
                const bool has_prev = E > 0.0;
                const double rel = has_prev ? (E - Ec) / E : 0.0;
                inc = cand;
                r_inc = r_cand;
                avg_inc = avg_cand;
                E = Ec;
                rec.accepted = true;
                rec.energy = E;
                rec.objective = avg_model_rate(m, s, inc);
                trace.records.push_back(rec);
                if (has_prev && rel <= cfg.epsilon)
                {
                    trace.stop_reason = "epsilon";
                    break;
                }
                continue;
            }
        }
        rec.objective = avg_model_rate(m, s, inc);
        trace.records.push_back(rec);
    }
    out.trajectory = evaluate(s, &m, &map, inc);
    return out;
}

} // namespace irsplan
