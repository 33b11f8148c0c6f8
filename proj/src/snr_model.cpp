// SPDX-License-Identifier: Apache-2.0
#include "irsplan/snr_model.hpp"

#include "irsplan/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace irsplan
{

namespace
{

constexpr double kDb = 10.0 / M_LN10;

void check_distances(double d_i, double d_a)
{
    if (!(d_i > 0.0) || !(d_a > 0.0))
    {
        throw DomainError("model distances must be positive");
    }
}

struct Terms
{
    double ei, ex, ea; // d_i^-nu, d_i^-nu/2 d_a^-mu/2, d_a^-mu
};

Terms terms(double nu, double mu, double d_i, double d_a)
{
    const double hi = std::pow(d_i, -0.5 * nu);
    const double ha = std::pow(d_a, -0.5 * mu);
    return {hi * hi, hi * ha, ha * ha};
}

/// Data of one fit: normalized linear targets and log-distances.
struct FitData
{
    Eigen::VectorXd di, da, log_di, log_da, y, log_y;
};

using Params = Eigen::Matrix<double, 5, 1>; // a, b, c, nu, mu

double evaluate(const FitData &d, const Params &p, Eigen::VectorXd &r, Eigen::Matrix<double, Eigen::Dynamic, 5> *jac)
{
    const Eigen::Index n = d.y.size();
    r.resize(n);
    if (jac)
    {
        jac->resize(n, 5);
    }
    double cost = 0.0;
    for (Eigen::Index c = 0; c < n; ++c)
    {
        const auto t = terms(p(3), p(4), d.di(c), d.da(c));
        const double f = p(0) * t.ei + p(1) * t.ex + p(2) * t.ea;
        if (!(f > 0.0))
        {
            return std::numeric_limits<double>::infinity();
        }
        r(c) = kDb * (std::log(f) - d.log_y(c));
        cost += r(c) * r(c);
        if (jac)
        {
            auto row = jac->row(c);
            row(0) = kDb * t.ei / f;
            row(1) = kDb * t.ex / f;
            row(2) = kDb * t.ea / f;
            row(3) = -kDb * d.log_di(c) * (p(0) * t.ei + 0.5 * p(1) * t.ex) / f;
            row(4) = -kDb * d.log_da(c) * (p(2) * t.ea + 0.5 * p(1) * t.ex) / f;
        }
    }
    return cost;
}

/// Gains minimizing sum (f / y - 1)^2 for fixed exponents, a >= 0 (subset enumeration).
Eigen::Vector3d relative_nnls(const FitData &d, double nu, double mu)
{
    const Eigen::Index n = d.y.size();
    Eigen::MatrixXd X(n, 3);
    for (Eigen::Index c = 0; c < n; ++c)
    {
        const auto t = terms(nu, mu, d.di(c), d.da(c));
        X.row(c) << t.ei / d.y(c), t.ex / d.y(c), t.ea / d.y(c);
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    double best_cost = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < 8; ++mask)
    {
        std::vector<int> cols;
        for (int k = 0; k < 3; ++k)
        {
            if (mask & (1 << k))
            {
                cols.push_back(k);
            }
        }
        Eigen::MatrixXd Xs(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k)
        {
            Xs.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
        }
        const Eigen::VectorXd sol = Xs.colPivHouseholderQr().solve(ones);
        if ((sol.array() < 0.0).any() || !sol.allFinite())
        {
            continue;
        }
        const double cost = (Xs * sol - ones).squaredNorm();
        if (cost < best_cost)
        {
            best_cost = cost;
            best.setZero();
            for (std::size_t k = 0; k < cols.size(); ++k)
            {
                best(cols[k]) = sol(static_cast<Eigen::Index>(k));
            }
        }
    }
    return best;
}

struct LmResult
{
    Params p;
    double cost;
    bool converged;
    int iterations;
};

/// Levenberg-Marquardt with an active set for parameters held at zero.
LmResult levenberg_marquardt(const FitData &d, Params p, const FitOptions &opt)
{
    Eigen::VectorXd r;
    Eigen::Matrix<double, Eigen::Dynamic, 5> J;
    double cost = evaluate(d, p, r, &J);
    double lambda = 1e-3;
    LmResult res{p, cost, false, 0};
    if (!std::isfinite(cost))
    {
        return res;
    }

    for (int it = 0; it < opt.max_iterations; ++it)
    {
        res.iterations = it + 1;
        if (cost < 1e-26)
        {
            res.converged = true;
            break;
        }
        const Params g = J.transpose() * r;
        const Eigen::Matrix<double, 5, 5> H = J.transpose() * J;

        std::array<bool, 5> free{};
        for (int k = 0; k < 5; ++k)
        {
            free[k] = p(k) > 0.0 || g(k) < 0.0;
        }

        bool improved = false;
        while (lambda < 1e16)
        {
            Eigen::Matrix<double, 5, 5> Hd = H;
            Params rhs = -g;
            for (int k = 0; k < 5; ++k)
            {
                Hd(k, k) += lambda * std::max(H(k, k), 1e-30);
                if (!free[k])
                {
                    Hd.row(k).setZero();
                    Hd.col(k).setZero();
                    Hd(k, k) = 1.0;
                    rhs(k) = 0.0;
                }
            }
            const Params step = Hd.ldlt().solve(rhs);
            const Params trial = (p + step).cwiseMax(0.0);
            Eigen::VectorXd r_trial;
            const double c_trial = evaluate(d, trial, r_trial, nullptr);
            if (std::isfinite(c_trial) && c_trial < cost)
            {
                const double rel = (cost - c_trial) / cost;
                p = trial;
                cost = evaluate(d, p, r, &J);
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (rel < opt.tolerance)
                {
                    res.converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!improved)
        {
            // No descent direction left: a (bound-constrained) stationary point.
            res.converged = true;
        }
        if (res.converged)
        {
            break;
        }
    }
    res.p = p;
    res.cost = cost;
    return res;
}

} // namespace

double model_snr(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2)
{
    check_distances(d_i, d_a);
    const auto t = terms(m.nu, m.mu, d_i, d_a);
    return (m.A * t.ei + m.B * t.ex + m.C * t.ea) * p_t / sigma2;
}

double model_rate(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2, double bandwidth_hz)
{
    return bandwidth_hz * std::log2(1.0 + model_snr(m, d_i, d_a, p_t, sigma2));
}

RateGradient rate_gradient(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2, double bandwidth_hz)
{
    check_distances(d_i, d_a);
    const double P = p_t / sigma2;
    const auto t = terms(m.nu, m.mu, d_i, d_a);
    const double snr = (m.A * t.ei + m.B * t.ex + m.C * t.ea) * P;
    const double F = M_LN2 * (1.0 + snr);
    RateGradient g;
    g.d_i = bandwidth_hz * (-m.nu * m.A * t.ei / d_i - 0.5 * m.nu * m.B * t.ex / d_i) * P / F;
    g.d_a = bandwidth_hz * (-m.mu * m.C * t.ea / d_a - 0.5 * m.mu * m.B * t.ex / d_a) * P / F;
    return g;
}

Eigen::Matrix2d rate_hessian(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2, double bandwidth_hz)
{
    check_distances(d_i, d_a);
    const double P = p_t / sigma2;
    const auto t = terms(m.nu, m.mu, d_i, d_a);
    const double nu = m.nu;
    const double mu = m.mu;
    const double s = (m.A * t.ei + m.B * t.ex + m.C * t.ea) * P;
    const double si = (-nu * m.A * t.ei - 0.5 * nu * m.B * t.ex) / d_i * P;
    const double sa = (-mu * m.C * t.ea - 0.5 * mu * m.B * t.ex) / d_a * P;
    const double sii = (nu * (nu + 1.0) * m.A * t.ei + 0.5 * nu * (0.5 * nu + 1.0) * m.B * t.ex) / (d_i * d_i) * P;
    const double saa = (mu * (mu + 1.0) * m.C * t.ea + 0.5 * mu * (0.5 * mu + 1.0) * m.B * t.ex) / (d_a * d_a) * P;
    const double sia = 0.25 * nu * mu * m.B * t.ex / (d_i * d_a) * P;
    const double F = M_LN2 * (1.0 + s);
    Eigen::Matrix2d h;
    h(0, 0) = (sii * F - M_LN2 * si * si) / (F * F);
    h(1, 1) = (saa * F - M_LN2 * sa * sa) / (F * F);
    h(0, 1) = h(1, 0) = (sia * F - M_LN2 * si * sa) / (F * F);
    return bandwidth_hz * h;
}

SnrModel fit_samples(const Eigen::VectorXd &d_i, const Eigen::VectorXd &d_a, const Eigen::VectorXd &snr, double p_t,
                     double sigma2, const FitOptions &opt)
{
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < snr.size(); ++c)
    {
        if (snr(c) > 0.0 && std::isfinite(snr(c)))
        {
            check_distances(d_i(c), d_a(c));
            keep.push_back(c);
        }
    }
    if (keep.size() < 5)
    {
        throw DomainError("model fit needs at least 5 cells with positive SNR");
    }

    const double P = p_t / sigma2;
    FitData d;
    const auto n = static_cast<Eigen::Index>(keep.size());
    d.di.resize(n);
    d.da.resize(n);
    d.y.resize(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        d.di(k) = d_i(keep[static_cast<std::size_t>(k)]);
        d.da(k) = d_a(keep[static_cast<std::size_t>(k)]);
        d.y(k) = snr(keep[static_cast<std::size_t>(k)]) / P;
    }
    const double scale = d.y.maxCoeff();
    d.y /= scale;
    d.log_di = d.di.array().log();
    d.log_da = d.da.array().log();
    d.log_y = d.y.array().log();

    LmResult best{Params::Zero(), std::numeric_limits<double>::infinity(), false, 0};
    int total_iterations = 0;
    for (double nu0 : {2.0, 4.5})
    {
        for (double mu0 : {2.0, 4.5})
        {
            const Eigen::Vector3d g = relative_nnls(d, nu0, mu0);
            // Equal gains matched to the median cell, as a second basin.
            std::vector<double> ratio(static_cast<std::size_t>(n));
            for (Eigen::Index c = 0; c < n; ++c)
            {
                const auto t = terms(nu0, mu0, d.di(c), d.da(c));
                ratio[static_cast<std::size_t>(c)] = d.y(c) / (t.ei + t.ex + t.ea);
            }
            std::nth_element(ratio.begin(), ratio.begin() + n / 2, ratio.end());
            const double eq = ratio[static_cast<std::size_t>(n / 2)];

            for (const Eigen::Vector3d &gains : {g, Eigen::Vector3d(eq, eq, eq)})
            {
                Params p;
                p << gains, nu0, mu0;
                auto res = levenberg_marquardt(d, p, opt);
                total_iterations += res.iterations;
                if (res.cost < best.cost)
                {
                    best = res;
                }
            }
        }
    }

    SnrModel m;
    m.A = best.p(0) * scale;
    m.B = best.p(1) * scale;
    m.C = best.p(2) * scale;
    m.nu = best.p(3);
    m.mu = best.p(4);
    m.fit_residual_db = std::sqrt(best.cost / static_cast<double>(n));
    m.converged = best.converged;
    m.iterations = total_iterations;
    return m;
}

SnrModel fit_model(const RadioMap &map, const Scenario &s, const FitOptions &opt)
{
    const auto cells = static_cast<Eigen::Index>(map.snr.size());
    Eigen::VectorXd di(cells), da(cells), snr(cells);
    for (int j = 0; j < map.ny; ++j)
    {
        for (int i = 0; i < map.nx; ++i)
        {
            const auto c = static_cast<Eigen::Index>(map.index(i, j));
            const Vec2 q = map.cell_center(i, j);
            di(c) = s.dist_irs(q);
            da(c) = s.dist_ap(q);
            snr(c) = map.snr[static_cast<std::size_t>(c)];
        }
    }
    return fit_samples(di, da, snr, s.radio.tx_power_w, s.radio.noise_power_w, opt);
}

void save_model(const SnrModel &m, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw IoError("cannot write model file '" + path + "'");
    }
    out.precision(17);
    out << "# irsplan snr model\n";
    out << "A " << m.A << "\n";
    out << "B " << m.B << "\n";
    out << "C " << m.C << "\n";
    out << "nu " << m.nu << "\n";
    out << "mu " << m.mu << "\n";
    out << "fit_residual_db " << m.fit_residual_db << "\n";
    out << "converged " << (m.converged ? 1 : 0) << "\n";
    out << "iterations " << m.iterations << "\n";
}

SnrModel load_model(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open model file '" + path + "'");
    }
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        double value = 0.0;
        if (!(ls >> key >> value))
        {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected '<key> <value>'");
        }
        kv[key] = value;
    }
    auto need = [&](const char *key) {
        auto it = kv.find(key);
        if (it == kv.end())
        {
            throw IoError("model file '" + path + "' lacks '" + key + "'");
        }
        return it->second;
    };
    SnrModel m;
    m.A = need("A");
    m.B = need("B");
    m.C = need("C");
    m.nu = need("nu");
    m.mu = need("mu");
    m.fit_residual_db = kv.count("fit_residual_db") ? kv["fit_residual_db"] : 0.0;
    m.converged = kv.count("converged") ? kv["converged"] != 0.0 : true;
    m.iterations = kv.count("iterations") ? static_cast<int>(kv["iterations"]) : 0;
    if (m.A < 0 || m.B < 0 || m.C < 0 || m.nu < 0 || m.mu < 0)
    {
        throw IoError("model file '" + path + "' has negative parameters");
    }
    return m;
}

} // namespace irsplan
