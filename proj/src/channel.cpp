// SPDX-License-Identifier: Apache-2.0
#include "irsplan/channel.hpp"

#include "irsplan/error.hpp"

#include <cmath>
#include <random>

namespace irsplan
{

namespace
{

constexpr double kTwoPi = 2.0 * M_PI;

double path_gain(double rho, double distance, double exponent)
{
    return std::sqrt(rho * std::pow(distance, -exponent));
}

/// Effective combined row channel h_r^H Phi G + h_d^H, returned as a column (its transpose).
CVec combined_row(const ChannelSample &c, const Eigen::VectorXd &phi)
{
    CVec row = c.h_d.conjugate();
    if (c.M() > 0)
    {
        CVec reflected(c.M());
        for (int m = 0; m < c.M(); ++m)
        {
            reflected(m) = std::conj(c.h_r(m)) * std::polar(1.0, phi(m));
        }
        row += (reflected.transpose() * c.G).transpose();
    }
    return row;
}

} // namespace

CVec ula_response(int n, double direction_cosine, double wavelength, double spacing)
{
    CVec v(n);
    const double k = kTwoPi / wavelength * spacing * direction_cosine;
    for (int i = 0; i < n; ++i)
    {
        v(i) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), -k * i);
    }
    return v;
}

double array_direction_cosine(const Scenario &s, const Vec2 &from, double z_from, const Vec2 &towards,
                              double z_towards)
{
    const double to_x_wall = std::min(from.x(), s.area_width_m - from.x());
    const double to_y_wall = std::min(from.y(), s.area_height_m - from.y());
    const Eigen::Vector3d axis = to_y_wall <= to_x_wall ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d dir(towards.x() - from.x(), towards.y() - from.y(), z_towards - z_from);
    const double n = dir.norm();
    return n > 0.0 ? axis.dot(dir) / n : 0.0;
}

ChannelSample sample_channel(const Scenario &s, const Vec2 &q, bool los_ap, bool los_irs, std::uint64_t rng_seed)
{
    const auto &rc = s.radio;
    const int N = rc.ap_antennas;
    const int M = rc.irs_elements;
    const double rho = rc.rho();

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    auto draw = [&](int n) {
        CVec v(n);
        for (int i = 0; i < n; ++i)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v(i) = cd(re, im);
        }
        return v;
    };

    ChannelSample c;
    // Direct channel first, so that maps with different M share the same direct draws.
    c.h_d_tilde = draw(N);
    c.h_r_tilde = draw(M);

    c.gain_d = path_gain(rho, s.dist_ap(q), los_ap ? rc.mu_los : rc.mu_nlos);
    c.gain_r = path_gain(rho, s.dist_irs(q), los_irs ? rc.nu_los : rc.nu_nlos);
    c.h_d = c.gain_d * c.h_d_tilde;
    c.h_r = c.gain_r * c.h_r_tilde;

    const double d_ia = s.dist_irs_ap();
    c.gamma = std::sqrt(rho * std::pow(10.0, rc.irs_link_gain_db / 10.0) / (d_ia * d_ia));
    const double alpha = array_direction_cosine(s, s.q_i, s.z_i, s.q_a, s.z_a);
    const double beta = array_direction_cosine(s, s.q_a, s.z_a, s.q_i, s.z_i);
    c.a_tilde = ula_response(M, alpha, rc.carrier_wavelength_m, rc.antenna_separation_m);
    c.b_tilde = ula_response(N, beta, rc.carrier_wavelength_m, rc.antenna_separation_m);
    c.G = std::sqrt(static_cast<double>(N) * M) * c.gamma * (c.a_tilde * c.b_tilde.transpose());
    return c;
}

BeamformingSolution optimal_beamforming(const ChannelSample &c, const RadioConstants &radio)
{
    BeamformingSolution sol;
    const int M = c.M();

    // Common phase aligning the reflected path (along b^T) with the direct path.
    const cd direct_proj = (c.b_tilde.transpose() * c.h_d_tilde)(0);
    sol.psi = std::abs(direct_proj) > 0.0 ? -std::arg(direct_proj) : 0.0;

    // g = conj(h_r_tilde) o a_tilde; co-phasing each element cancels arg(g_m).
    sol.phi.resize(M);
    for (int m = 0; m < M; ++m)
    {
        const cd g = std::conj(c.h_r_tilde(m)) * c.a_tilde(m);
        double theta = sol.psi - std::arg(g);
        theta = std::fmod(theta, kTwoPi);
        if (theta < 0.0)
        {
            theta += kTwoPi;
        }
        sol.phi(m) = theta;
    }

    const CVec v = combined_row(c, sol.phi);
    const double nv = v.norm();
    if (!(nv > 0.0))
    {
        throw DegenerateError("combined effective channel is zero");
    }
    sol.w = v.conjugate() / nv;
    sol.snr = snr_direct(c, sol.phi, sol.w, radio);
    return sol;
}

double snr_direct(const ChannelSample &c, const Eigen::VectorXd &phi, const CVec &w, const RadioConstants &radio)
{
    const CVec v = combined_row(c, phi);
    const cd y = (v.transpose() * w)(0);
    return std::norm(y) * radio.snr_scale();
}

double snr_three_term(const ChannelSample &c, const RadioConstants &radio)
{
    const double N = c.N();
    const double h1 = c.h_r_tilde.cwiseAbs().sum();
    const double proj = std::abs((c.b_tilde.transpose() * c.h_d_tilde)(0));
    const double a_term = N * c.gamma * c.gamma * h1 * h1 * c.gain_r * c.gain_r;
    const double b_term = 2.0 * std::sqrt(N) * c.gamma * h1 * proj * c.gain_r * c.gain_d;
    const double c_term = c.h_d_tilde.squaredNorm() * c.gain_d * c.gain_d;
    return (a_term + b_term + c_term) * radio.snr_scale();
}

double rate(double snr, double bandwidth_hz) { return bandwidth_hz * std::log2(1.0 + snr); }

} // namespace irsplan
