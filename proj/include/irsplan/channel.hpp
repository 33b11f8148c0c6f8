// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/scenario.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>

namespace irsplan
{

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// One realization of the robot-IRS, robot-AP and IRS-AP channels at a robot position.
///
/// The small-scale parts (h_r_tilde, h_d_tilde) and the large-scale gains are
/// kept separately so that the closed-form optimum can be evaluated from either
/// representation. h_r = sqrt(rho d_i^-nu) h_r_tilde, h_d = sqrt(rho d_a^-mu) h_d_tilde,
/// G = sqrt(N M) gamma a b^T.
struct ChannelSample
{
    CVec h_r; ///< length M, incl. path loss
    CVec h_d; ///< length N, incl. path loss
    CMat G;   ///< M x N, rank one

    CVec h_r_tilde;
    CVec h_d_tilde;
    CVec a_tilde; ///< IRS array response (length M)
    CVec b_tilde; ///< AP array response (length N)
    double gamma = 0.0;
    double gain_r = 0.0; ///< sqrt(rho d_i^-nu)
    double gain_d = 0.0; ///< sqrt(rho d_a^-mu)

    int M() const { return static_cast<int>(h_r.size()); }
    int N() const { return static_cast<int>(h_d.size()); }
};

struct BeamformingSolution
{
    Eigen::VectorXd phi; ///< per-element phase shifts in [0, 2 pi)
    double psi = 0.0;    ///< common phase
    CVec w;              ///< unit-norm AP combiner
    double snr = 0.0;    ///< linear
};

/// Normalized ULA response [1, e^{-j 2pi/lambda l c}, ...] / sqrt(n) for direction cosine c.
CVec ula_response(int n, double direction_cosine, double wavelength, double spacing);

/// Direction cosine of `towards` seen from an array at `from` whose axis is
/// parallel to the wall nearest to `from`.
double array_direction_cosine(const Scenario &s, const Vec2 &from, double z_from, const Vec2 &towards,
                              double z_towards);

/// Draws one channel at q. Path-loss exponents follow the LOS flags.
ChannelSample sample_channel(const Scenario &s, const Vec2 &q, bool los_ap, bool los_irs, std::uint64_t rng_seed);

/// Closed-form IRS phases, common phase and AP matched filter. Throws
/// DegenerateError when the combined channel vanishes.
BeamformingSolution optimal_beamforming(const ChannelSample &c, const RadioConstants &radio);

/// |(h_r^H Phi G + h_d^H) w|^2 p_t / sigma^2 for arbitrary phases and combiner.
double snr_direct(const ChannelSample &c, const Eigen::VectorXd &phi, const CVec &w, const RadioConstants &radio);

/// Three-term optimum (A d_i^-nu + B d_i^-nu/2 d_a^-mu/2 + C d_a^-mu) p_t / sigma^2,
/// evaluated from the small-scale channel terms.
double snr_three_term(const ChannelSample &c, const RadioConstants &radio);

/// Shannon rate B_w log2(1 + snr) in bit/s.
double rate(double snr, double bandwidth_hz);

} // namespace irsplan
