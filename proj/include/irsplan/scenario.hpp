// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace irsplan
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Elliptic cylinder standing on the floor. The footprint is
/// { q : (q - center)^T P^-1 (q - center) <= 1 }.
struct Obstacle
{
    Vec2 center{0.0, 0.0};
    Mat2 shape = Mat2::Identity(); ///< P, symmetric positive definite [m^2]
    double height = 1.0;           ///< [m]

    /// Axis-aligned ellipse with the given semi-axes, rotated by `angle_rad`.
    static Obstacle ellipse(const Vec2 &center, double semi_x, double semi_y, double height,
                            double angle_rad = 0.0);

    /// (q - center)^T P^-1 (q - center)
    double quadratic_form(const Vec2 &q) const;
    Mat2 shape_inverse() const;
};

/// Coefficients of the DC-motor energy model E_k = c1 v^2 dt + c2 v dt + c3 dt.
struct MotionConstants
{
    double c1 = 4.39;  ///< J s / m^2
    double c2 = 24.67; ///< J / m
    double c3 = 14.77; ///< W
};

/// Link budget and array parameters. Powers are stored linear [W]; the
/// reference path loss stays in dB and is converted by rho().
struct RadioConstants
{
    double bandwidth_hz = 200e6;
    double carrier_wavelength_m = 299792458.0 / 60e9;
    double antenna_separation_m = 0.5 * 299792458.0 / 60e9;
    int ap_antennas = 16;  ///< N
    int irs_elements = 64; ///< M
    double tx_power_w = 0.1;
    double noise_power_w = 1e-11;
    double ref_path_loss_db = 68.0;
    /// Combined antenna gain folded into the reference gain of every link.
    double antenna_gain_db = 0.0;
    /// Extra gain of the fixed IRS-AP line-of-sight link only.
    double irs_link_gain_db = 0.0;
    double nu_los = 2.0;  ///< robot-IRS exponent, LOS
    double nu_nlos = 4.5; ///< robot-IRS exponent, NLOS
    double mu_los = 2.0;  ///< robot-AP exponent, LOS
    double mu_nlos = 4.5; ///< robot-AP exponent, NLOS

    /// Linear reference gain rho (path loss at 1 m including antenna gain).
    double rho() const;
    double snr_scale() const { return tx_power_w / noise_power_w; }
};

struct Scenario
{
    double area_width_m = 50.0;
    double area_height_m = 30.0;
    Vec2 q_a{25.0, 30.0}; ///< AP
    Vec2 q_i{25.0, 0.0};  ///< IRS
    double z_a = 5.0;
    double z_i = 2.5;
    double z_r = 0.5;
    std::vector<Obstacle> obstacles;
    MotionConstants motion;
    RadioConstants radio;
    Vec2 q_s{9.5, 15.5};
    Vec2 q_d{40.5, 14.5};
    int K = 30;
    double delta_t = 1.0;
    double v_max = 3.0;
    double d_s = 1.35;

    double d_max() const { return v_max * delta_t; }
    bool inside(const Vec2 &q) const;

    /// 3D robot-IRS and robot-AP distances for a robot at q.
    double dist_irs(const Vec2 &q) const;
    double dist_ap(const Vec2 &q) const;
    double dist_irs_ap() const;

    /// Throws InvariantError naming the first violated field.
    void validate() const;
};

/// Parses the JSON scenario schema (see README) and validates it.
Scenario load_scenario(const std::string &config_text);
Scenario load_scenario_file(const std::string &path);

/// Serializes back to the same schema; load_scenario(to_json_text(s)) == s.
std::string to_json_text(const Scenario &s);

/// True iff some obstacle has (q - c)^T P^-1 (q - c) < margin.
bool collides(const Scenario &s, const Vec2 &q, double margin);

/// True iff the segment (q, z_q) -> (target, z_t) misses every obstacle cylinder.
bool is_los(const Scenario &s, const Vec2 &q, double z_q, const Vec2 &target, double z_t);

/// Segment/cylinder intersection test for a single obstacle.
bool segment_hits(const Obstacle &o, const Vec2 &p0, double z0, const Vec2 &p1, double z1);

} // namespace irsplan
