// SPDX-License-Identifier: Apache-2.0
#include "irsplan/scenario.hpp"

#include "irsplan/error.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace irsplan
{

namespace
{

constexpr double kSpeedOfLight = 299792458.0;

double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

int line_of_offset(const std::string &text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

using json = nlohmann::json;

/// Field accessor that reports the dotted path on failure.
class Reader
{
public:
    Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {}

    bool has(const char *key) const { return j_.is_object() && j_.contains(key); }

    Reader child(const char *key) const
    {
        if (!has(key))
        {
            throw ParseError("missing field '" + join(key) + "'");
        }
        return Reader(j_.at(key), join(key));
    }

    double number(const char *key) const
    {
        auto c = child(key);
        if (!c.j_.is_number())
        {
            throw ParseError("field '" + c.path_ + "' must be a number");
        }
        return c.j_.get<double>();
    }

    double number_or(const char *key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const char *key) const
    {
        auto c = child(key);
        if (!c.j_.is_number_integer())
        {
            throw ParseError("field '" + c.path_ + "' must be an integer");
        }
        return c.j_.get<int>();
    }

    int integer_or(const char *key, int fallback) const { return has(key) ? integer(key) : fallback; }

    Vec2 point(const char *key) const
    {
        auto c = child(key);
        if (!c.j_.is_array() || c.j_.size() != 2 || !c.j_[0].is_number() || !c.j_[1].is_number())
        {
            throw ParseError("field '" + c.path_ + "' must be a [x, y] pair");
        }
        return {c.j_[0].get<double>(), c.j_[1].get<double>()};
    }

    const json &raw() const { return j_; }
    const std::string &path() const { return path_; }

private:
    std::string join(const char *key) const { return path_.empty() ? key : path_ + "." + key; }

    const json &j_;
    std::string path_;
};

Obstacle read_obstacle(const Reader &r)
{
    Obstacle o;
    o.center = r.point("center");
    o.height = r.number("height");
    if (r.has("shape"))
    {
        auto s = r.child("shape");
        const json &m = s.raw();
        bool ok = m.is_array() && m.size() == 2;
        for (std::size_t i = 0; ok && i < 2; ++i)
        {
            ok = m[i].is_array() && m[i].size() == 2 && m[i][0].is_number() && m[i][1].is_number();
        }
        if (!ok)
        {
            throw ParseError("field '" + s.path() + "' must be a 2x2 matrix");
        }
        o.shape << m[0][0].get<double>(), m[0][1].get<double>(), m[1][0].get<double>(), m[1][1].get<double>();
    }
    else
    {
        Vec2 axes = r.point("semi_axes");
        double angle = r.number_or("angle_deg", 0.0) * M_PI / 180.0;
        o = Obstacle::ellipse(o.center, axes.x(), axes.y(), o.height, angle);
    }
    return o;
}

} // namespace

Obstacle Obstacle::ellipse(const Vec2 &center, double semi_x, double semi_y, double height, double angle_rad)
{
    Obstacle o;
    o.center = center;
    o.height = height;
    Mat2 rot;
    rot << std::cos(angle_rad), -std::sin(angle_rad), std::sin(angle_rad), std::cos(angle_rad);
    Mat2 d = Mat2::Zero();
    d(0, 0) = semi_x * semi_x;
    d(1, 1) = semi_y * semi_y;
    o.shape = rot * d * rot.transpose();
    return o;
}

Mat2 Obstacle::shape_inverse() const { return shape.inverse(); }

double Obstacle::quadratic_form(const Vec2 &q) const
{
    Vec2 e = q - center;
    return e.dot(shape.ldlt().solve(e));
}

double RadioConstants::rho() const { return std::pow(10.0, -(ref_path_loss_db - antenna_gain_db) / 10.0); }

bool Scenario::inside(const Vec2 &q) const
{
    return q.x() >= 0.0 && q.x() <= area_width_m && q.y() >= 0.0 && q.y() <= area_height_m;
}

double Scenario::dist_irs(const Vec2 &q) const { return std::hypot(z_r - z_i, (q - q_i).norm()); }
double Scenario::dist_ap(const Vec2 &q) const { return std::hypot(z_r - z_a, (q - q_a).norm()); }
double Scenario::dist_irs_ap() const { return std::hypot(z_a - z_i, (q_a - q_i).norm()); }

void Scenario::validate() const
{
    auto require = [](bool ok, const char *field, const char *msg) {
        if (!ok)
        {
            throw InvariantError(field, msg);
        }
    };
    require(area_width_m > 0.0, "area.width", "must be > 0");
    require(area_height_m > 0.0, "area.height", "must be > 0");
    require(K >= 1, "robot.slots", "must be >= 1");
    require(delta_t > 0.0, "robot.slot_duration", "must be > 0");
    require(v_max > 0.0, "robot.max_speed", "must be > 0");
    require(d_s >= 1.0, "robot.safety_margin", "must be >= 1");
    require(motion.c1 >= 0.0, "motion.c1", "must be >= 0");
    require(motion.c2 >= 0.0, "motion.c2", "must be >= 0");
    require(motion.c3 >= 0.0, "motion.c3", "must be >= 0");
    require(radio.ap_antennas >= 1, "radio.ap_antennas", "must be >= 1");
    require(radio.irs_elements >= 0, "radio.irs_elements", "must be >= 0");
    require(radio.tx_power_w > 0.0, "radio.tx_power_dbm", "must be finite");
    require(radio.noise_power_w > 0.0, "radio.noise_power_dbm", "must be finite");
    require(radio.bandwidth_hz > 0.0, "radio.bandwidth_hz", "must be > 0");
    require(radio.carrier_wavelength_m > 0.0, "radio.carrier_frequency_hz", "must be > 0");
    require(radio.nu_los >= 0.0 && radio.nu_nlos >= 0.0 && radio.mu_los >= 0.0 && radio.mu_nlos >= 0.0,
            "radio.exponents", "must be >= 0");

    for (std::size_t i = 0; i < obstacles.size(); ++i)
    {
        const auto &o = obstacles[i];
        const std::string f = "obstacles[" + std::to_string(i) + "]";
        if (std::abs(o.shape(0, 1) - o.shape(1, 0)) > 1e-12 * o.shape.norm())
        {
            throw InvariantError(f + ".shape", "must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat2> es(o.shape);
        if (es.eigenvalues().minCoeff() <= 0.0)
        {
            throw InvariantError(f + ".shape", "must be positive definite");
        }
        if (!(o.height > 0.0))
        {
            throw InvariantError(f + ".height", "must be > 0");
        }
    }

    require(inside(q_s), "robot.start", "outside the area");
    require(inside(q_d), "robot.goal", "outside the area");
    require(!collides(*this, q_s, d_s), "robot.start", "collides with an obstacle at the safety margin");
    require(!collides(*this, q_d, d_s), "robot.goal", "collides with an obstacle at the safety margin");
    require((q_d - q_s).norm() <= K * d_max() * (1.0 + 1e-12), "robot.goal",
            "unreachable: distance exceeds slots * max_speed * slot_duration");
}

Scenario load_scenario(const std::string &config_text)
{
    json root;
    try
    {
        root = json::parse(config_text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(e.what(), line_of_offset(config_text, e.byte == 0 ? 0 : e.byte - 1));
    }
    if (!root.is_object())
    {
        throw ParseError("top level must be an object", 1);
    }

    Scenario s;
    Reader r(root, "");

    auto area = r.child("area");
    s.area_width_m = area.number("width");
    s.area_height_m = area.number("height");

    auto ap = r.child("ap");
    s.q_a = ap.point("position");
    s.z_a = ap.number("height");

    auto irs = r.child("irs");
    s.q_i = irs.point("position");
    s.z_i = irs.number("height");

    auto robot = r.child("robot");
    s.q_s = robot.point("start");
    s.q_d = robot.point("goal");
    s.z_r = robot.number("antenna_height");
    s.K = robot.integer("slots");
    s.delta_t = robot.number("slot_duration");
    s.v_max = robot.number("max_speed");
    s.d_s = robot.number("safety_margin");

    if (r.has("obstacles"))
    {
        auto obs = r.child("obstacles");
        if (!obs.raw().is_array())
        {
            throw ParseError("field 'obstacles' must be an array");
        }
        for (std::size_t i = 0; i < obs.raw().size(); ++i)
        {
            s.obstacles.push_back(read_obstacle(Reader(obs.raw()[i], "obstacles[" + std::to_string(i) + "]")));
        }
    }

    auto mo = r.child("motion");
    s.motion.c1 = mo.number("c1");
    s.motion.c2 = mo.number("c2");
    s.motion.c3 = mo.number("c3");

    auto ra = r.child("radio");
    auto &rc = s.radio;
    rc.bandwidth_hz = ra.number("bandwidth_hz");
    rc.carrier_wavelength_m = kSpeedOfLight / ra.number("carrier_frequency_hz");
    rc.antenna_separation_m = ra.number_or("antenna_separation_m", 0.5 * rc.carrier_wavelength_m);
    rc.ap_antennas = ra.integer("ap_antennas");
    rc.irs_elements = ra.integer("irs_elements");
    rc.tx_power_w = dbm_to_w(ra.number("tx_power_dbm"));
    rc.noise_power_w = dbm_to_w(ra.number("noise_power_dbm"));
    rc.ref_path_loss_db = ra.number("ref_path_loss_db");
    rc.antenna_gain_db = ra.number_or("antenna_gain_db", 0.0);
    rc.irs_link_gain_db = ra.number_or("irs_link_gain_db", 0.0);
    auto ex = ra.child("exponents");
    rc.nu_los = ex.number("irs_los");
    rc.nu_nlos = ex.number("irs_nlos");
    rc.mu_los = ex.number("ap_los");
    rc.mu_nlos = ex.number("ap_nlos");

    s.validate();
    return s;
}

Scenario load_scenario_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open scenario file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string to_json_text(const Scenario &s)
{
    json j;
    j["area"] = {{"width", s.area_width_m}, {"height", s.area_height_m}};
    j["ap"] = {{"position", {s.q_a.x(), s.q_a.y()}}, {"height", s.z_a}};
    j["irs"] = {{"position", {s.q_i.x(), s.q_i.y()}}, {"height", s.z_i}};
    j["robot"] = {{"start", {s.q_s.x(), s.q_s.y()}},
                  {"goal", {s.q_d.x(), s.q_d.y()}},
                  {"antenna_height", s.z_r},
                  {"slots", s.K},
                  {"slot_duration", s.delta_t},
                  {"max_speed", s.v_max},
                  {"safety_margin", s.d_s}};
    json obs = json::array();
    for (const auto &o : s.obstacles)
    {
        obs.push_back({{"center", {o.center.x(), o.center.y()}},
                       {"shape", {{o.shape(0, 0), o.shape(0, 1)}, {o.shape(1, 0), o.shape(1, 1)}}},
                       {"height", o.height}});
    }
    j["obstacles"] = obs;
    j["motion"] = {{"c1", s.motion.c1}, {"c2", s.motion.c2}, {"c3", s.motion.c3}};
    const auto &rc = s.radio;
    j["radio"] = {{"bandwidth_hz", rc.bandwidth_hz},
                  {"carrier_frequency_hz", kSpeedOfLight / rc.carrier_wavelength_m},
                  {"antenna_separation_m", rc.antenna_separation_m},
                  {"ap_antennas", rc.ap_antennas},
                  {"irs_elements", rc.irs_elements},
                  {"tx_power_dbm", w_to_dbm(rc.tx_power_w)},
                  {"noise_power_dbm", w_to_dbm(rc.noise_power_w)},
                  {"ref_path_loss_db", rc.ref_path_loss_db},
                  {"antenna_gain_db", rc.antenna_gain_db},
                  {"irs_link_gain_db", rc.irs_link_gain_db},
                  {"exponents",
                   {{"irs_los", rc.nu_los}, {"irs_nlos", rc.nu_nlos}, {"ap_los", rc.mu_los}, {"ap_nlos", rc.mu_nlos}}}};
    return j.dump(2);
}

bool collides(const Scenario &s, const Vec2 &q, double margin)
{
    return std::any_of(s.obstacles.begin(), s.obstacles.end(),
                       [&](const Obstacle &o) { return o.quadratic_form(q) < margin; });
}

bool segment_hits(const Obstacle &o, const Vec2 &p0, double z0, const Vec2 &p1, double z1)
{
    // Footprint: a t^2 + 2 b t + c <= 0 on the planar projection.
    const Mat2 pinv = o.shape_inverse();
    const Vec2 e = p0 - o.center;
    const Vec2 d = p1 - p0;
    const double a = d.dot(pinv * d);
    const double b = e.dot(pinv * d);
    const double c = e.dot(pinv * e) - 1.0;

    double lo = 0.0;
    double hi = 1.0;
    if (a <= 1e-300)
    {
        if (c > 0.0)
        {
            return false;
        }
    }
    else
    {
        const double disc = b * b - a * c;
        if (disc < 0.0)
        {
            return false;
        }
        const double sq = std::sqrt(disc);
        // Stable roots of a t^2 + 2 b t + c.
        const double qv = -(b + std::copysign(sq, b));
        double t1 = qv / a;
        double t2 = qv != 0.0 ? c / qv : t1;
        if (t1 > t2)
        {
            std::swap(t1, t2);
        }
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
    }

    // Height clamp: 0 <= z(t) <= height.
    const double dz = z1 - z0;
    auto clamp_below = [&](double level, bool upper) {
        // upper: z(t) <= level, otherwise z(t) >= level
        if (std::abs(dz) < 1e-300)
        {
            const bool ok = upper ? z0 <= level : z0 >= level;
            if (!ok)
            {
                hi = -1.0;
            }
            return;
        }
        const double t = (level - z0) / dz;
        if ((dz > 0.0) == upper)
        {
            hi = std::min(hi, t);
        }
        else
        {
            lo = std::max(lo, t);
        }
    };
    clamp_below(o.height, true);
    clamp_below(0.0, false);
    return lo <= hi;
}

bool is_los(const Scenario &s, const Vec2 &q, double z_q, const Vec2 &target, double z_t)
{
    return std::none_of(s.obstacles.begin(), s.obstacles.end(),
                        [&](const Obstacle &o) { return segment_hits(o, q, z_q, target, z_t); });
}

} // namespace irsplan
