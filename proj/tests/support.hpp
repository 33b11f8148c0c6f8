// Shared fixtures for the test binaries.
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/scenario.hpp"
#include "irsplan/snr_model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace irsplan::test
{

inline std::string scenario_path(const std::string &name) { return std::string(IRSPLAN_SCENARIO_DIR) + "/" + name; }

inline Scenario base_scenario() { return load_scenario_file(scenario_path("base.json")); }
inline Scenario open_scenario() { return load_scenario_file(scenario_path("no_obstacles.json")); }

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string &name)
{
    const auto dir = std::filesystem::path(IRSPLAN_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Closed-form optimum of the relaxed energy problem: equal steps on the segment.
inline double equal_spacing_energy(const Scenario &s)
{
    const double L = (s.q_d - s.q_s).norm();
    return s.motion.c1 * L * L / (s.K * s.delta_t) + s.motion.c2 * L + s.K * s.motion.c3 * s.delta_t;
}

/// Map whose cells hold the model SNR exactly, with all-LOS masks.
inline RadioMap synthetic_map(const Scenario &s, const SnrModel &m, int nx, int ny)
{
    RadioMap map;
    map.nx = nx;
    map.ny = ny;
    map.cell_w = s.area_width_m / nx;
    map.cell_h = s.area_height_m / ny;
    map.samples_per_cell = 1;
    map.irs_elements = s.radio.irs_elements;
    map.snr.resize(static_cast<std::size_t>(nx) * ny);
    map.los_ap.assign(map.snr.size(), 1);
    map.los_irs.assign(map.snr.size(), 1);
    for (int j = 0; j < ny; ++j)
    {
        for (int i = 0; i < nx; ++i)
        {
            const Vec2 c = map.cell_center(i, j);
            map.snr[map.index(i, j)] =
                model_snr(m, s.dist_irs(c), s.dist_ap(c), s.radio.tx_power_w, s.radio.noise_power_w);
        }
    }
    return map;
}

inline Vec2 uniform_point(std::mt19937_64 &rng, const Scenario &s)
{
    std::uniform_real_distribution<double> ux(0.0, s.area_width_m), uy(0.0, s.area_height_m);
    const double x = ux(rng);
    return {x, uy(rng)};
}

} // namespace irsplan::test
