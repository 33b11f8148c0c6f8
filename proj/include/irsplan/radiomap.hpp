// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace irsplan
{

/// Grid of Monte-Carlo averaged optimal SNR values over the scenario area.
/// Cells are indexed (i, j) with i along x; storage is row-major in j.
struct RadioMap
{
    int nx = 0;
    int ny = 0;
    double cell_w = 0.0;
    double cell_h = 0.0;
    int samples_per_cell = 0;
    std::uint64_t seed = 0;
    int irs_elements = 0;
    std::vector<double> snr;            ///< linear, size nx * ny
    std::vector<std::uint8_t> los_ap;   ///< 1 = LOS
    std::vector<std::uint8_t> los_irs;  ///< 1 = LOS

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    Vec2 cell_center(int i, int j) const { return {(i + 0.5) * cell_w, (j + 0.5) * cell_h}; }
    double width() const { return nx * cell_w; }
    double height() const { return ny * cell_h; }
};

/// Seed of Monte-Carlo sample `n` in cell `cell`, derived only from (seed, cell, n).
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t n);

/// `threads` = 0 uses the hardware concurrency. Output does not depend on it.
RadioMap generate_map(const Scenario &s, int nx, int ny, int n_samples, std::uint64_t seed, unsigned threads = 0);

/// Bilinear interpolation of the SNR grid between cell centers (clamped at the borders).
double query_snr(const RadioMap &map, const Scenario &s, const Vec2 &q);
double query_rate(const RadioMap &map, const Scenario &s, const Vec2 &q);

/// Binary map file plus `<path>.meta.json` sidecar holding the scenario it was built for.
void save_map(const RadioMap &map, const Scenario &s, const std::string &path);
RadioMap load_map(const std::string &path);
/// Scenario stored in the sidecar of a saved map.
Scenario load_map_scenario(const std::string &map_path);

/// CSV with columns i, j, x, y, snr, snr_db, rate_bps, los_ap, los_irs.
void export_map_csv(const RadioMap &map, const Scenario &s, const std::string &path);

} // namespace irsplan
