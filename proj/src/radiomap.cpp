// SPDX-License-Identifier: Apache-2.0
#include "irsplan/radiomap.hpp"

#include "irsplan/channel.hpp"
#include "irsplan/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace irsplan
{

namespace
{

constexpr char kMagic[8] = {'I', 'R', 'S', 'M', 'A', 'P', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

template <typename T>
void put(std::ostream &out, const T &v)
{
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T get(std::istream &in, const std::string &path)
{
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in)
    {
        throw IoError("truncated map file '" + path + "'");
    }
    return v;
}

} // namespace

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t n)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ cell) ^ n);
}

RadioMap generate_map(const Scenario &s, int nx, int ny, int n_samples, std::uint64_t seed, unsigned threads)
{
    if (nx < 2 || ny < 2)
    {
        throw DomainError("radio map needs at least 2x2 cells");
    }
    if (n_samples < 1)
    {
        throw DomainError("radio map needs at least one sample per cell");
    }

    RadioMap map;
    map.nx = nx;
    map.ny = ny;
    map.cell_w = s.area_width_m / nx;
    map.cell_h = s.area_height_m / ny;
    map.samples_per_cell = n_samples;
    map.seed = seed;
    map.irs_elements = s.radio.irs_elements;
    const std::size_t cells = static_cast<std::size_t>(nx) * ny;
    map.snr.assign(cells, 0.0);
    map.los_ap.assign(cells, 0);
    map.los_irs.assign(cells, 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t c = next++; c < cells; c = next++)
        {
            const int i = static_cast<int>(c % nx);
            const int j = static_cast<int>(c / nx);
            const Vec2 q = map.cell_center(i, j);
            const bool los_ap = is_los(s, q, s.z_r, s.q_a, s.z_a);
            const bool los_irs = is_los(s, q, s.z_r, s.q_i, s.z_i);
            double acc = 0.0;
            for (int n = 0; n < n_samples; ++n)
            {
                const auto ch = sample_channel(s, q, los_ap, los_irs, sample_seed(seed, c, n));
                acc += optimal_beamforming(ch, s.radio).snr;
            }
            map.snr[c] = acc / n_samples;
            map.los_ap[c] = los_ap;
            map.los_irs[c] = los_irs;
        }
    };

    if (threads == 0)
    {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool)
    {
        t.join();
    }
    return map;
}

double query_snr(const RadioMap &map, const Scenario &s, const Vec2 &q)
{
    if (!s.inside(q))
    {
        throw DomainError("query point outside the area");
    }
    const double fx = std::clamp(q.x() / map.cell_w - 0.5, 0.0, map.nx - 1.0);
    const double fy = std::clamp(q.y() / map.cell_h - 0.5, 0.0, map.ny - 1.0);
    const int i0 = std::min(static_cast<int>(fx), map.nx - 2);
    const int j0 = std::min(static_cast<int>(fy), map.ny - 2);
    const double tx = fx - i0;
    const double ty = fy - j0;
    const double s00 = map.snr[map.index(i0, j0)];
    const double s10 = map.snr[map.index(i0 + 1, j0)];
    const double s01 = map.snr[map.index(i0, j0 + 1)];
    const double s11 = map.snr[map.index(i0 + 1, j0 + 1)];
    return (1 - tx) * (1 - ty) * s00 + tx * (1 - ty) * s10 + (1 - tx) * ty * s01 + tx * ty * s11;
}

double query_rate(const RadioMap &map, const Scenario &s, const Vec2 &q)
{
    return rate(query_snr(map, s, q), s.radio.bandwidth_hz);
}

void save_map(const RadioMap &map, const Scenario &s, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw IoError("cannot write map file '" + path + "'");
    }
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<std::int32_t>(map.nx));
    put(out, static_cast<std::int32_t>(map.ny));
    put(out, map.cell_w);
    put(out, map.cell_h);
    put(out, static_cast<std::int32_t>(map.samples_per_cell));
    put(out, map.seed);
    put(out, static_cast<std::int32_t>(map.irs_elements));
    out.write(reinterpret_cast<const char *>(map.snr.data()), static_cast<std::streamsize>(map.snr.size() * sizeof(double)));
    out.write(reinterpret_cast<const char *>(map.los_ap.data()), static_cast<std::streamsize>(map.los_ap.size()));
    out.write(reinterpret_cast<const char *>(map.los_irs.data()), static_cast<std::streamsize>(map.los_irs.size()));
    if (!out)
    {
        throw IoError("failed writing map file '" + path + "'");
    }

    nlohmann::json meta;
    meta["format"] = "irsplan radio map";
    meta["version"] = kVersion;
    meta["nx"] = map.nx;
    meta["ny"] = map.ny;
    meta["cell_w"] = map.cell_w;
    meta["cell_h"] = map.cell_h;
    meta["samples_per_cell"] = map.samples_per_cell;
    meta["seed"] = map.seed;
    meta["irs_elements"] = map.irs_elements;
    meta["scenario"] = nlohmann::json::parse(to_json_text(s));
    std::ofstream side(path + ".meta.json");
    side << meta.dump(2) << "\n";
    if (!side)
    {
        throw IoError("cannot write map metadata for '" + path + "'");
    }
}

RadioMap load_map(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open map file '" + path + "'");
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    {
        throw IoError("'" + path + "' is not a radio map file");
    }
    if (get<std::uint32_t>(in, path) != kVersion)
    {
        throw IoError("unsupported map file version in '" + path + "'");
    }
    RadioMap map;
    map.nx = get<std::int32_t>(in, path);
    map.ny = get<std::int32_t>(in, path);
    map.cell_w = get<double>(in, path);
    map.cell_h = get<double>(in, path);
    map.samples_per_cell = get<std::int32_t>(in, path);
    map.seed = get<std::uint64_t>(in, path);
    map.irs_elements = get<std::int32_t>(in, path);
    if (map.nx < 2 || map.ny < 2 || map.nx > 100000 || map.ny > 100000)
    {
        throw IoError("corrupt grid size in '" + path + "'");
    }
    const std::size_t cells = static_cast<std::size_t>(map.nx) * map.ny;
    map.snr.resize(cells);
    map.los_ap.resize(cells);
    map.los_irs.resize(cells);
    in.read(reinterpret_cast<char *>(map.snr.data()), static_cast<std::streamsize>(cells * sizeof(double)));
    in.read(reinterpret_cast<char *>(map.los_ap.data()), static_cast<std::streamsize>(cells));
    in.read(reinterpret_cast<char *>(map.los_irs.data()), static_cast<std::streamsize>(cells));
    if (!in)
    {
        throw IoError("truncated map file '" + path + "'");
    }
    return map;
}

Scenario load_map_scenario(const std::string &map_path)
{
    std::ifstream in(map_path + ".meta.json");
    if (!in)
    {
        throw IoError("missing map metadata '" + map_path + ".meta.json'");
    }
    nlohmann::json meta;
    try
    {
        meta = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw IoError("bad map metadata for '" + map_path + "': " + e.what());
    }
    if (!meta.contains("scenario"))
    {
        throw IoError("map metadata for '" + map_path + "' has no scenario");
    }
    return load_scenario(meta["scenario"].dump());
}

void export_map_csv(const RadioMap &map, const Scenario &s, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw IoError("cannot write '" + path + "'");
    }
    out << "i,j,x,y,snr,snr_db,rate_bps,los_ap,los_irs\n";
    out.precision(17);
    for (int j = 0; j < map.ny; ++j)
    {
        for (int i = 0; i < map.nx; ++i)
        {
            const auto c = map.index(i, j);
            const Vec2 q = map.cell_center(i, j);
            out << i << ',' << j << ',' << q.x() << ',' << q.y() << ',' << map.snr[c] << ','
                << 10.0 * std::log10(map.snr[c]) << ',' << rate(map.snr[c], s.radio.bandwidth_hz) << ','
                << int(map.los_ap[c]) << ',' << int(map.los_irs[c]) << '\n';
        }
    }
}

} // namespace irsplan
