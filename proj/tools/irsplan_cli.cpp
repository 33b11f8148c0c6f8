// SPDX-License-Identifier: Apache-2.0
// irsplan command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 usage error or missing input,
// 3 declared infeasibility (rate target unreachable or no path in K slots).

#include "irsplan/baselines.hpp"
#include "irsplan/error.hpp"
#include "irsplan/io.hpp"
#include "irsplan/pipeline.hpp"
#include "irsplan/radiomap.hpp"
#include "irsplan/snr_model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace irsplan;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

void require_file(const std::string &path, const char *what)
{
    if (!fs::is_regular_file(path))
    {
        throw UsageError(std::string(what) + " file not found: " + path);
    }
}

std::string default_out_dir()
{
    const char *env = std::getenv("IRSPLAN_OUT_DIR");
    return env && *env ? env : "out";
}

std::string prepare_dir(const std::string &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return dir;
}

std::string join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

std::string csv_safe(std::string s)
{
    for (char &c : s)
    {
        if (c == ',' || c == '\n' || c == '\r')
        {
            c = ';';
        }
    }
    return s;
}

// Options shared by plan, baseline and sweep.
struct RunOptions
{
    double r_min = 0.0;
    std::optional<int> K;
    double tau = 0.5;
    double epsilon = 0.01;
    int n_it = 100;
    double t_init = 1.0;
    double grid_step = 0.0;

    RmapConfig config() const
    {
        RmapConfig c;
        c.r_min = r_min;
        c.tau = tau;
        c.epsilon = epsilon;
        c.n_it_max = n_it;
        c.t_init = t_init;
        return c;
    }
};

void add_run_options(CLI::App *cmd, RunOptions &o, bool with_rmin)
{
    if (with_rmin)
    {
        cmd->add_option("--rmin", o.r_min, "Average rate requirement [bit/s]")->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--K", o.K, "Number of time slots (overrides the scenario)")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", o.tau, "Trust-region shrink factor in [0, 1)");
    cmd->add_option("--epsilon", o.epsilon, "Relative energy improvement stop");
    cmd->add_option("--n-it", o.n_it, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--t-init", o.t_init, "Initial trust radius [m]");
    cmd->add_option("--grid-step", o.grid_step, "Lattice spacing for the initial graph [m] (0 = D_max/2)");
}

struct Inputs
{
    Scenario scenario;
    RadioMap map;
    SnrModel model;
};

Inputs load_inputs(const std::string &scenario, const std::string &map, const std::string &model,
                   const std::optional<int> &K)
{
    require_file(scenario, "scenario");
    require_file(map, "map");
    require_file(model, "model");
    Inputs in{load_scenario_file(scenario), load_map(map), load_model(model)};
    if (K)
    {
        in.scenario.K = *K;
        in.scenario.validate();
    }
    return in;
}

nlohmann::json summary_json(const Trajectory &t)
{
    nlohmann::json j;
    j["K"] = t.K();
    j["energy_j"] = t.energy_j;
    j["avg_rate_model"] = t.avg_rate_model;
    j["avg_rate_map"] = t.avg_rate_map;
    return j;
}

// ---------------------------------------------------------------- radiomap

struct GenerateArgs
{
    std::string scenario, out, csv;
    int nx = 50, ny = 30, samples = 200;
    std::uint64_t seed = 1;
    std::optional<int> M;
    unsigned threads = 0;
};

int cmd_generate(const GenerateArgs &a)
{
    require_file(a.scenario, "scenario");
    Scenario s = load_scenario_file(a.scenario);
    if (a.M)
    {
        s.radio.irs_elements = *a.M;
        s.validate();
    }
    const RadioMap map = generate_map(s, a.nx, a.ny, a.samples, a.seed, a.threads);
    if (const auto parent = fs::path(a.out).parent_path(); !parent.empty())
    {
        prepare_dir(parent.string());
    }
    save_map(map, s, a.out);
    if (!a.csv.empty())
    {
        export_map_csv(map, s, a.csv);
    }
    std::cout << "wrote " << a.out << " (" << a.nx << "x" << a.ny << ", " << a.samples << " samples, M=" << s.radio.irs_elements
              << ")\n";
    return kExitOk;
}

int cmd_fit(const std::string &map_path, const std::string &out)
{
    require_file(map_path, "map");
    const RadioMap map = load_map(map_path);
    const Scenario s = load_map_scenario(map_path);
    const SnrModel m = fit_model(map, s);
    save_model(m, out);
    std::cout << "A=" << io::format_number(m.A) << " B=" << io::format_number(m.B) << " C=" << io::format_number(m.C)
              << " nu=" << io::format_number(m.nu) << " mu=" << io::format_number(m.mu)
              << " residual_db=" << io::format_number(m.fit_residual_db) << "\n";
    return kExitOk;
}

// -------------------------------------------------------------------- plan

int cmd_plan(const std::string &scenario, const std::string &map_path, const std::string &model_path,
             const RunOptions &o, const std::string &out_dir)
{
    const Inputs in = load_inputs(scenario, map_path, model_path, o.K);
    const Scenario &s = in.scenario;
    const PlanOutcome out = plan(s, in.model, in.map, o.config(), o.grid_step);
    const std::string dir = prepare_dir(out_dir);

    io::write_text(join(dir, "trajectory.csv"), io::trajectory_csv(out.rmap.trajectory));
    io::write_text(join(dir, "trace.csv"), io::trace_csv(out.rmap.trace));
    io::write_text(join(dir, "init_me.csv"), io::trajectory_csv(evaluate(s, &in.model, &in.map, out.me)));
    io::write_text(join(dir, "init_mr.csv"), io::trajectory_csv(evaluate(s, &in.model, &in.map, out.mr)));
    io::write_text(join(dir, "plan.svg"), io::scenario_svg(s, &in.map,
                                                           {{"ME", out.me, "#999999"},
                                                            {"MR", out.mr, "#e08020"},
                                                            {"RMAP", out.rmap.trajectory.positions, "#1060d0"}}));

    nlohmann::json j = summary_json(out.rmap.trajectory);
    j["initial"] = to_string(out.choice.mode);
    j["initial_energy_j"] = out.rmap.trace.initial_energy;
    j["iterations"] = out.rmap.trace.records.size();
    j["stop_reason"] = out.rmap.trace.stop_reason;
    j["r_min"] = o.r_min;
    io::write_text(join(dir, "summary.json"), j.dump(2) + "\n");

    std::cout << "init=" << to_string(out.choice.mode) << " energy=" << io::format_number(out.rmap.trajectory.energy_j)
              << " avg_rate_map=" << io::format_number(out.rmap.trajectory.avg_rate_map)
              << " iterations=" << out.rmap.trace.records.size() << " stop=" << out.rmap.trace.stop_reason << "\n";
    return kExitOk;
}

int cmd_baseline(const std::string &scenario, const std::string &map_path, const std::string &model_path,
                 const RunOptions &o, const std::string &out_dir)
{
    const Inputs in = load_inputs(scenario, map_path, model_path, o.K);
    const BaselineResult b = plan_max_rate(in.scenario, in.model, in.map, o.config(), o.grid_step);
    const std::string dir = prepare_dir(out_dir);
    io::write_text(join(dir, "maxrate.csv"), io::trajectory_csv(b.trajectory));
    io::write_text(join(dir, "maxrate_trace.csv"), io::trace_csv(b.trace));
    io::write_text(join(dir, "maxrate.svg"),
                   io::scenario_svg(in.scenario, &in.map, {{"max-rate", b.trajectory.positions, "#c02020"}}));
    nlohmann::json j = summary_json(b.trajectory);
    j["iterations"] = b.trace.records.size();
    j["stop_reason"] = b.trace.stop_reason;
    j["meets_rate"] = b.meets_rate;
    io::write_text(join(dir, "maxrate_summary.json"), j.dump(2) + "\n");
    std::cout << "energy=" << io::format_number(b.trajectory.energy_j)
              << " avg_rate_map=" << io::format_number(b.trajectory.avg_rate_map) << " stop=" << b.trace.stop_reason
              << "\n";
    return kExitOk;
}

int cmd_bound(const std::string &scenario, const std::optional<int> &K, const std::string &out_dir)
{
    require_file(scenario, "scenario");
    Scenario s = load_scenario_file(scenario);
    if (K)
    {
        s.K = *K;
        s.validate();
    }
    const LowerBound lb = lower_bound(s);
    const std::string dir = prepare_dir(out_dir);
    io::write_text(join(dir, "bound.csv"), io::trajectory_csv(evaluate(s, nullptr, nullptr, lb.positions)));
    io::AggregateRow row;
    row.M = s.radio.irs_elements;
    row.K = s.K;
    row.method = "bound";
    row.energy = lb.energy;
    row.avg_rate_map = std::nan("");
    row.status = socp::to_string(lb.status);
    io::write_text(join(dir, "aggregate.csv"), io::aggregate_header() + io::aggregate_line(row));
    std::cout << "energy=" << io::format_number(lb.energy) << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs
{
    std::string scenario;
    std::vector<int> M, K;
    std::vector<double> r_min;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> methods{"rmap", "maxrate", "bound"};
    int obstacles = 0;
    int nx = 50, ny = 30, samples = 200;
    unsigned threads = 1;
    RunOptions run;
    std::string out_dir;
};

std::string run_dir(const std::string &root, int M, int K, double r_min, std::uint64_t seed, const std::string &method)
{
    std::ostringstream os;
    os << "M" << M << "_K" << K << "_r" << io::format_number(r_min) << "_s" << seed << "_" << method;
    return join(root, os.str());
}

// One (seed, M) group: a map, a model, and every K x r_min x method run on them.
std::vector<io::AggregateRow> sweep_group(const SweepArgs &a, const Scenario &base, std::uint64_t seed, int M,
                                          const std::string &root)
{
    std::vector<io::AggregateRow> rows;
    auto record = [&](int K, double r, const std::string &method, const std::string &status) {
        io::AggregateRow row;
        row.M = M;
        row.K = K;
        row.r_min = r;
        row.seed = seed;
        row.method = method;
        row.energy = std::nan("");
        row.avg_rate_map = std::nan("");
        row.status = csv_safe(status);
        return row;
    };

    Scenario s = a.obstacles > 0 ? random_obstacle_scenario(base, a.obstacles, seed) : base;
    s.radio.irs_elements = M;
    std::optional<MapAndModel> mm;
    std::string map_error;
    try
    {
        mm = build_map_and_model(s, a.nx, a.ny, a.samples, seed, 1);
    }
    catch (const std::exception &e)
    {
        map_error = std::string("error: ") + e.what();
    }

    for (int K : a.K)
    {
        Scenario sk = s;
        sk.K = K;
        for (double r : a.r_min)
        {
            RunOptions ro = a.run;
            ro.r_min = r;
            for (const std::string &method : a.methods)
            {
                io::AggregateRow row = record(K, r, method, "ok");
                try
                {
                    if (method == "bound")
                    {
                        const LowerBound lb = lower_bound(sk);
                        row.energy = lb.energy;
                        row.status = socp::to_string(lb.status);
                        rows.push_back(row);
                        continue;
                    }
                    if (!mm)
                    {
                        rows.push_back(record(K, r, method, map_error));
                        continue;
                    }
                    const std::string dir = prepare_dir(run_dir(root, M, K, r, seed, method));
                    if (method == "rmap")
                    {
                        const PlanOutcome out = plan(sk, mm->model, mm->map, ro.config(), ro.grid_step);
                        io::write_text(join(dir, "trajectory.csv"), io::trajectory_csv(out.rmap.trajectory));
                        io::write_text(join(dir, "trace.csv"), io::trace_csv(out.rmap.trace));
                        row.energy = out.rmap.trajectory.energy_j;
                        row.avg_rate_map = out.rmap.trajectory.avg_rate_map;
                        row.iterations = static_cast<int>(out.rmap.trace.records.size());
                        row.status = out.rmap.trace.stop_reason;
                    }
                    else
                    {
                        const BaselineResult b = plan_max_rate(sk, mm->model, mm->map, ro.config(), ro.grid_step);
                        io::write_text(join(dir, "trajectory.csv"), io::trajectory_csv(b.trajectory));
                        io::write_text(join(dir, "trace.csv"), io::trace_csv(b.trace));
                        row.energy = b.trajectory.energy_j;
                        row.avg_rate_map = b.trajectory.avg_rate_map;
                        row.iterations = static_cast<int>(b.trace.records.size());
                        row.status = b.trace.stop_reason;
                    }
                }
                catch (const InfeasibleError &)
                {
                    row.status = "infeasible";
                }
                catch (const NoPathError &)
                {
                    row.status = "no_path";
                }
                catch (const std::exception &e)
                {
                    row.status = csv_safe(std::string("error: ") + e.what());
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

int cmd_sweep(SweepArgs a)
{
    if (a.M.empty() || a.K.empty() || a.r_min.empty() || a.seeds.empty() || a.methods.empty())
    {
        throw UsageError("sweep lists --M, --K, --rmin, --seeds and --methods must be non-empty");
    }
    for (const auto &m : a.methods)
    {
        if (m != "rmap" && m != "maxrate" && m != "bound")
        {
            throw UsageError("unknown sweep method '" + m + "'");
        }
    }
    require_file(a.scenario, "scenario");
    const Scenario base = load_scenario_file(a.scenario);
    const std::string root = prepare_dir(a.out_dir);

    struct Job
    {
        std::uint64_t seed;
        int M;
    };
    std::vector<Job> jobs;
    for (auto seed : a.seeds)
    {
        for (int M : a.M)
        {
            jobs.push_back({seed, M});
        }
    }

    std::vector<std::vector<io::AggregateRow>> results(jobs.size());
    std::vector<std::string> fatal(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            try
            {
                results[i] = sweep_group(a, base, jobs[i].seed, jobs[i].M, root);
            }
            catch (const std::exception &e)
            {
                fatal[i] = e.what();
            }
        }
    };
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(a.threads ? a.threads : std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool)
    {
        t.join();
    }

    std::string text = io::aggregate_header();
    for (std::size_t i = 0; i < jobs.size(); ++i)
    {
        if (!fatal[i].empty())
        {
            // Scenario generation itself failed: one row per planned run.
            for (int K : a.K)
                for (double r : a.r_min)
                    for (const auto &method : a.methods)
                    {
                        io::AggregateRow row{jobs[i].M, K, r, jobs[i].seed, method, std::nan(""), std::nan(""), 0,
                                             csv_safe("error: " + fatal[i])};
                        text += io::aggregate_line(row);
                    }
            continue;
        }
        for (const auto &row : results[i])
        {
            text += io::aggregate_line(row);
        }
    }
    io::write_text(join(root, "aggregate.csv"), text);
    std::cout << "wrote " << join(root, "aggregate.csv") << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Energy-efficient trajectory planning for IRS-assisted mm-wave robots"};
    app.require_subcommand(1);

    // radiomap
    auto *radiomap = app.add_subcommand("radiomap", "Radio map generation and model fitting");
    radiomap->require_subcommand(1);
    GenerateArgs gen;
    auto *generate = radiomap->add_subcommand("generate", "Monte-Carlo radio map of a scenario");
    generate->add_option("--scenario", gen.scenario, "Scenario JSON")->required();
    generate->add_option("--nx", gen.nx, "Cells along x")->check(CLI::PositiveNumber);
    generate->add_option("--ny", gen.ny, "Cells along y")->check(CLI::PositiveNumber);
    generate->add_option("--samples", gen.samples, "Channel samples per cell")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--M", gen.M, "IRS elements (overrides the scenario)")->check(CLI::NonNegativeNumber);
    generate->add_option("--threads", gen.threads, "Worker threads (0 = all cores)");
    generate->add_option("--csv", gen.csv, "Also export the map as CSV");
    generate->add_option("--out", gen.out, "Map file")->required();

    std::string fit_map, fit_out;
    auto *fit = radiomap->add_subcommand("fit", "Fit the SNR model to a radio map");
    fit->add_option("--map", fit_map, "Map file")->required();
    fit->add_option("--out", fit_out, "Model file")->required();

    // plan / baseline
    std::string scenario, map_path, model_path, out_dir = default_out_dir();
    RunOptions plan_opt, base_opt;
    auto add_inputs = [&](CLI::App *cmd, RunOptions &o, bool with_rmin) {
        cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
        cmd->add_option("--map", map_path, "Map file")->required();
        cmd->add_option("--model", model_path, "Model file")->required();
        cmd->add_option("--out-dir", out_dir, "Output directory (default $IRSPLAN_OUT_DIR or ./out)");
        add_run_options(cmd, o, with_rmin);
    };
    auto *plan_cmd = app.add_subcommand("plan", "Initial paths plus RMAP");
    add_inputs(plan_cmd, plan_opt, true);
    auto *base_cmd = app.add_subcommand("baseline", "Max-rate trajectory baseline");
    add_inputs(base_cmd, base_opt, true);

    // bound
    std::string bound_scenario, bound_out = default_out_dir();
    std::optional<int> bound_K;
    auto *bound_cmd = app.add_subcommand("bound", "Energy lower bound without obstacle and rate constraints");
    bound_cmd->add_option("--scenario", bound_scenario, "Scenario JSON")->required();
    bound_cmd->add_option("--K", bound_K, "Number of time slots")->check(CLI::PositiveNumber);
    bound_cmd->add_option("--out-dir", bound_out, "Output directory");

    // sweep
    SweepArgs sw;
    sw.out_dir = default_out_dir();
    auto *sweep = app.add_subcommand("sweep", "Parameter sweep with an aggregate CSV");
    sweep->add_option("--scenario", sw.scenario, "Base scenario JSON")->required();
    sweep->add_option("--M", sw.M, "IRS element counts")->delimiter(',');
    sweep->add_option("--K", sw.K, "Slot counts")->delimiter(',');
    sweep->add_option("--rmin", sw.r_min, "Rate requirements [bit/s]")->delimiter(',');
    sweep->add_option("--seeds", sw.seeds, "Instance seeds (map and obstacle placement)")->delimiter(',');
    sweep->add_option("--methods", sw.methods, "Subset of rmap,maxrate,bound")->delimiter(',');
    sweep->add_option("--obstacles", sw.obstacles, "Random obstacles per instance (0 keeps the scenario's)")
        ->check(CLI::NonNegativeNumber);
    sweep->add_option("--nx", sw.nx, "Map cells along x")->check(CLI::PositiveNumber);
    sweep->add_option("--ny", sw.ny, "Map cells along y")->check(CLI::PositiveNumber);
    sweep->add_option("--samples", sw.samples, "Samples per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--threads", sw.threads, "Concurrent runs (0 = all cores)");
    sweep->add_option("--out-dir", sw.out_dir, "Output directory");
    sweep->add_option("--tau", sw.run.tau, "Trust-region shrink factor");
    sweep->add_option("--epsilon", sw.run.epsilon, "Relative energy improvement stop");
    sweep->add_option("--n-it", sw.run.n_it, "Iteration cap");
    sweep->add_option("--t-init", sw.run.t_init, "Initial trust radius [m]");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try
    {
        if (generate->parsed())
            return cmd_generate(gen);
        if (fit->parsed())
            return cmd_fit(fit_map, fit_out);
        if (plan_cmd->parsed())
            return cmd_plan(scenario, map_path, model_path, plan_opt, out_dir);
        if (base_cmd->parsed())
            return cmd_baseline(scenario, map_path, model_path, base_opt, out_dir);
        if (bound_cmd->parsed())
            return cmd_bound(bound_scenario, bound_K, bound_out);
        if (sweep->parsed())
            return cmd_sweep(sw);
    }
    catch (const UsageError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const InfeasibleError &e)
    {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    }
    catch (const NoPathError &e)
    {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    }
    catch (const ParseError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const InvariantError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
