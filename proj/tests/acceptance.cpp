// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "irsplan/baselines.hpp"
#include "irsplan/channel.hpp"
#include "irsplan/error.hpp"
#include "irsplan/io.hpp"
#include "irsplan/pipeline.hpp"
#include "irsplan/rmap.hpp"
#include "reference_solver.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

using namespace irsplan;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

/// Every RMAP run made here, for the monotonicity and feasibility gate.
struct RunRecord
{
    std::string label;
    RmapTrace trace;
    double r_min = 0.0;
    double init_rate = 0.0;
    double final_rate = 0.0;
};
std::vector<RunRecord> g_runs;

PlanOutcome tracked_plan(const std::string &label, const Scenario &s, const MapAndModel &mm, const RmapConfig &cfg)
{
    PlanOutcome out = plan(s, mm.model, mm.map, cfg);
    g_runs.push_back({label, out.rmap.trace, cfg.r_min, avg_map_rate(mm.map, s, out.choice.positions),
                      out.rmap.trajectory.avg_rate_map});
    return out;
}

SnrModel random_model(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> gain(0.0, 1e-3), ex(1.0, 5.0);
    SnrModel m;
    m.A = gain(rng);
    m.B = gain(rng);
    m.C = gain(rng);
    m.nu = ex(rng);
    m.mu = ex(rng);
    return m;
}

// ---------------------------------------------------------------- 1

/// Largest SNR found by a phase grid of step 1e-3 rad: exhaustive for one
/// element, coordinate-wise with restarts otherwise.
double grid_search(const ChannelSample &c, const RadioConstants &r, std::mt19937_64 &rng)
{
    const int M = c.M();
    const int n = static_cast<int>(std::ceil(2.0 * M_PI / 1e-3));
    std::vector<CVec> u(M);
    for (int m = 0; m < M; ++m)
    {
        u[m] = (std::conj(c.h_r(m)) * c.G.row(m)).transpose();
    }
    const CVec d = c.h_d.conjugate();
    auto eval = [&](const Eigen::VectorXd &th) {
        CVec h = d;
        for (int m = 0; m < M; ++m)
        {
            h += std::polar(1.0, th(m)) * u[m];
        }
        return h.squaredNorm();
    };
    double best = 0.0;
    std::uniform_int_distribution<int> start(0, n - 1);
    const int restarts = M == 1 ? 1 : 4;
    for (int rs = 0; rs < restarts; ++rs)
    {
        Eigen::VectorXd th(M);
        for (int m = 0; m < M; ++m)
        {
            th(m) = start(rng) * 1e-3;
        }
        for (int sweep = 0; sweep < (M == 1 ? 1 : 6); ++sweep)
        {
            for (int m = 0; m < M; ++m)
            {
                CVec rest = d;
                for (int k = 0; k < M; ++k)
                {
                    if (k != m)
                    {
                        rest += std::polar(1.0, th(k)) * u[k];
                    }
                }
                // ||rest + e^{jt} u_m||^2 = const + 2 Re(e^{jt} <rest, u_m>)
                const cd cross = rest.dot(u[m]);
                double arg = th(m), val = -1e300;
                for (int i = 0; i < n; ++i)
                {
                    const double v = (std::polar(1.0, i * 1e-3) * cross).real();
                    if (v > val)
                    {
                        val = v;
                        arg = i * 1e-3;
                    }
                }
                th(m) = arg;
            }
        }
        best = std::max(best, eval(th));
    }
    return best * r.snr_scale();
}

Verdict criterion_beamforming()
{
    const auto t0 = Clock::now();
    const Scenario base = test::base_scenario();
    std::mt19937_64 rng(1001);
    double worst = -1e300;
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial)
    {
        Scenario s = base;
        s.radio.irs_elements = 1 + static_cast<int>(rng() % 4);
        s.radio.ap_antennas = 1 + static_cast<int>(rng() % 2);
        const ChannelSample c = sample_channel(s, test::uniform_point(rng, s), rng() % 2, rng() % 2, rng());
        const double closed = optimal_beamforming(c, s.radio).snr;
        const double grid = grid_search(c, s.radio, rng);
        const double margin = (grid - closed) / grid; // > 0 when the grid wins
        worst = std::max(worst, margin);
        failures += closed < grid * (1.0 - 1e-4);
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < 60.0,
            "1000 channels, largest grid excess " + fmt("%.2e", worst) + " rel, " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 2

Verdict criterion_three_term()
{
    const Scenario base = test::base_scenario();
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial)
    {
        Scenario s = base;
        s.radio.irs_elements = static_cast<int>(rng() % 65);
        s.radio.ap_antennas = 1 + static_cast<int>(rng() % 16);
        const ChannelSample c = sample_channel(s, test::uniform_point(rng, s), rng() % 2, rng() % 2, rng());
        const BeamformingSolution b = optimal_beamforming(c, s.radio);
        const double direct = snr_direct(c, b.phi, b.w, s.radio);
        worst = std::max({worst, test::rel_err(snr_three_term(c, s.radio), direct), test::rel_err(b.snr, direct)});
    }
    return {worst < 1e-8, "10000 instances, max rel err " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 3

Verdict criterion_gradients()
{
    const Scenario s = test::base_scenario();
    const double pt = s.radio.tx_power_w, s2 = s.radio.noise_power_w, bw = s.radio.bandwidth_hz;
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> d(1.0, 60.0);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n)
    {
        const SnrModel m = random_model(rng);
        const double di = d(rng), da = d(rng);
        auto r = [&](double a, double b) { return model_rate(m, a, b, pt, s2, bw); };
        const RateGradient g = rate_gradient(m, di, da, pt, s2, bw);
        const double hi = 1e-6 * di, ha = 1e-6 * da;
        const Eigen::Vector2d fd((r(di + hi, da) - r(di - hi, da)) / (2 * hi),
                                 (r(di, da + ha) - r(di, da - ha)) / (2 * ha));
        worst = std::max(worst, (Eigen::Vector2d(g.d_i, g.d_a) - fd).norm() / fd.norm());

        const Vec2 q = test::uniform_point(rng, s);
        auto rq = [&](const Vec2 &p) { return model_rate(m, s.dist_irs(p), s.dist_ap(p), pt, s2, bw); };
        const double h = 1e-6;
        const Vec2 fq((rq(q + Vec2(h, 0)) - rq(q - Vec2(h, 0))) / (2 * h),
                      (rq(q + Vec2(0, h)) - rq(q - Vec2(0, h))) / (2 * h));
        worst = std::max(worst, (rate_position_gradient(m, s, q) - fq).norm() / fq.norm());
    }
    return {worst <= 1e-5, "200 draws, max rel deviation " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 4

/// Gradient of the per-point surrogate, written out independently.
Vec2 surrogate_gradient(const SnrModel &m, const Scenario &s, const Vec2 &q0, const Vec2 &q)
{
    const RateGradient g =
        rate_gradient(m, s.dist_irs(q0), s.dist_ap(q0), s.radio.tx_power_w, s.radio.noise_power_w,
                      s.radio.bandwidth_hz);
    return g.d_i * (q - s.q_i) / s.dist_irs(q) + g.d_a * (q - s.q_a) / s.dist_ap(q);
}

Verdict criterion_hessians()
{
    const Scenario s = test::base_scenario();
    const double pt = s.radio.tx_power_w, s2 = s.radio.noise_power_w, bw = s.radio.bandwidth_hz;
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> d(1.0, 60.0);
    double worst_eig_rate = 0.0, worst_eig_sur = 0.0, worst_closed = 0.0;
    for (int n = 0; n < 200; ++n)
    {
        const SnrModel m = random_model(rng);
        // Rate in distances: PSD.
        const double di = d(rng), da = d(rng);
        auto r = [&](double a, double b) { return model_rate(m, a, b, pt, s2, bw); };
        const double hi = 1e-3 * di, ha = 1e-3 * da, r0 = r(di, da);
        Eigen::Matrix2d H;
        H(0, 0) = (r(di + hi, da) - 2 * r0 + r(di - hi, da)) / (hi * hi);
        H(1, 1) = (r(di, da + ha) - 2 * r0 + r(di, da - ha)) / (ha * ha);
        H(0, 1) = H(1, 0) =
            (r(di + hi, da + ha) - r(di + hi, da - ha) - r(di - hi, da + ha) + r(di - hi, da - ha)) / (4 * hi * ha);
        const double scale = H.cwiseAbs().maxCoeff();
        worst_eig_rate =
            std::max(worst_eig_rate, -Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues().minCoeff() /
                                         std::max(scale, 1e-300));
        // Closed form against differences of the closed gradient.
        const double ei = 1e-6 * di, ea = 1e-6 * da;
        const RateGradient gp = rate_gradient(m, di + ei, da, pt, s2, bw), gm = rate_gradient(m, di - ei, da, pt, s2, bw);
        const RateGradient gq = rate_gradient(m, di, da + ea, pt, s2, bw), gr = rate_gradient(m, di, da - ea, pt, s2, bw);
        Eigen::Matrix2d Hf;
        Hf << (gp.d_i - gm.d_i) / (2 * ei), (gq.d_i - gr.d_i) / (2 * ea), (gp.d_a - gm.d_a) / (2 * ei),
            (gq.d_a - gr.d_a) / (2 * ea);
        worst_closed = std::max(worst_closed, (rate_hessian(m, di, da, pt, s2, bw) - Hf).norm() / Hf.norm());

        // Surrogate in position: NSD.
        const Vec2 q0 = test::uniform_point(rng, s), q = test::uniform_point(rng, s);
        const Eigen::Matrix2d Hs = surrogate_hessian(m, s, q0, q);
        const double ss = Hs.cwiseAbs().maxCoeff();
        worst_eig_sur = std::max(worst_eig_sur, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(Hs).eigenvalues().maxCoeff() /
                                                    std::max(ss, 1e-300));
        const double h = 1e-5;
        Eigen::Matrix2d Hsf;
        for (int a = 0; a < 2; ++a)
        {
            const Vec2 e = Vec2::Unit(a) * h;
            Hsf.col(a) = (surrogate_gradient(m, s, q0, q + e) - surrogate_gradient(m, s, q0, q - e)) / (2 * h);
        }
        worst_closed = std::max(worst_closed, (Hs - Hsf).norm() / Hsf.norm());
    }
    const bool ok = worst_eig_rate <= 1e-6 && worst_eig_sur <= 1e-6 && worst_closed <= 1e-5;
    return {ok, "rate min-eig " + fmt("%.1e", -worst_eig_rate) + " x scale, surrogate max-eig " +
                    fmt("%.1e", worst_eig_sur) + " x scale, closed-form dev " + fmt("%.1e", worst_closed)};
}

// ---------------------------------------------------------------- 5

Verdict criterion_surrogates(const SnrModel &fitted)
{
    const Scenario s = test::base_scenario();
    std::mt19937_64 rng(1005);
    int bad_rate = 0, bad_obs = 0;
    double tightest = 1e300;
    for (int n = 0; n < 10000; ++n)
    {
        const SnrModel m = n % 2 ? fitted : random_model(rng);
        Path q0(s.K + 1), q(s.K + 1);
        for (int k = 0; k <= s.K; ++k)
        {
            q0[k] = test::uniform_point(rng, s);
            q[k] = test::uniform_point(rng, s);
        }
        const double exact = avg_model_rate(m, s, q);
        const double apx = avg_surrogate_rate(m, s, q0, q);
        bad_rate += apx > exact * (1.0 + 1e-12);
        tightest = std::min(tightest, (exact - apx) / exact);

        std::uniform_real_distribution<double> ax(0.5, 5.0), ang(0.0, M_PI);
        const Obstacle o = Obstacle::ellipse(test::uniform_point(rng, s), ax(rng), ax(rng), 2.0, ang(rng));
        const Vec2 a = test::uniform_point(rng, s), b = test::uniform_point(rng, s);
        const double f = o.quadratic_form(b);
        bad_obs += obstacle_linearization(o, a, b) > f + 1e-9 * (1.0 + f);
    }
    return {bad_rate == 0 && bad_obs == 0, "10000 rate and 10000 obstacle draws, violations " +
                                               std::to_string(bad_rate) + " / " + std::to_string(bad_obs)};
}

// ---------------------------------------------------------------- 6

Verdict criterion_monotone()
{
    int bad = 0;
    std::string first;
    for (const auto &r : g_runs)
    {
        bool ok = r.trace.monotone(1e-9);
        double prev = r.trace.initial_energy;
        for (const auto &rec : r.trace.records)
        {
            ok = ok && (!rec.accepted || rec.energy <= prev + 1e-9);
            if (rec.accepted)
            {
                prev = rec.energy;
            }
        }
        if (r.init_rate >= r.r_min)
        {
            ok = ok && r.final_rate >= r.r_min;
        }
        if (!ok)
        {
            ++bad;
            first = first.empty() ? r.label : first;
        }
    }
    return {bad == 0 && !g_runs.empty(),
            std::to_string(g_runs.size()) + " runs, " + std::to_string(bad) + " violating" +
                (first.empty() ? "" : " (first: " + first + ")")};
}

// ---------------------------------------------------------------- 7

Verdict criterion_bound()
{
    const Scenario s = test::base_scenario();
    const double closed = test::equal_spacing_energy(s);
    const LowerBound lb = lower_bound(s);
    const double err = test::rel_err(lb.energy, closed);
    return {err <= 5e-3 && std::abs(closed - 1349.04) < 0.01,
            "solver " + fmt("%.4f", lb.energy) + " J, closed form " + fmt("%.4f", closed) + " J, rel err " +
                fmt("%.1e", err)};
}

// ---------------------------------------------------------------- 8

Verdict criterion_open_area()
{
    const Scenario s = test::open_scenario();
    const MapAndModel mm = build_map_and_model(s, 50, 30, 200, 1);
    RmapConfig cfg;
    const PlanOutcome out = tracked_plan("open r=0", s, mm, cfg);
    const double lb = lower_bound(s).energy;
    const double e = out.rmap.trajectory.energy_j;
    const auto its = out.rmap.trace.records.size();
    return {e <= 1.01 * lb && its <= 10, "E " + fmt("%.2f", e) + " J vs bound " + fmt("%.2f", lb) + " J (" +
                                             fmt("%.2f", 100.0 * (e - lb) / lb) + "%), " + std::to_string(its) +
                                             " iterations"};
}

// ---------------------------------------------------------------- 9, 10

struct Desk
{
    std::map<std::pair<int, int>, MapAndModel> maps; ///< (M, seed)
};

Verdict criterion_trends(Desk &desk, Clock::time_point suite_start)
{
    const Scenario base = test::base_scenario();
    const std::vector<int> seeds{1, 2, 3};
    std::map<std::pair<int, int>, double> sum; // (M, K) -> energy sum
    double sum_mr = 0.0, sum_rmap40 = 0.0;
    std::ostringstream per;
    bool ordered = true;
    int failed_runs = 0;
    for (int seed : seeds)
    {
        for (int M : {0, 64})
        {
            for (int K : {30, 40})
            {
                Scenario s = base;
                s.radio.irs_elements = M;
                s.K = K;
                RmapConfig cfg;
                cfg.r_min = 2.0e9;
                const std::string label = "M" + std::to_string(M) + " K" + std::to_string(K) + " s" + std::to_string(seed);
                try
                {
                    const PlanOutcome out = tracked_plan(label, s, desk.maps.at({M, seed}), cfg);
                    sum[{M, K}] += out.rmap.trajectory.energy_j;
                    per << ' ' << label << '=' << fmt("%.1f", out.rmap.trajectory.energy_j);
                    if (M == 64 && K == 40)
                    {
                        const MapAndModel &mm = desk.maps.at({M, seed});
                        const BaselineResult b = plan_max_rate(s, mm.model, mm.map, cfg);
                        sum_mr += b.trajectory.energy_j;
                        sum_rmap40 += out.rmap.trajectory.energy_j;
                        ordered = ordered && out.rmap.trajectory.energy_j <= b.trajectory.energy_j;
                        per << " maxrate=" << fmt("%.1f", b.trajectory.energy_j);
                    }
                }
                catch (const std::exception &e)
                {
                    ++failed_runs;
                    per << ' ' << label << "=error(" << e.what() << ')';
                }
            }
        }
    }
    const double n = static_cast<double>(seeds.size());
    auto mean = [&](int M, int K) { return sum[{M, K}] / n; };
    const double gap = (sum_mr - sum_rmap40) / sum_rmap40;
    const double secs = seconds_since(suite_start);
    const bool ok = failed_runs == 0 && mean(64, 30) <= mean(0, 30) && mean(64, 40) <= mean(0, 40) &&
                    mean(0, 40) <= mean(0, 30) && mean(64, 40) <= mean(64, 30) && ordered && gap >= 0.30 &&
                    secs < 900.0;
    std::ostringstream os;
    os << "mean E(M0,K30) " << fmt("%.1f", mean(0, 30)) << ", E(M64,K30) " << fmt("%.1f", mean(64, 30))
       << ", E(M0,K40) " << fmt("%.1f", mean(0, 40)) << ", E(M64,K40) " << fmt("%.1f", mean(64, 40))
       << ", max-rate gap " << fmt("%.1f", 100.0 * gap) << "%, elapsed " << fmt("%.0f", secs) << " s;" << per.str();
    return {ok, os.str()};
}

Verdict criterion_tau(Desk &desk)
{
    const Scenario base = test::base_scenario();
    bool ok = true;
    std::ostringstream os;
    for (int M : {0, 64})
    {
        double it0 = 0, it75 = 0, e0 = 0, e75 = 0;
        int runs = 0;
        for (int seed : {1, 2, 3})
        {
            Scenario s = base;
            s.radio.irs_elements = M;
            RmapConfig cfg;
            cfg.r_min = 2.5e9;
            try
            {
                cfg.tau = 0.0;
                const PlanOutcome a = tracked_plan("tau0 M" + std::to_string(M) + " s" + std::to_string(seed), s,
                                                   desk.maps.at({M, seed}), cfg);
                cfg.tau = 0.75;
                const PlanOutcome b = tracked_plan("tau.75 M" + std::to_string(M) + " s" + std::to_string(seed), s,
                                                   desk.maps.at({M, seed}), cfg);
                it0 += static_cast<double>(a.rmap.trace.records.size());
                it75 += static_cast<double>(b.rmap.trace.records.size());
                e0 += a.rmap.trajectory.energy_j;
                e75 += b.rmap.trajectory.energy_j;
                ++runs;
                os << " M" << M << "/s" << seed << ": it " << a.rmap.trace.records.size() << " vs "
                   << b.rmap.trace.records.size() << ", E " << fmt("%.1f", a.rmap.trajectory.energy_j) << " vs "
                   << fmt("%.1f", b.rmap.trajectory.energy_j) << ';';
            }
            catch (const InfeasibleError &)
            {
                os << " M" << M << "/s" << seed << ": infeasible at 2.5 Gbps;";
            }
        }
        if (runs == 0)
        {
            ok = false;
            continue;
        }
        ok = ok && it0 <= it75 && e0 <= 1.05 * e75;
    }
    return {ok, "mean over feasible instances;" + os.str()};
}

// ---------------------------------------------------------------- 11

Verdict criterion_socp()
{
    std::mt19937_64 rng(1011);
    int disagree = 0, kkt = 0, not_optimal = 0, ref_fail = 0;
    double worst_obj = 0.0, worst_kkt = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const int n = 8 + static_cast<int>(rng() % 25);
        const socp::ConeProgram p = test::random_program(rng, n);
        const socp::SolveResult r = socp::solve(p);
        const test::ReferenceResult ref = test::reference_solve(p);
        ref_fail += !ref.converged;
        if (r.status != socp::Status::Optimal)
        {
            ++not_optimal;
            continue;
        }
        const double k = std::max({r.primal_residual, r.dual_residual, r.relative_gap});
        worst_kkt = std::max(worst_kkt, k);
        kkt += k > 1e-8;
        const double rel = std::abs(r.objective_value - ref.objective) / std::max(1.0, std::abs(ref.objective));
        worst_obj = std::max(worst_obj, rel);
        disagree += rel > 1e-4;
    }
    return {disagree == 0 && kkt == 0 && not_optimal == 0 && ref_fail == 0,
            "100 programs, max objective gap " + fmt("%.1e", worst_obj) + ", max KKT residual " +
                fmt("%.1e", worst_kkt) + ", non-optimal " + std::to_string(not_optimal) + ", reference unconverged " +
                std::to_string(ref_fail)};
}

// ---------------------------------------------------------------- 12

int run_cli(const std::string &args, const std::string &log)
{
    const std::string cmd = std::string(IRSPLAN_CLI) + " " + args + " > " + log + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

/// All regular files below `dir`, relative path -> bytes.
std::map<std::string, std::string> snapshot(const std::string &dir)
{
    std::map<std::string, std::string> out;
    for (const auto &e : std::filesystem::recursive_directory_iterator(dir))
    {
        if (e.is_regular_file())
        {
            out[std::filesystem::relative(e.path(), dir).string()] = test::read_file(e.path().string());
        }
    }
    return out;
}

Verdict criterion_determinism()
{
    const std::string root = test::scratch_dir("acceptance_determinism");
    const std::string sc = test::scenario_path("base.json");
    auto round = [&](const std::string &tag, unsigned threads) {
        const std::string d = root + "/" + tag;
        std::filesystem::create_directories(d);
        const std::string log = root + "/" + tag + ".log";
        const std::string th = " --threads " + std::to_string(threads);
        int rc = 0;
        rc |= run_cli("radiomap generate --scenario " + sc + " --nx 25 --ny 15 --samples 20 --seed 5" + th +
                          " --out " + d + "/map.bin --csv " + d + "/map.csv",
                      log);
        rc |= run_cli("radiomap fit --map " + d + "/map.bin --out " + d + "/model.json", log);
        const std::string mm = " --scenario " + sc + " --map " + d + "/map.bin --model " + d + "/model.json";
        rc |= run_cli("plan" + mm + " --rmin 2e9 --out-dir " + d + "/plan", log);
        rc |= run_cli("baseline" + mm + " --rmin 2e9 --out-dir " + d + "/baseline", log);
        rc |= run_cli("bound --scenario " + sc + " --out-dir " + d + "/bound", log);
        rc |= run_cli("sweep --scenario " + sc +
                          " --M 0,64 --K 30 --rmin 2e9 --seeds 1,2 --obstacles 4 --methods rmap,maxrate,bound "
                          "--nx 20 --ny 12 --samples 10 --out-dir " +
                          d + "/sweep" + th,
                      log);
        return rc;
    };
    const int rc1 = round("a", 1);
    const int rc2 = round("b", 2);
    const auto a = snapshot(root + "/a"), b = snapshot(root + "/b");
    int csv = 0, differ = 0;
    std::string first;
    for (const auto &[name, bytes] : a)
    {
        csv += name.size() > 4 && name.substr(name.size() - 4) == ".csv";
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes)
        {
            ++differ;
            first = first.empty() ? name : first;
        }
    }
    const bool ok = rc1 == 0 && rc2 == 0 && differ == 0 && a.size() == b.size() && csv > 0;
    return {ok, std::to_string(a.size()) + " files (" + std::to_string(csv) + " CSV) compared across two rounds " +
                    "with 1 and 2 threads, " + std::to_string(differ) + " differing" +
                    (first.empty() ? "" : " (first: " + first + ")") + ", exit codes " + std::to_string(rc1) + "/" +
                    std::to_string(rc2)};
}

} // namespace

int main()
{
    const auto start = Clock::now();
    std::map<int, std::pair<std::string, Verdict>> results;
    auto guarded = [&](int id, const std::string &name, const std::function<Verdict()> &f) {
        const auto t0 = Clock::now();
        Verdict v;
        try
        {
            v = f();
        }
        catch (const std::exception &e)
        {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::fprintf(stderr, "[criterion %d done in %.1f s]\n", id, seconds_since(t0));
        results[id] = {name, v};
    };

    Desk desk;
    const auto t_maps = Clock::now();
    for (int seed : {1, 2, 3})
    {
        for (int M : {0, 64})
        {
            Scenario s = test::base_scenario();
            s.radio.irs_elements = M;
            desk.maps.emplace(std::make_pair(M, seed), build_map_and_model(s, 50, 30, 200, seed));
        }
    }
    std::fprintf(stderr, "[desk maps built in %.1f s]\n", seconds_since(t_maps));

    guarded(1, "beamforming closed form vs phase grid", criterion_beamforming);
    guarded(2, "three-term SNR equals direct evaluation", criterion_three_term);
    guarded(3, "rate gradients vs finite differences", criterion_gradients);
    guarded(4, "Hessian signs and closed forms", criterion_hessians);
    guarded(5, "surrogate and obstacle under-estimates",
            [&] { return criterion_surrogates(desk.maps.at({64, 1}).model); });
    guarded(7, "lower bound matches the closed form", criterion_bound);
    guarded(8, "open-area RMAP reaches the bound", criterion_open_area);
    guarded(9, "desk-scale trends", [&] { return criterion_trends(desk, start); });
    guarded(10, "trust-region shrink trade-off", [&] { return criterion_tau(desk); });
    guarded(6, "monotone energy and kept map rate", criterion_monotone);
    guarded(11, "cone solver vs reference", criterion_socp);
    guarded(12, "byte-identical CLI outputs", criterion_determinism);

    int failed = 0;
    for (const auto &[id, nv] : results)
    {
        const auto &[name, v] = nv;
        std::printf("[%2d] %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
        failed += !v.pass;
    }
    std::printf("%d of %zu criteria passed in %.0f s\n", static_cast<int>(results.size()) - failed, results.size(),
                seconds_since(start));
    return failed == 0 ? 0 : 1;
}
