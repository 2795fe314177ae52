#include "thermch/drivers.hpp"

#include "thermch/diagnostics.hpp"
#include "thermch/io.hpp"
#include "thermch/mms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace thermch {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory: " + dir);
}

std::string step_tag(int step) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", step);
    return buf;
}

SeriesRow to_row(const BalanceRecord& b, double dt, int newton_iters) {
    SeriesRow r;
    r.t = b.t;
    r.dt = dt;
    r.mass = b.mass;
    r.energy = b.internal_energy;
    r.entropy = b.total_entropy;
    r.production = b.entropy_production_rate;
    r.min_theta = b.min_theta;
    r.newton_iters = newton_iters;
    return r;
}

void write_state_snapshots(const std::string& dir, const State& s,
                           const Parameters& p) {
    const std::string tag = step_tag(s.step_index);
    write_snapshot(dir + "/u_" + tag + ".txt", s.u, "u", s.t);
    write_snapshot(dir + "/theta_" + tag + ".txt", s.theta, "theta", s.t);
    write_snapshot(dir + "/chi_" + tag + ".txt", derive_chi(s, p), "chi", s.t);
}

// Shared single-run body; returns 0 or 3 and always flushes what it has.
int run_scenario(const RunConfig& cfg, const std::string& dir,
                 Trajectory* out_traj, MonitorReport* out_monitors) {
    cfg.validate();
    ensure_dir(dir);

    const Grid g = cfg.make_grid();
    const State initial = make_initial(cfg.initial, g, cfg.initial.seed);

    SeriesWriter series(dir + "/series.csv");
    series.append(to_row(balances(initial, cfg.physics), 0.0, 0));
    const int stride = cfg.output.snapshot_stride;
    if (stride > 0) write_state_snapshots(dir, initial, cfg.physics);

    Trajectory traj;
    traj.states.push_back(initial);
    bool failed = false;
    try {
        const Observer observer = [&](const State& s, const StepReport& rep) {
            series.append(to_row(balances(s, cfg.physics), rep.dt, rep.newton_iters));
            if (stride > 0 && s.step_index % stride == 0)
                write_state_snapshots(dir, s, cfg.physics);
            traj.states.push_back(s);
            traj.reports.push_back(rep);
        };
        // run() records its own copy; the observer already captured the states.
        run(initial, cfg.physics, cfg.solver, cfg.t_final, observer);
    } catch (const step_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        failed = true;
    }

    if (stride > 0 && traj.states.size() > 1)
        write_state_snapshots(dir, traj.states.back(), cfg.physics);

    if (cfg.output.monitors && traj.states.size() > 1) {
        const MonitorReport rep = norm_monitors(traj, cfg.physics);
        write_monitors(dir + "/monitors.txt", rep);
        if (out_monitors) *out_monitors = rep;
    }
    if (out_traj) *out_traj = std::move(traj);
    return failed ? 3 : 0;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

int cmd_run(const RunConfig& cfg) {
    return run_scenario(cfg, cfg.output.dir, nullptr, nullptr);
}

int cmd_continuation(const RunConfig& cfg, const std::vector<double>& eps_ladder) {
    if (eps_ladder.empty())
        throw std::invalid_argument("continuation: ladder must be nonempty");
    for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
        if (!(eps_ladder[i] > 0))
            throw std::invalid_argument("continuation: ladder values must be positive");
        if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
            throw std::invalid_argument("continuation: ladder must be strictly decreasing");
    }
    ensure_dir(cfg.output.dir);

    std::vector<MonitorReport> reports;
    std::vector<State> finals;
    int status = 0;
    for (std::size_t r = 0; r < eps_ladder.size(); ++r) {
        RunConfig rung = cfg;
        rung.physics.eps1 = rung.physics.eps2 = rung.physics.eps3 =
            rung.physics.eps4 = eps_ladder[r];
        rung.output.monitors = true;
        const std::string dir = cfg.output.dir + "/rung_" + std::to_string(r);

        Trajectory traj;
        MonitorReport rep;
        const int rc = run_scenario(rung, dir, &traj, &rep);
        if (rc != 0) { status = rc; break; }
        reports.push_back(std::move(rep));
        finals.push_back(traj.states.back());
    }

    std::ofstream out(cfg.output.dir + "/summary.txt");
    if (!out) throw io_error("cannot open summary: " + cfg.output.dir + "/summary.txt");
    out << "# cross-rung summary: per-monitor max/min ratio, then consecutive\n"
        << "# final-state L2 distances sqrt(|du|_L2^2 + |dtheta|_L2^2)\n"
        << "rungs_completed = " << reports.size() << "\n";
    if (!reports.empty()) {
        for (const auto& [key, first_val] : reports.front()) {
            double lo = first_val, hi = first_val;
            for (const auto& rep : reports) {
                const auto it = rep.find(key);
                if (it == rep.end()) continue;
                lo = std::min(lo, it->second);
                hi = std::max(hi, it->second);
            }
            const double ratio = lo > 0 ? hi / lo : (hi == 0 ? 1.0 : std::numeric_limits<double>::infinity());
            out << "ratio." << key << " = " << fmt(ratio) << "\n";
        }
    }
    for (std::size_t r = 0; r + 1 < finals.size(); ++r) {
        Field du = finals[r].u;
        Field dth = finals[r].theta;
        for (int i = 0; i < du.size(); ++i) {
            du[i] -= finals[r + 1].u[i];
            dth[i] -= finals[r + 1].theta[i];
        }
        const double d = std::sqrt(norm_L2(du) * norm_L2(du) + norm_L2(dth) * norm_L2(dth));
        out << "distance." << r << "_" << (r + 1) << " = " << fmt(d) << "\n";
    }
    if (!out) throw io_error("write failure on summary: " + cfg.output.dir + "/summary.txt");
    return status;
}

int cmd_mms(const RunConfig& cfg, const std::vector<int>& levels) {
    if (levels.size() < 3)
        throw std::invalid_argument("mms: need at least 3 refinement levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 4) throw std::invalid_argument("mms: levels must be >= 4");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw std::invalid_argument("mms: levels must be strictly increasing");
    }
    if (cfg.dim != 1)
        throw std::invalid_argument("mms: manufactured solutions are 1D only");
    cfg.validate();
    ensure_dir(cfg.output.dir);

    ManufacturedSolution ms;
    ms.length = cfg.length;
    ms.mean_u = cfg.initial.mean_u;
    ms.amp_u = cfg.initial.ampu;
    ms.k_u = cfg.initial.ku;
    ms.theta0 = cfg.initial.theta0;
    ms.amp_theta = cfg.initial.amptheta;
    ms.k_theta = cfg.initial.ktheta;
    const MmsSources src = ms.sources(cfg.physics);

    struct Row { int n; double dt, eu2, euinf, eth2, ethinf; };
    std::vector<Row> rows;
    const double n0 = levels.front();
    for (int n : levels) {
        const Grid g = Grid::make_1d(n, cfg.length);
        // dt proportional to h^2, anchored at the coarsest level.
        const double dt = cfg.solver.dt_init * (n0 / n) * (n0 / n);
        SolverConfig sc = cfg.solver;
        sc.dt_init = dt;
        sc.dt_max = dt;
        sc.dt_min = std::min(sc.dt_min, dt);

        const State s0 = ms.exact_state(g, 0.0);
        const Trajectory traj = run(s0, cfg.physics, sc, cfg.t_final, {}, src);
        const State& sf = traj.states.back();
        const State ex = ms.exact_state(g, sf.t);

        Field du = sf.u, dth = sf.theta;
        for (int i = 0; i < du.size(); ++i) {
            du[i] -= ex.u[i];
            dth[i] -= ex.theta[i];
        }
        rows.push_back({n, dt, norm_L2(du), norm_Linf(du), norm_L2(dth), norm_Linf(dth)});
    }

    std::ofstream out(cfg.output.dir + "/mms.csv");
    if (!out) throw io_error("cannot open mms table: " + cfg.output.dir + "/mms.csv");
    out << "n,dt,err_u_L2,err_u_Linf,err_theta_L2,err_theta_Linf,"
           "order_u_L2,order_theta_L2\n";
    std::cout << "n,dt,err_u_L2,err_u_Linf,err_theta_L2,err_theta_Linf,"
                 "order_u_L2,order_theta_L2\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        std::string ou = "", oth = "";
        if (i > 0) {
            const double ref = std::log2(double(r.n) / rows[i - 1].n);
            ou = fmt(std::log2(rows[i - 1].eu2 / r.eu2) / ref);
            oth = fmt(std::log2(rows[i - 1].eth2 / r.eth2) / ref);
        }
        std::string line = std::to_string(r.n) + "," + fmt(r.dt) + "," + fmt(r.eu2)
            + "," + fmt(r.euinf) + "," + fmt(r.eth2) + "," + fmt(r.ethinf)
            + "," + ou + "," + oth + "\n";
        out << line;
        std::cout << line;
    }
    if (!out) throw io_error("write failure on mms table: " + cfg.output.dir + "/mms.csv");
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const std::string dir = cfg.output.dir;
    std::map<int, State> by_step;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const bool is_u = name.rfind("u_", 0) == 0;
        const bool is_th = name.rfind("theta_", 0) == 0;
        if (!is_u && !is_th) continue;
        const Snapshot snap = read_snapshot(entry.path().string());
        const std::string digits = name.substr(name.find('_') + 1,
                                               name.rfind(".txt") - name.find('_') - 1);
        const int step = std::stoi(digits);
        State& s = by_step[step];
        s.t = snap.t;
        s.step_index = step;
        if (is_u) s.u = snap.field;
        else s.theta = snap.field;
    }
    if (by_step.empty()) throw io_error("no snapshots found in: " + dir);

    Trajectory traj;
    for (auto& [step, s] : by_step) {
        if (s.u.size() == 0 || s.theta.size() == 0)
            throw io_error("incomplete snapshot pair at step " + std::to_string(step) + " in: " + dir);
        traj.states.push_back(std::move(s));
    }
    for (std::size_t n = 0; n + 1 < traj.states.size(); ++n) {
        StepReport rep;
        rep.t = traj.states[n + 1].t;
        rep.dt = traj.states[n + 1].t - traj.states[n].t;
        if (!(rep.dt > 0)) throw io_error("snapshot times are not increasing in: " + dir);
        rep.min_theta = traj.states[n + 1].min_theta();
        traj.reports.push_back(rep);
    }

    SeriesWriter series(dir + "/report_series.csv");
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        const double dt = n == 0 ? 0.0 : traj.reports[n - 1].dt;
        series.append(to_row(balances(traj.states[n], cfg.physics), dt, 0));
    }
    if (traj.states.size() > 1)
        write_monitors(dir + "/report_monitors.txt",
                       norm_monitors(traj, cfg.physics));
    return 0;
}

} // namespace thermch
