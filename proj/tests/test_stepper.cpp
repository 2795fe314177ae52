#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thermch/mms.hpp"
#include "thermch/stepper.hpp"
#include "oracle.hpp"

#include <cmath>
#include <numbers>

using namespace thermch;

namespace {
constexpr double kPi = std::numbers::pi;

// Smooth low-amplitude state used across the solver tests.
State cosine_state(int n, double ampu = 0.1, double amptheta = 0.1) {
    const Grid g = Grid::make_1d(n, 1.0);
    State s;
    s.u = make_field(g, [&](double x, double) { return ampu * std::cos(kPi * x); });
    s.theta = make_field(g, [&](double x, double) { return 1.0 + amptheta * std::cos(2.0 * kPi * x); });
    return s;
}

double max_state_diff(const State& a, const State& b) {
    double m = 0.0;
    for (int i = 0; i < a.u.size(); ++i) {
        m = std::max(m, std::abs(a.u[i] - b.u[i]));
        m = std::max(m, std::abs(a.theta[i] - b.theta[i]));
    }
    return m;
}
} // namespace

TEST_CASE("derive_chi matches the pointwise definition on a uniform state") {
    const Grid g = Grid::make_1d(16, 1.0);
    Parameters p;
    p.lambda = 0.6;
    State s;
    s.u = Field(g, 0.3);
    s.theta = Field(g, 1.4);
    // Uniform u has zero Laplacian, so chi = (f(u) - lambda theta)/theta.
    const Field chi = derive_chi(s, p);
    const double expected = (potential_f(0.3) - 0.6 * 1.4) / 1.4;
    for (double c : chi.v) CHECK(c == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("derive_chi matches an independent padded-array evaluation") {
    const State s = cosine_state(24);
    Parameters p;
    p.alpha = 0.8;
    const Field chi = derive_chi(s, p);
    const auto lap = oracle::lap1d(s.u.v, s.u.grid.hx);
    for (int i = 0; i < s.u.size(); ++i) {
        const double expect =
            (potential_f(s.u[i]) - p.lambda * s.theta[i] - p.alpha * lap[i]) / s.theta[i];
        CHECK(chi[i] == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("residual vanishes on a steady uniform state and matches the oracle elsewhere") {
    Parameters p;
    const Grid g = Grid::make_1d(12, 1.0);
    State s;
    s.u = Field(g, 0.2);
    s.theta = Field(g, 1.1);
    const ResidualEval r0 = assemble_residual(s, s, 1e-3, p, {}, 1e-8);
    CHECK_FALSE(r0.rejected);
    for (double x : r0.r_u.v) CHECK(std::abs(x) <= 1e-14);
    for (double x : r0.r_theta.v) CHECK(std::abs(x) <= 1e-14);

    // Non-uniform trial against a different old state, with regularization on.
    Parameters pr = p;
    pr.eps1 = 1e-3; pr.eps2 = 2e-3; pr.eps3 = 5e-4; pr.eps4 = 1e-4;
    const State trial = cosine_state(12, 0.15, 0.08);
    const State old = cosine_state(12, 0.10, 0.05);
    const double dt = 7e-4;
    const ResidualEval r = assemble_residual(trial, old, dt, pr, {}, 1e-8);
    const auto ref = oracle::residual1d(trial.u.v, trial.theta.v, old.u.v, old.theta.v,
                                        g.hx, dt, pr);
    for (int i = 0; i < g.cells(); ++i) {
        CHECK(r.r_u[i] == doctest::Approx(ref[i]).epsilon(1e-10));
        CHECK(r.r_theta[i] == doctest::Approx(ref[12 + i]).epsilon(1e-10));
    }
}

TEST_CASE("residual assembly reports rejection when theta dips below the floor") {
    Parameters p;
    State trial = cosine_state(12);
    const State old = trial;
    trial.theta.v[3] = 1e-10;
    const ResidualEval r = assemble_residual(trial, old, 1e-3, p, {}, 1e-8);
    CHECK(r.rejected);
}

TEST_CASE("one implicit step matches the independent dense Newton oracle") {
    Parameters p;
    p.beta = 1.0;
    const int n = 8;
    const double dt = 1e-4;
    for (double eps : {0.0, 1e-3}) {
        p.eps1 = p.eps2 = p.eps3 = p.eps4 = eps;
        const State s0 = cosine_state(n, 0.2, 0.1);

        SolverConfig cfg;
        cfg.dt_init = dt; cfg.dt_min = dt; cfg.dt_max = dt;
        cfg.newton_tol = 1e-13;
        const NewtonResult nr = newton_solve(s0, dt, p, cfg);
        REQUIRE(nr.converged);

        std::vector<double> u = s0.u.v, th = s0.theta.v;
        REQUIRE(oracle::newton_step1d(u, th, s0.u.grid.hx, dt, p));
        for (int i = 0; i < n; ++i) {
            CHECK(nr.state.u[i] == doctest::Approx(u[i]).epsilon(1e-11));
            CHECK(nr.state.theta[i] == doctest::Approx(th[i]).epsilon(1e-11));
        }
    }
}

TEST_CASE("analytic and finite-difference Jacobians drive Newton to the same state") {
    const int n = 12;
    const double dt = 5e-5;
    for (double beta : {0.5, 1.0, 1.7}) {
        for (double eps : {0.0, 1e-3}) {
            Parameters p;
            p.beta = beta;
            p.eps1 = p.eps2 = p.eps3 = p.eps4 = eps;
            const State s0 = cosine_state(n, 0.2, 0.1);
            SolverConfig cfg;
            cfg.dt_init = dt; cfg.dt_min = dt; cfg.dt_max = dt;
            cfg.newton_tol = 1e-13;

            cfg.jacobian = JacobianMode::analytic;
            const NewtonResult a = newton_solve(s0, dt, p, cfg);
            cfg.jacobian = JacobianMode::finite_difference;
            const NewtonResult f = newton_solve(s0, dt, p, cfg);
            REQUIRE(a.converged);
            REQUIRE(f.converged);
            CHECK(max_state_diff(a.state, f.state) <= 1e-11);
        }
    }
}

TEST_CASE("Newton accepts a steady state immediately") {
    Parameters p;
    const Grid g = Grid::make_1d(16, 1.0);
    State s;
    s.u = Field(g, 0.1);
    s.theta = Field(g, 1.0);
    SolverConfig cfg;
    const NewtonResult nr = newton_solve(s, 1e-3, p, cfg);
    CHECK(nr.converged);
    CHECK(nr.iterations <= 1);
    CHECK(max_state_diff(nr.state, s) <= 1e-13);
}

TEST_CASE("matrix-free Krylov path agrees with the dense solve") {
    const int n = 24;
    const double dt = 1e-4;
    Parameters p;
    const State s0 = cosine_state(n, 0.1, 0.05);

    SolverConfig dense;
    dense.dt_init = dense.dt_min = dense.dt_max = dt;
    dense.newton_tol = 1e-12;
    const NewtonResult a = newton_solve(s0, dt, p, dense);

    SolverConfig krylov = dense;
    krylov.linear_solver = LinearSolver::iterative_krylov;
    krylov.krylov_forcing = 1e-6;
    krylov.newton_max_iter = 100;
    const NewtonResult b = newton_solve(s0, dt, p, krylov);

    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(max_state_diff(a.state, b.state) <= 1e-8);
}

TEST_CASE("Krylov path rejects the analytic-Jacobian combination") {
    SolverConfig cfg;
    cfg.linear_solver = LinearSolver::iterative_krylov;
    cfg.jacobian = JacobianMode::analytic;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("step control: failures halve dt, successes grow it, underflow throws") {
    Parameters p;
    SolverConfig cfg;
    cfg.dt_init = 1e-3;
    cfg.dt_min = 1e-6;
    cfg.dt_max = 1e-2;
    const State s0 = cosine_state(16, 0.05, 0.02);

    SUBCASE("transient failures are retried at halved dt") {
        TimeStepper ts(p, cfg);
        int fails = 3;
        ts.set_solve_hook([&](const State& s, double dt) {
            if (fails > 0) {
                --fails;
                NewtonResult bad;
                bad.failure_reason = "injected";
                return bad;
            }
            return newton_solve(s, dt, p, cfg);
        });
        const auto [s1, rep] = ts.advance(s0);
        CHECK(rep.retries == 3);
        CHECK(rep.dt == doctest::Approx(1e-3 / 8.0).epsilon(1e-12));
        CHECK(s1.t == doctest::Approx(rep.dt).epsilon(1e-12));
    }

    SUBCASE("persistent failure underflows dt_min and throws step_error") {
        TimeStepper ts(p, cfg);
        ts.set_solve_hook([&](const State&, double) {
            NewtonResult bad;
            bad.failure_reason = "injected";
            return bad;
        });
        CHECK_THROWS_AS(ts.advance(s0), step_error);
    }

    SUBCASE("easy steps grow dt up to dt_max") {
        TimeStepper ts(p, cfg);
        State s = s0;
        double prev_dt = 0.0;
        for (int k = 0; k < 30; ++k) {
            auto [sn, rep] = ts.advance(s);
            s = sn;
            CHECK(rep.dt >= prev_dt);
            prev_dt = rep.dt;
        }
        CHECK(prev_dt == doctest::Approx(cfg.dt_max).epsilon(1e-12));
    }
}

TEST_CASE("run() lands exactly on t_final and reports every accepted step") {
    Parameters p;
    SolverConfig cfg;
    cfg.dt_init = 2e-4;
    cfg.dt_max = 2e-3;
    const State s0 = cosine_state(16, 0.05, 0.02);
    int observed = 0;
    const Trajectory traj = run(s0, p, cfg, 0.01,
                                [&](const State&, const StepReport&) { ++observed; });
    REQUIRE(!traj.states.empty());
    CHECK(traj.states.back().t == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(static_cast<int>(traj.reports.size()) == observed);
    CHECK(traj.states.size() == traj.reports.size() + 1);
    double t = 0.0;
    for (std::size_t k = 0; k < traj.reports.size(); ++k) {
        t += traj.reports[k].dt;
        CHECK(traj.states[k + 1].t == doctest::Approx(t).epsilon(1e-12));
        CHECK(traj.reports[k].min_theta > 0.0);
    }
}

TEST_CASE("run() rejects nonpositive initial temperature") {
    Parameters p;
    SolverConfig cfg;
    State s0 = cosine_state(16);
    s0.theta.v[2] = -1.0;
    CHECK_THROWS_AS(run(s0, p, cfg, 1e-3), std::invalid_argument);
}

TEST_CASE("isothermal mode freezes theta and matches an independent CH solver") {
    Parameters p;
    const int n = 32;
    const double dt = 1e-4;
    const double theta0 = 1.0;
    const Grid g = Grid::make_1d(n, 1.0);
    State s0;
    s0.u = make_field(g, [](double x, double) { return 0.2 * std::cos(kPi * x); });
    s0.theta = Field(g, theta0);

    SolverConfig cfg;
    cfg.isothermal = true;
    cfg.dt_init = cfg.dt_min = cfg.dt_max = dt;
    cfg.newton_tol = 1e-13;

    State s = s0;
    std::vector<double> u_ref = s0.u.v;
    TimeStepper ts(p, cfg);
    for (int k = 0; k < 25; ++k) {
        auto [sn, rep] = ts.advance(s, dt);
        s = sn;
        // Isothermal: u_t = (m/theta0) lap(f(u) - alpha lap u).
        // 1e-9 relative target: the FD-Jacobian residual has a round-off
        // floor ~ eps * m * (4/h^2)^2 * alpha * |u| that a tighter tolerance
        // would sit below.
        REQUIRE(oracle::ch_step1d(u_ref, g.hx, dt, p.m / theta0, p.alpha, 1e-9));
    }
    for (int i = 0; i < n; ++i) {
        CHECK(s.theta[i] == theta0);
        CHECK(s.u[i] == doctest::Approx(u_ref[i]).epsilon(1e-9));
    }
}

TEST_CASE("manufactured sources reproduce the exact solution residual at O(dt + h^2)") {
    ManufacturedSolution ms;
    ms.amp_u = 0.1;
    ms.amp_theta = 0.2;
    Parameters p;
    const MmsSources src = ms.sources(p);

    auto residual_norm = [&](int n, double dt) {
        const Grid g = Grid::make_1d(n, ms.length);
        const State old = ms.exact_state(g, 0.01);
        State nw = ms.exact_state(g, 0.01 + dt);
        const ResidualEval r = assemble_residual(nw, old, dt, p, src, 1e-8);
        REQUIRE_FALSE(r.rejected);
        return std::max(norm_Linf(r.r_u), norm_Linf(r.r_theta));
    };
    // dt ~ h^2 refinement: the exact solution's defect drops by ~4x per level.
    const double e1 = residual_norm(32, 4e-4);
    const double e2 = residual_norm(64, 1e-4);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.6);
    CHECK(order < 2.4);
}

TEST_CASE("constant-in-space manufactured solution is reproduced exactly") {
    ManufacturedSolution ms;
    ms.amp_u = 0.0;
    ms.amp_theta = 0.0;
    ms.mean_u = 0.3;
    ms.theta0 = 1.2;
    Parameters p;
    const Grid g = Grid::make_1d(16, 1.0);
    const State s0 = ms.exact_state(g, 0.0);
    SolverConfig cfg;
    cfg.dt_init = 1e-3;
    const Trajectory traj = run(s0, p, cfg, 0.01, {}, ms.sources(p));
    const State& end = traj.states.back();
    for (int i = 0; i < g.cells(); ++i) {
        CHECK(end.u[i] == doctest::Approx(0.3).epsilon(1e-10));
        CHECK(end.theta[i] == doctest::Approx(1.2).epsilon(1e-10));
    }
}
