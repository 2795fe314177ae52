#include "thermch/stepper.hpp"

#include "thermch/linalg.hpp"

#include <cmath>
#include <cstring>

namespace thermch {

Field derive_chi(const State& s, const Parameters& p) {
    const Field lap_u = laplacian_neumann(s.u);
    Field chi(s.u.grid);
    const int n = chi.size();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        chi.v[i] = chi_of(s.u.v[i], s.theta.v[i], lap_u.v[i], p);
    return chi;
}

ResidualEval assemble_residual(const State& trial, const State& old, double dt,
                               const Parameters& p, const MmsSources& src,
                               double theta_floor) {
    ResidualEval ev;
    const Grid& g = trial.u.grid;
    const int n = g.cells();

    for (int i = 0; i < n; ++i) {
        if (!(trial.theta.v[i] >= theta_floor) || !std::isfinite(trial.u.v[i])) {
            ev.rejected = true;
            return ev;
        }
    }

    const Field chi = derive_chi(trial, p);
    const Field lap_chi = laplacian_neumann(chi);

    Field a(g);
    for (int i = 0; i < n; ++i) {
        const double th = trial.theta.v[i];
        a.v[i] = conductivity_k(th, p) / (th * th);
    }
    const Field diff = div_coeff_grad(a, trial.theta, FaceAveraging::harmonic);

    const double t_new = old.t + dt;
    ev.r_u = Field(g);
    ev.r_theta = Field(g);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int c = j * g.nx + i;
            const double th = trial.theta.v[c];
            double ru = (trial.u.v[c] - old.u.v[c]) / dt
                      - p.m * lap_chi.v[c]
                      - reg_R1(chi.v[c], lap_chi.v[c], p);
            double rt = (heat_Q(th, p) - heat_Q(old.theta.v[c], p)) / dt
                      + p.m * th * lap_chi.v[c] * (chi.v[c] + p.lambda)
                      - diff.v[c]
                      + reg_R2(th, p);
            if (src.source_u) ru -= src.source_u(g.x(i), g.y(j), t_new);
            if (src.source_theta) rt -= src.source_theta(g.x(i), g.y(j), t_new);
            ev.r_u.v[c] = ru;
            ev.r_theta.v[c] = rt;
        }
    }
    return ev;
}

namespace {

// Stacked unknown vector: [u(0..n-1), theta(0..n-1)]; theta block dropped in
// isothermal mode.
struct NonlinearSystem {
    const Parameters& p;
    const SolverConfig& cfg;
    const State& old;
    double dt;
    const MmsSources& src;
    int n;        // cells
    int m;        // unknowns

    NonlinearSystem(const Parameters& p_, const SolverConfig& cfg_, const State& old_,
                    double dt_, const MmsSources& src_)
        : p(p_), cfg(cfg_), old(old_), dt(dt_), src(src_),
          n(old_.u.grid.cells()), m(cfg_.isothermal ? n : 2 * n) {}

    State unpack(const std::vector<double>& x) const {
        State s;
        s.t = old.t + dt;
        s.step_index = old.step_index + 1;
        s.u = Field(old.u.grid);
        s.theta = old.theta;
        std::memcpy(s.u.v.data(), x.data(), n * sizeof(double));
        if (!cfg.isothermal)
            std::memcpy(s.theta.v.data(), x.data() + n, n * sizeof(double));
        return s;
    }

    std::vector<double> pack(const State& s) const {
        std::vector<double> x(m);
        std::memcpy(x.data(), s.u.v.data(), n * sizeof(double));
        if (!cfg.isothermal)
            std::memcpy(x.data() + n, s.theta.v.data(), n * sizeof(double));
        return x;
    }

    // Returns false on rejection (theta below floor).
    bool residual(const std::vector<double>& x, std::vector<double>& out) const {
        const State trial = unpack(x);
        const ResidualEval ev = assemble_residual(trial, old, dt, p, src, cfg.theta_floor);
        if (ev.rejected) return false;
        out.resize(m);
        std::memcpy(out.data(), ev.r_u.v.data(), n * sizeof(double));
        if (!cfg.isothermal)
            std::memcpy(out.data() + n, ev.r_theta.v.data(), n * sizeof(double));
        return true;
    }
};

// Round-off floor of the assembled residual: ulp-level noise in u and theta
// is amplified by the nested Laplacians (biharmonic gain ~ (4/h^2)^2) and by
// the 1/dt difference quotients, so demanding less than this is impossible.
double residual_floor(const State& s, double dt, const Parameters& p) {
    const Grid& g = s.u.grid;
    const double G = 4.0 / (g.hx * g.hx) + (g.dim == 2 ? 4.0 / (g.hy * g.hy) : 0.0);
    const double unorm = norm_Linf(s.u);
    const double thnorm = norm_Linf(s.theta);
    const double thmin = std::max(s.min_theta(), 1e-30);
    const Field chi = derive_chi(s, p);
    const double chinorm = norm_Linf(chi);
    const double lapchinorm = norm_Linf(laplacian_neumann(chi));
    double fnorm = 0.0;
    for (double u : s.u.v) fnorm = std::max(fnorm, std::abs(potential_f(u)));

    const double eps = std::numeric_limits<double>::epsilon();
    const double noise_chi =
        eps * ((fnorm + p.lambda * thnorm + p.alpha * G * unorm) / thmin + chinorm);
    const double floor_u = eps * unorm / dt + p.m * G * noise_chi;
    const double floor_th =
        eps * heat_Q(thnorm, p) / dt
        + p.m * thnorm * (G * noise_chi * (chinorm + p.lambda) + lapchinorm * noise_chi)
        + conductivity_k(thnorm, p) / (thmin * thmin) * G * eps * thnorm;
    return 4.0 * std::max(floor_u, floor_th);
}

double max_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

// Laplacian stencil row in flux form, including the diagonal.
void stencil_row(const Grid& g, int cell, std::vector<std::pair<int, double>>& row) {
    row.clear();
    const int i = cell % g.nx, j = cell / g.nx;
    const double ax = 1.0 / (g.hx * g.hx);
    const double ay = 1.0 / (g.hy * g.hy);
    double diag = 0.0;
    if (i > 0)        { row.emplace_back(cell - 1, ax); diag -= ax; }
    if (i + 1 < g.nx) { row.emplace_back(cell + 1, ax); diag -= ax; }
    if (g.dim == 2) {
        if (j > 0)        { row.emplace_back(cell - g.nx, ay); diag -= ay; }
        if (j + 1 < g.ny) { row.emplace_back(cell + g.nx, ay); diag -= ay; }
    }
    row.emplace_back(cell, diag);
}

// Dense analytic Jacobian of the stacked residual.  Kept for the
// dense-direct path and as a cross-check of the matrix-free products.
DenseMatrix analytic_jacobian(const NonlinearSystem& sys, const std::vector<double>& x) {
    const Parameters& p = sys.p;
    const State s = sys.unpack(x);
    const Grid& g = s.u.grid;
    const int n = sys.n;
    const bool iso = sys.cfg.isothermal;

    const Field lap_u = laplacian_neumann(s.u);
    const Field chi = derive_chi(s, p);
    const Field lap_chi = laplacian_neumann(chi);

    std::vector<std::vector<std::pair<int, double>>> L(n);
    for (int c = 0; c < n; ++c) stencil_row(g, c, L[c]);

    // dchi/du is sparse with the Laplacian stencil; dchi/dtheta is diagonal.
    DenseMatrix Cu(n);
    std::vector<double> cth(n);
    for (int k = 0; k < n; ++k) {
        const double th = s.theta.v[k];
        Cu(k, k) += potential_fprime(s.u.v[k]) / th;
        for (auto [j, lv] : L[k]) Cu(k, j) -= p.alpha * lv / th;
        cth[k] = -(chi.v[k] + p.lambda) / th;
    }

    // (L * Cu)(i, j)
    DenseMatrix LCu(n);
    for (int i = 0; i < n; ++i)
        for (auto [k, lv] : L[i])
            for (int j = 0; j < n; ++j)
                LCu(i, j) += lv * Cu(k, j);

    DenseMatrix J(sys.m);
    for (int i = 0; i < n; ++i) {
        const double d1 = p.m + (p.eps1 != 0.0
                       ? p.eps1 * p.p1 * std::pow(std::abs(lap_chi.v[i]), p.p1 - 1.0) : 0.0);
        const double e2 = p.eps2 != 0.0
                       ? p.eps2 * p.p2 * std::pow(std::abs(chi.v[i]), p.p2 - 1.0) : 0.0;
        J(i, i) += 1.0 / sys.dt;
        for (int j = 0; j < n; ++j) {
            J(i, j) += -d1 * LCu(i, j) + e2 * Cu(i, j);
        }
        if (!iso) {
            for (auto [j, lv] : L[i]) J(i, n + j) += -d1 * lv * cth[j];
            J(i, n + i) += e2 * cth[i];
        }
    }

    if (!iso) {
        for (int i = 0; i < n; ++i) {
            const double th = s.theta.v[i];
            const double w1 = p.m * th * (chi.v[i] + p.lambda);
            const double w2 = p.m * th * lap_chi.v[i];
            for (int j = 0; j < n; ++j)
                J(n + i, j) += w1 * LCu(i, j) + w2 * Cu(i, j);
            J(n + i, n + i) += p.c_v * th / sys.dt
                             + p.m * lap_chi.v[i] * (chi.v[i] + p.lambda)
                             + w2 * cth[i];
            for (auto [j, lv] : L[i]) J(n + i, n + j) += w1 * lv * cth[j];
            if (p.eps3 != 0.0)
                J(n + i, n + i) += p.eps3 * p.p3 * std::pow(th, p.p3 - 1.0);
            if (p.eps4 != 0.0)
                J(n + i, n + i) += p.eps4 * p.p4 * std::pow(th, -p.p4 - 1.0);
        }

        // Heat-diffusion term -div(a(theta) grad theta), harmonic face means.
        auto a_of = [&](double th) { return conductivity_k(th, p) / (th * th); };
        auto aprime_of = [&](double th) {
            return conductivity_kprime(th, p) / (th * th)
                 - 2.0 * conductivity_k(th, p) / (th * th * th);
        };
        auto add_face = [&](int l, int r, double h) {
            const double tl = s.theta.v[l], tr = s.theta.v[r];
            const double al = a_of(tl), ar = a_of(tr);
            const double sum = al + ar;
            const double af = 2.0 * al * ar / sum;
            const double dfl = 2.0 * ar * ar / (sum * sum) * aprime_of(tl);
            const double dfr = 2.0 * al * al / (sum * sum) * aprime_of(tr);
            const double grad = (tr - tl) / h;
            // dF/dtheta_l, dF/dtheta_r with F = af * grad
            const double Fl = dfl * grad - af / h;
            const double Fr = dfr * grad + af / h;
            // div_l += F/h ; div_r -= F/h ; residual carries -div
            J(n + l, n + l) -= Fl / h;
            J(n + l, n + r) -= Fr / h;
            J(n + r, n + l) += Fl / h;
            J(n + r, n + r) += Fr / h;
        };
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i)
                add_face(j * g.nx + i, j * g.nx + i + 1, g.hx);
        if (g.dim == 2)
            for (int j = 0; j + 1 < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    add_face(j * g.nx + i, (j + 1) * g.nx + i, g.hy);
    }
    return J;
}

DenseMatrix fd_jacobian(const NonlinearSystem& sys, const std::vector<double>& x,
                        const std::vector<double>& r0) {
    DenseMatrix J(sys.m);
    std::vector<double> xp = x, rp;
    for (int j = 0; j < sys.m; ++j) {
        const double h = std::sqrt(std::numeric_limits<double>::epsilon())
                       * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + h;
        if (!sys.residual(xp, rp))
            throw std::runtime_error("fd_jacobian: perturbed state rejected");
        for (int i = 0; i < sys.m; ++i) J(i, j) = (rp[i] - r0[i]) / h;
        xp[j] = x[j];
    }
    return J;
}

// Approximate analytic diagonal of the Jacobian, used only as a Jacobi
// preconditioner for the matrix-free path.
std::vector<double> jacobi_diagonal(const NonlinearSystem& sys, const std::vector<double>& x) {
    const Parameters& p = sys.p;
    const State s = sys.unpack(x);
    const Grid& g = s.u.grid;
    const int n = sys.n;
    const Field chi = derive_chi(s, p);
    const Field lap_chi = laplacian_neumann(chi);

    std::vector<double> d(sys.m, 0.0);
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < n; ++c) {
        stencil_row(g, c, row);
        double diagL = 0.0, sumsq = 0.0;
        for (auto [j, lv] : row) {
            if (j == c) diagL = lv;
            sumsq += lv * lv / s.theta.v[j];
        }
        const double fp = potential_fprime(s.u.v[c]);
        d[c] = 1.0 / sys.dt - p.m * (diagL * fp / s.theta.v[c] - p.alpha * sumsq);
        if (std::abs(d[c]) < 1e-30) d[c] = 1.0;
        if (!sys.cfg.isothermal) {
            const double th = s.theta.v[c];
            const double a = conductivity_k(th, p) / (th * th);
            d[n + c] = p.c_v * th / sys.dt - a * diagL
                     + p.m * lap_chi.v[c] * (chi.v[c] + p.lambda);
            if (std::abs(d[n + c]) < 1e-30) d[n + c] = 1.0;
        }
    }
    return d;
}

bool solve_linear(const NonlinearSystem& sys, const std::vector<double>& x,
                  const std::vector<double>& r, std::vector<double>& delta) {
    std::vector<double> rhs(r.size());
    for (size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];

    if (sys.cfg.linear_solver == LinearSolver::dense_direct) {
        if (sys.m > 4096)
            throw std::invalid_argument("dense-direct linear solver limited to 4096 unknowns");
        DenseMatrix J = sys.cfg.jacobian == JacobianMode::analytic
                      ? analytic_jacobian(sys, x)
                      : fd_jacobian(sys, x, r);
        delta = lu_solve(std::move(J), std::move(rhs));
        return true;
    }

    // Matrix-free finite-difference directional derivative.
    const double xnorm = max_norm(x);
    MatVec matvec = [&sys, &x, &r, xnorm](const std::vector<double>& v, std::vector<double>& out) {
        const double vnorm = max_norm(v);
        if (vnorm == 0.0) { out.assign(v.size(), 0.0); return; }
        double sigma = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + xnorm) / vnorm;
        std::vector<double> xp(x.size()), rp;
        for (int tries = 0; tries < 8; ++tries) {
            for (size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + sigma * v[i];
            if (sys.residual(xp, rp)) {
                out.resize(x.size());
                for (size_t i = 0; i < x.size(); ++i) out[i] = (rp[i] - r[i]) / sigma;
                return;
            }
            sigma *= 0.125;  // perturbation crossed the theta floor
        }
        throw std::runtime_error("matrix-free JVP: perturbed state always rejected");
    };

    const std::vector<double> diag = jacobi_diagonal(sys, x);
    const int max_it = std::max(200, 4 * sys.m);
    KrylovResult kr = bicgstab(matvec, rhs, diag, sys.cfg.krylov_forcing, max_it);
    if (!kr.converged) return false;
    delta = std::move(kr.x);
    return true;
}

} // namespace

NewtonResult newton_solve(const State& old, double dt, const Parameters& p,
                          const SolverConfig& cfg, const MmsSources& src) {
    p.validate();
    cfg.validate();
    NonlinearSystem sys(p, cfg, old, dt, src);
    NewtonResult res;

    std::vector<double> x = sys.pack(old);
    std::vector<double> r;
    if (!sys.residual(x, r)) {
        res.failure_reason = "initial state below temperature floor";
        return res;
    }
    double rnorm = max_norm(r);
    res.residual_initial = rnorm;
    res.residual_history.push_back(rnorm);
    const double target = std::max(cfg.newton_tol * (1.0 + rnorm),
                                   residual_floor(old, dt, p));

    std::vector<double> delta, xt, rt;
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (rnorm <= target) {
            res.converged = true;
            break;
        }
        bool lin_ok;
        try {
            lin_ok = solve_linear(sys, x, r, delta);
        } catch (const std::runtime_error&) {
            lin_ok = false;
        }
        if (!lin_ok) {
            res.failure_reason = "linear solver failed";
            break;
        }

        // Fraction-to-the-boundary rule: never let a trial step remove more
        // than 95% of any cell's temperature, so the line search starts
        // inside the admissible region instead of burning halvings on
        // rejected states.
        double step = 1.0;
        if (!cfg.isothermal) {
            for (int i = 0; i < sys.n; ++i) {
                const double dth = delta[sys.n + i];
                if (dth < 0.0)
                    step = std::min(step, -0.95 * x[sys.n + i] / dth);
            }
            step = std::max(step, 1e-12);
        }

        // Backtracking: halve until theta stays above the floor and the
        // residual strictly decreases.
        bool accepted = false;
        while (step >= 1e-12) {
            xt.resize(x.size());
            for (size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + step * delta[i];
            if (sys.residual(xt, rt)) {
                const double rn = max_norm(rt);
                if (std::isfinite(rn) && (rn < rnorm || rn <= target)) {
                    x.swap(xt);
                    r.swap(rt);
                    rnorm = rn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            res.failure_reason = "line search underflow";
            break;
        }
        res.residual_history.push_back(rnorm);
        if (rnorm <= target) {
            res.converged = true;
            break;
        }
    }

    if (!res.converged && res.failure_reason.empty())
        res.failure_reason = "newton_max_iter exceeded";
    res.residual_final = rnorm;
    if (res.converged) res.state = sys.unpack(x);
    return res;
}

TimeStepper::TimeStepper(Parameters p, SolverConfig cfg, MmsSources src)
    : params_(std::move(p)), cfg_(std::move(cfg)), src_(std::move(src)), dt_(cfg_.dt_init) {
    params_.validate();
    cfg_.validate();
}

std::pair<State, StepReport> TimeStepper::advance(const State& s, double dt_cap) {
    StepReport rep;
    double dt_try = std::min(dt_, dt_cap);
    int retries = 0;
    for (;;) {
        NewtonResult nr = hook_ ? hook_(s, dt_try)
                                : newton_solve(s, dt_try, params_, cfg_, src_);
        rep.dt = dt_try;
        rep.newton_iters = nr.iterations;
        rep.residual_initial = nr.residual_initial;
        rep.residual_final = nr.residual_final;
        rep.retries = retries;
        if (nr.converged) {
            rep.t = nr.state.t;
            rep.min_theta = nr.state.min_theta();
            if (nr.iterations <= cfg_.grow_iter_threshold)
                dt_ = std::min(dt_try * cfg_.growth_factor, cfg_.dt_max);
            else
                dt_ = dt_try;
            return {std::move(nr.state), rep};
        }
        if (dt_try <= cfg_.dt_min)
            throw step_error("time step underflow below dt_min (" + nr.failure_reason + ")", rep);
        dt_try = std::max(0.5 * dt_try, cfg_.dt_min);
        ++retries;
    }
}

Trajectory run(const State& initial, const Parameters& p, const SolverConfig& cfg,
               double t_final, const Observer& observer, const MmsSources& src) {
    if (!initial.physically_valid())
        throw std::invalid_argument("run: initial state must be finite with theta > 0 everywhere");
    if (cfg.isothermal) {
        const double th0 = initial.theta.v.empty() ? 0.0 : initial.theta.v[0];
        for (double th : initial.theta.v)
            if (th != th0)
                throw std::invalid_argument("run: isothermal mode requires uniform theta0");
    }

    Trajectory traj;
    traj.states.push_back(initial);
    TimeStepper stepper(p, cfg, src);
    State cur = initial;
    const double eps = 1e-12 * (1.0 + std::abs(t_final));
    while (cur.t < t_final - eps) {
        auto [next, rep] = stepper.advance(cur, t_final - cur.t);
        traj.states.push_back(next);
        traj.reports.push_back(rep);
        if (observer) observer(traj.states.back(), rep);
        cur = traj.states.back();
    }
    return traj;
}

} // namespace thermch
