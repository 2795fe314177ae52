#pragma once

// Implicit time integration of the (optionally regularized) non-isothermal
// Cahn-Hilliard system with the rescaled chemical potential eliminated
// pointwise, damped Newton with temperature-positivity safeguards, and
// adaptive step control.

#include "thermch/grid.hpp"
#include "thermch/model.hpp"

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace thermch {

struct State {
    double t = 0.0;
    Field u;
    Field theta;
    int step_index = 0;

    bool physically_valid() const {
        if (!u.finite() || !theta.finite()) return false;
        for (double th : theta.v)
            if (!(th > 0.0)) return false;
        return true;
    }
    double min_theta() const {
        double m = theta.v.empty() ? 0.0 : theta.v[0];
        for (double th : theta.v) m = m < th ? m : th;
        return m;
    }
};

enum class LinearSolver { dense_direct, iterative_krylov };
enum class JacobianMode { analytic, finite_difference };

struct SolverConfig {
    double dt_init = 1e-3;
    double dt_min = 1e-8;
    double dt_max = 1e-1;
    double newton_tol = 1e-10;      // relative: accept at tol * (1 + ||R0||)
    int newton_max_iter = 50;
    double theta_floor = 1e-8;
    double growth_factor = 1.2;
    LinearSolver linear_solver = LinearSolver::dense_direct;
    JacobianMode jacobian = JacobianMode::finite_difference;
    bool isothermal = false;        // freeze theta; evolve only u
    double krylov_forcing = 1e-3;   // inexact-Newton linear tolerance
    int grow_iter_threshold = 8;    // grow dt when Newton finished within this

    bool operator==(const SolverConfig&) const = default;

    void validate() const {
        if (!(dt_min > 0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
            throw std::invalid_argument("SolverConfig: need 0 < dt_min <= dt_init <= dt_max");
        if (!(theta_floor > 0))
            throw std::invalid_argument("SolverConfig: theta_floor must be positive");
        if (!(newton_tol > 0) || newton_max_iter < 1)
            throw std::invalid_argument("SolverConfig: bad Newton settings");
        if (!(growth_factor >= 1.0))
            throw std::invalid_argument("SolverConfig: growth_factor must be >= 1");
        if (linear_solver == LinearSolver::iterative_krylov && jacobian == JacobianMode::analytic)
            throw std::invalid_argument(
                "SolverConfig: the Krylov path is matrix-free; analytic Jacobian requires dense-direct");
    }
};

// Manufactured-solution sources appended to the two residual equations.
// Empty generators reproduce the unsourced system exactly.
struct MmsSources {
    std::function<double(double x, double y, double t)> source_u;
    std::function<double(double x, double y, double t)> source_theta;
    bool empty() const { return !source_u && !source_theta; }
};

struct StepReport {
    double t = 0.0;          // time reached by the accepted step
    double dt = 0.0;         // dt actually used
    int newton_iters = 0;
    double residual_initial = 0.0;
    double residual_final = 0.0;
    double min_theta = 0.0;
    int retries = 0;         // dt halvings before acceptance
};

struct Trajectory {
    std::vector<State> states;        // initial state plus every accepted step
    std::vector<StepReport> reports;  // one per accepted step
};

// chi = (f(u) - lambda theta - alpha lap u)/theta cellwise.
Field derive_chi(const State& s, const Parameters& p);

struct ResidualEval {
    bool rejected = false;  // temperature below floor: step rejection, not an error
    Field r_u;
    Field r_theta;
};

ResidualEval assemble_residual(const State& trial, const State& old, double dt,
                               const Parameters& p, const MmsSources& src,
                               double theta_floor);

struct NewtonResult {
    bool converged = false;
    State state;
    int iterations = 0;
    double residual_initial = 0.0;
    double residual_final = 0.0;
    std::vector<double> residual_history;
    std::string failure_reason;
};

NewtonResult newton_solve(const State& old, double dt, const Parameters& p,
                          const SolverConfig& cfg, const MmsSources& src = {});

// Unrecoverable step failure (dt underflow below dt_min).
class step_error : public std::runtime_error {
public:
    step_error(std::string msg, StepReport last)
        : std::runtime_error(std::move(msg)), last_attempt(last) {}
    StepReport last_attempt;
};

class TimeStepper {
public:
    using SolveFn = std::function<NewtonResult(const State&, double dt)>;

    TimeStepper(Parameters p, SolverConfig cfg, MmsSources src = {});

    // Attempts a step of at most dt_cap; halves dt on Newton failure down to
    // dt_min, grows it after easy steps.  Throws step_error on dt underflow.
    std::pair<State, StepReport> advance(const State& s,
                                         double dt_cap = std::numeric_limits<double>::infinity());

    double current_dt() const { return dt_; }

    // Test hook: replaces the Newton solve (used to inject failures).
    void set_solve_hook(SolveFn fn) { hook_ = std::move(fn); }

private:
    Parameters params_;
    SolverConfig cfg_;
    MmsSources src_;
    double dt_;
    SolveFn hook_;
};

using Observer = std::function<void(const State&, const StepReport&)>;

Trajectory run(const State& initial, const Parameters& p, const SolverConfig& cfg,
               double t_final, const Observer& observer = {},
               const MmsSources& src = {});

} // namespace thermch
