#include "thermch/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <numbers>

namespace thermch {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: trailing characters in value for " + key + ": '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long x;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: trailing characters in value for " + key + ": '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long x;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad unsigned value for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: trailing characters in value for " + key + ": '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean value for " + key + ": '" + v + "'");
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto d = [&](const std::string& k, double RunConfig::* f) {
            t[k] = [f](RunConfig& c, const std::string& key, const std::string& v) { c.*f = to_double(key, v); };
        };
        auto pd = [&](const std::string& k, double Parameters::* f) {
            t["physics." + k] = [f](RunConfig& c, const std::string& key, const std::string& v) {
                c.physics.*f = to_double(key, v);
            };
        };
        auto sd = [&](const std::string& k, double SolverConfig::* f) {
            t["solver." + k] = [f](RunConfig& c, const std::string& key, const std::string& v) {
                c.solver.*f = to_double(key, v);
            };
        };
        auto id = [&](const std::string& k, double InitialSpec::* f) {
            t["initial." + k] = [f](RunConfig& c, const std::string& key, const std::string& v) {
                c.initial.*f = to_double(key, v);
            };
        };

        pd("m", &Parameters::m);
        pd("alpha", &Parameters::alpha);
        pd("lambda", &Parameters::lambda);
        pd("c_v", &Parameters::c_v);
        pd("k0", &Parameters::k0);
        pd("k1", &Parameters::k1);
        pd("beta", &Parameters::beta);
        pd("eps1", &Parameters::eps1);
        pd("eps2", &Parameters::eps2);
        pd("eps3", &Parameters::eps3);
        pd("eps4", &Parameters::eps4);
        pd("p1", &Parameters::p1);
        pd("p2", &Parameters::p2);
        pd("p3", &Parameters::p3);
        pd("p4", &Parameters::p4);

        t["grid.dim"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            const long d0 = to_long(key, v);
            if (d0 != 1 && d0 != 2) throw std::invalid_argument("config: grid.dim must be 1 or 2");
            c.dim = static_cast<int>(d0);
        };
        t["grid.n"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.n = static_cast<int>(to_long(key, v));
        };
        t["grid.ny"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.ny = static_cast<int>(to_long(key, v));
        };
        d("grid.length", &RunConfig::length);
        d("grid.ly", &RunConfig::ly);

        sd("dt_init", &SolverConfig::dt_init);
        sd("dt_min", &SolverConfig::dt_min);
        sd("dt_max", &SolverConfig::dt_max);
        sd("newton_tol", &SolverConfig::newton_tol);
        sd("theta_floor", &SolverConfig::theta_floor);
        sd("growth_factor", &SolverConfig::growth_factor);
        sd("krylov_forcing", &SolverConfig::krylov_forcing);
        t["solver.newton_max_iter"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.solver.newton_max_iter = static_cast<int>(to_long(key, v));
        };
        t["solver.grow_iter_threshold"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.solver.grow_iter_threshold = static_cast<int>(to_long(key, v));
        };
        t["solver.linear_solver"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            if (v == "dense_direct") c.solver.linear_solver = LinearSolver::dense_direct;
            else if (v == "krylov") c.solver.linear_solver = LinearSolver::iterative_krylov;
            else throw std::invalid_argument("config: " + key + " must be dense_direct or krylov");
        };
        t["solver.jacobian"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            if (v == "analytic") c.solver.jacobian = JacobianMode::analytic;
            else if (v == "fd") c.solver.jacobian = JacobianMode::finite_difference;
            else throw std::invalid_argument("config: " + key + " must be analytic or fd");
        };
        t["solver.isothermal"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.solver.isothermal = to_bool(key, v);
        };

        d("time.t_final", &RunConfig::t_final);

        t["initial.generator"] = [](RunConfig& c, const std::string&, const std::string& v) {
            if (v != "uniform" && v != "spinodal" && v != "cosine")
                throw std::invalid_argument("config: unknown initial generator '" + v + "'");
            c.initial.generator = v;
        };
        id("u0", &InitialSpec::u0);
        id("theta0", &InitialSpec::theta0);
        id("amp", &InitialSpec::amp);
        id("mean_u", &InitialSpec::mean_u);
        id("ampu", &InitialSpec::ampu);
        id("amptheta", &InitialSpec::amptheta);
        t["initial.ku"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.initial.ku = static_cast<int>(to_long(key, v));
        };
        t["initial.ktheta"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.initial.ktheta = static_cast<int>(to_long(key, v));
        };
        t["initial.smooth"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.initial.smooth = static_cast<int>(to_long(key, v));
        };
        t["initial.seed"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.initial.seed = to_u64(key, v);
        };

        t["output.dir"] = [](RunConfig& c, const std::string&, const std::string& v) {
            c.output.dir = v;
        };
        t["output.snapshot_stride"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.output.snapshot_stride = static_cast<int>(to_long(key, v));
        };
        t["output.monitors"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.output.monitors = to_bool(key, v);
        };
        return t;
    }();
    return table;
}

} // namespace

void RunConfig::validate() const {
    physics.validate();
    solver.validate();
    if (n < 4) throw std::invalid_argument("config: grid.n must be >= 4");
    if (dim == 2 && ny < 4) throw std::invalid_argument("config: grid.ny must be >= 4");
    if (!(length > 0) || (dim == 2 && !(ly > 0)))
        throw std::invalid_argument("config: domain lengths must be positive");
    if (!(t_final > 0)) throw std::invalid_argument("config: time.t_final must be positive");
    if (initial.smooth < 0)
        throw std::invalid_argument("config: initial.smooth must be >= 0");
    if (output.snapshot_stride < 0)
        throw std::invalid_argument("config: output.snapshot_stride must be >= 0");
    if (initial.generator == "cosine" && !(initial.theta0 - std::abs(initial.amptheta) > 0))
        throw std::invalid_argument(
            "config: cosine generator needs theta0 - |amptheta| > 0 to keep the temperature positive");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config: empty key or value on line " + std::to_string(lineno));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw std::invalid_argument("config: unknown key '" + key + "' on line " + std::to_string(lineno));
        it->second(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    const Parameters& p = c.physics;
    out << "physics.m = " << fmt(p.m) << "\n"
        << "physics.alpha = " << fmt(p.alpha) << "\n"
        << "physics.lambda = " << fmt(p.lambda) << "\n"
        << "physics.c_v = " << fmt(p.c_v) << "\n"
        << "physics.k0 = " << fmt(p.k0) << "\n"
        << "physics.k1 = " << fmt(p.k1) << "\n"
        << "physics.beta = " << fmt(p.beta) << "\n"
        << "physics.eps1 = " << fmt(p.eps1) << "\n"
        << "physics.eps2 = " << fmt(p.eps2) << "\n"
        << "physics.eps3 = " << fmt(p.eps3) << "\n"
        << "physics.eps4 = " << fmt(p.eps4) << "\n"
        << "physics.p1 = " << fmt(p.p1) << "\n"
        << "physics.p2 = " << fmt(p.p2) << "\n"
        << "physics.p3 = " << fmt(p.p3) << "\n"
        << "physics.p4 = " << fmt(p.p4) << "\n"
        << "grid.dim = " << c.dim << "\n"
        << "grid.n = " << c.n << "\n"
        << "grid.ny = " << c.ny << "\n"
        << "grid.length = " << fmt(c.length) << "\n"
        << "grid.ly = " << fmt(c.ly) << "\n"
        << "solver.dt_init = " << fmt(c.solver.dt_init) << "\n"
        << "solver.dt_min = " << fmt(c.solver.dt_min) << "\n"
        << "solver.dt_max = " << fmt(c.solver.dt_max) << "\n"
        << "solver.newton_tol = " << fmt(c.solver.newton_tol) << "\n"
        << "solver.newton_max_iter = " << c.solver.newton_max_iter << "\n"
        << "solver.theta_floor = " << fmt(c.solver.theta_floor) << "\n"
        << "solver.growth_factor = " << fmt(c.solver.growth_factor) << "\n"
        << "solver.linear_solver = "
        << (c.solver.linear_solver == LinearSolver::dense_direct ? "dense_direct" : "krylov") << "\n"
        << "solver.jacobian = "
        << (c.solver.jacobian == JacobianMode::analytic ? "analytic" : "fd") << "\n"
        << "solver.isothermal = " << (c.solver.isothermal ? "true" : "false") << "\n"
        << "solver.krylov_forcing = " << fmt(c.solver.krylov_forcing) << "\n"
        << "solver.grow_iter_threshold = " << c.solver.grow_iter_threshold << "\n"
        << "time.t_final = " << fmt(c.t_final) << "\n"
        << "initial.generator = " << c.initial.generator << "\n"
        << "initial.u0 = " << fmt(c.initial.u0) << "\n"
        << "initial.theta0 = " << fmt(c.initial.theta0) << "\n"
        << "initial.amp = " << fmt(c.initial.amp) << "\n"
        << "initial.mean_u = " << fmt(c.initial.mean_u) << "\n"
        << "initial.ku = " << c.initial.ku << "\n"
        << "initial.ampu = " << fmt(c.initial.ampu) << "\n"
        << "initial.ktheta = " << c.initial.ktheta << "\n"
        << "initial.amptheta = " << fmt(c.initial.amptheta) << "\n"
        << "initial.smooth = " << c.initial.smooth << "\n"
        << "initial.seed = " << c.initial.seed << "\n"
        << "output.dir = " << c.output.dir << "\n"
        << "output.snapshot_stride = " << c.output.snapshot_stride << "\n"
        << "output.monitors = " << (c.output.monitors ? "true" : "false") << "\n";
    return out.str();
}

State make_initial(const InitialSpec& spec, const Grid& g, std::uint64_t seed) {
    State s;
    s.t = 0.0;
    if (spec.generator == "uniform") {
        s.u = Field(g, spec.u0);
        s.theta = Field(g, spec.theta0);
    } else if (spec.generator == "spinodal") {
        s.u = Field(g);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-spec.amp, spec.amp);
        for (double& x : s.u.v) x = dist(rng);
        const double mu = mean(s.u);
        for (double& x : s.u.v) x += spec.mean_u - mu;
        // Optional band-limiting: each pass damps the grid-scale modes by
        // about half while the conservative flux form keeps the mean exact.
        const double c = 0.125 * std::min(g.hx, g.dim == 2 ? g.hy : g.hx)
                       * std::min(g.hx, g.dim == 2 ? g.hy : g.hx);
        for (int pass = 0; pass < spec.smooth; ++pass) {
            const Field lap = laplacian_neumann(s.u);
            for (int i = 0; i < s.u.size(); ++i) s.u[i] += c * lap[i];
        }
        s.theta = Field(g, spec.theta0);
    } else if (spec.generator == "cosine") {
        if (!(spec.theta0 - std::abs(spec.amptheta) > 0))
            throw std::invalid_argument(
                "make_initial: cosine generator needs theta0 - |amptheta| > 0");
        const double wu = spec.ku * std::numbers::pi / g.lx;
        const double wt = spec.ktheta * std::numbers::pi / g.lx;
        s.u = make_field(g, [&](double x, double) {
            return spec.mean_u + spec.ampu * std::cos(wu * x);
        });
        s.theta = make_field(g, [&](double x, double) {
            return spec.theta0 + spec.amptheta * std::cos(wt * x);
        });
    } else {
        throw std::invalid_argument("make_initial: unknown generator '" + spec.generator + "'");
    }
    if (!(s.min_theta() > 0.0))
        throw std::invalid_argument("make_initial: generator produced nonpositive temperature");
    return s;
}

} // namespace thermch
