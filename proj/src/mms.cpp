#include "thermch/mms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace thermch {

namespace {
constexpr double kBinom[5][5] = {
    {1, 0, 0, 0, 0},
    {1, 1, 0, 0, 0},
    {1, 2, 1, 0, 0},
    {1, 3, 3, 1, 0},
    {1, 4, 6, 4, 1},
};
} // namespace

Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}

Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int n = 0; n < 5; ++n) {
        double s = 0.0;
        for (int k = 0; k <= n; ++k) s += kBinom[n][k] * a.d[k] * b.d[n - k];
        r.d[n] = s;
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b) {
    if (b.d[0] == 0.0) throw std::domain_error("jet division by zero value");
    Jet h;
    for (int n = 0; n < 5; ++n) {
        double s = a.d[n];
        for (int k = 0; k < n; ++k) s -= kBinom[n][k] * h.d[k] * b.d[n - k];
        h.d[n] = s / b.d[0];
    }
    return h;
}

Jet operator*(double s, const Jet& a) {
    Jet r;
    for (int i = 0; i < 5; ++i) r.d[i] = s * a.d[i];
    return r;
}

Jet operator+(double s, const Jet& a) {
    Jet r = a;
    r.d[0] += s;
    return r;
}

// Faa di Bruno composition up to order four with outer derivatives G.
static Jet compose(const double G[5], const Jet& f) {
    const double f1 = f.d[1], f2 = f.d[2], f3 = f.d[3], f4 = f.d[4];
    Jet r;
    r.d[0] = G[0];
    r.d[1] = G[1] * f1;
    r.d[2] = G[2] * f1 * f1 + G[1] * f2;
    r.d[3] = G[3] * f1 * f1 * f1 + 3.0 * G[2] * f1 * f2 + G[1] * f3;
    r.d[4] = G[4] * f1 * f1 * f1 * f1 + 6.0 * G[3] * f1 * f1 * f2
           + G[2] * (3.0 * f2 * f2 + 4.0 * f1 * f3) + G[1] * f4;
    return r;
}

Jet jet_pow(const Jet& a, double expo) {
    if (a.d[0] <= 0.0) throw std::domain_error("jet_pow requires positive base");
    double G[5];
    double c = 1.0;
    for (int k = 0; k < 5; ++k) {
        G[k] = c * std::pow(a.d[0], expo - k);
        c *= (expo - k);
    }
    return compose(G, a);
}

Jet jet_cos(double w, double x) {
    Jet r;
    const double c = std::cos(w * x), s = std::sin(w * x);
    r.d[0] = c;
    r.d[1] = -w * s;
    r.d[2] = -w * w * c;
    r.d[3] = w * w * w * s;
    r.d[4] = w * w * w * w * c;
    return r;
}

double ManufacturedSolution::u(double x, double t) const {
    const double w = k_u * std::numbers::pi / length;
    return mean_u + amp_u * std::cos(w * x) * std::exp(-decay * t);
}

double ManufacturedSolution::theta(double x, double t) const {
    const double w = k_theta * std::numbers::pi / length;
    return theta0 + amp_theta * std::cos(w * x) * std::exp(-decay * t);
}

Jet ManufacturedSolution::u_jet(double x, double t) const {
    const double w = k_u * std::numbers::pi / length;
    return mean_u + (amp_u * std::exp(-decay * t)) * jet_cos(w, x);
}

Jet ManufacturedSolution::theta_jet(double x, double t) const {
    const double w = k_theta * std::numbers::pi / length;
    return theta0 + (amp_theta * std::exp(-decay * t)) * jet_cos(w, x);
}

State ManufacturedSolution::exact_state(const Grid& g, double t) const {
    if (g.dim != 1)
        throw std::invalid_argument("manufactured solutions are 1D only");
    State s;
    s.t = t;
    s.u = make_field(g, [&](double x, double) { return u(x, t); });
    s.theta = make_field(g, [&](double x, double) { return theta(x, t); });
    return s;
}

MmsSources ManufacturedSolution::sources(const Parameters& p) const {
    ManufacturedSolution ms = *this;
    Parameters pp = p;

    auto chi_and_lap = [ms, pp](double x, double t, double& chi, double& lap_chi,
                                Jet& th) {
        const Jet uj = ms.u_jet(x, t);
        th = ms.theta_jet(x, t);
        const Jet fu = uj * uj * uj - uj;
        const Jet cj = (fu - pp.lambda * th - pp.alpha * uj.deriv(2)) / th;
        chi = cj.d[0];
        lap_chi = cj.d[2];
    };

    MmsSources src;
    src.source_u = [ms, pp, chi_and_lap](double x, double, double t) {
        double chi, lap_chi;
        Jet th;
        chi_and_lap(x, t, chi, lap_chi, th);
        const double wu = ms.k_u * std::numbers::pi / ms.length;
        const double u_t = -ms.decay * ms.amp_u * std::cos(wu * x) * std::exp(-ms.decay * t);
        return u_t - pp.m * lap_chi - reg_R1(chi, lap_chi, pp);
    };
    src.source_theta = [ms, pp, chi_and_lap](double x, double, double t) {
        double chi, lap_chi;
        Jet th;
        chi_and_lap(x, t, chi, lap_chi, th);
        const double wt = ms.k_theta * std::numbers::pi / ms.length;
        const double th_t = -ms.decay * ms.amp_theta * std::cos(wt * x) * std::exp(-ms.decay * t);
        const double Q_t = pp.c_v * th.d[0] * th_t;
        const Jet a = (pp.k0 + pp.k1 * jet_pow(th, pp.beta)) / (th * th);
        const double diff = a.d[1] * th.d[1] + a.d[0] * th.d[2];  // (a theta_x)_x
        return Q_t + pp.m * th.d[0] * lap_chi * (chi + pp.lambda) - diff
             + reg_R2(th.d[0], pp);
    };
    return src;
}

} // namespace thermch
