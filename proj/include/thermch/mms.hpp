#pragma once

// Manufactured solutions for code verification.  Source terms are obtained
// by pushing the closed-form fields through the PDE with truncated-Taylor
// (jet) arithmetic, so they are exact to round-off rather than sampled by
// finite differences.  1D only.

#include "thermch/model.hpp"
#include "thermch/stepper.hpp"

namespace thermch {

// Value and spatial derivatives up to order four at a point.
struct Jet {
    double d[5] = {0, 0, 0, 0, 0};

    static Jet constant(double c) { Jet j; j.d[0] = c; return j; }
    // Derivatives shift down by k; the top coefficients become meaningless
    // and are zeroed, so use the result only up to order 4 - k.
    Jet deriv(int k) const {
        Jet r;
        for (int i = 0; i + k <= 4; ++i) r.d[i] = d[i + k];
        return r;
    }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet operator+(double s, const Jet& a);
Jet jet_pow(const Jet& a, double expo);
Jet jet_cos(double w, double x);  // cos(w x) and its derivatives

struct ManufacturedSolution {
    double length = 1.0;
    double mean_u = 0.0;
    double amp_u = 0.1;
    int k_u = 1;
    double theta0 = 1.0;
    double amp_theta = 0.2;
    int k_theta = 1;
    double decay = 1.0;  // both perturbations carry exp(-decay t)

    double u(double x, double t) const;
    double theta(double x, double t) const;
    Jet u_jet(double x, double t) const;
    Jet theta_jet(double x, double t) const;

    State exact_state(const Grid& g, double t) const;
    MmsSources sources(const Parameters& p) const;
};

} // namespace thermch
