#pragma once

// Constitutive functions and physical parameters for the non-isothermal
// Cahn-Hilliard system.  Everything here is pointwise mathematics with no
// grid knowledge; all functions are pure and thread-safe.

#include <cmath>
#include <stdexcept>

namespace thermch {

struct Parameters {
    double m = 1.0;        // mobility
    double alpha = 1.0;    // interface-energy coefficient
    double lambda = 1.0;   // latent-heat coefficient
    double c_v = 1.0;      // specific-heat coefficient, Q(theta) = c_v/2 theta^2
    double k0 = 1.0;       // constant part of the conductivity
    double k1 = 1.0;       // power-law part of the conductivity
    double beta = 1.0;     // conductivity exponent, must stay in [0, 2)

    // Regularization magnitudes and exponents.  All eps default to zero
    // (unregularized system).
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;
    double p1 = 3.0, p2 = 3.0, p3 = 3.0, p4 = 2.0;

    void validate() const {
        if (m <= 0 || alpha <= 0 || lambda <= 0 || c_v <= 0 || k0 <= 0 || k1 <= 0)
            throw std::invalid_argument("Parameters: m, alpha, lambda, c_v, k0, k1 must be positive");
        if (beta < 0 || beta >= 2.0)
            throw std::invalid_argument("Parameters: beta must lie in [0, 2); beta >= 2 is not admissible");
        if (eps1 < 0 || eps2 < 0 || eps3 < 0 || eps4 < 0)
            throw std::invalid_argument("Parameters: regularization magnitudes must be nonnegative");
        if (p1 <= 0 || p2 <= 0 || p3 <= 0 || p4 <= 0)
            throw std::invalid_argument("Parameters: regularization exponents must be positive");
    }

    bool operator==(const Parameters&) const = default;
};

// Double-well potential F(u) = 1/4 (u^2 - 1)^2.
inline double potential_F(double u) {
    const double s = u * u - 1.0;
    return 0.25 * s * s;
}

// f = F', f(u) = u^3 - u.
inline double potential_f(double u) {
    return u * u * u - u;
}

inline double potential_fprime(double u) {
    return 3.0 * u * u - 1.0;
}

inline void require_positive_theta(double theta) {
    if (!(theta > 0.0))
        throw std::domain_error("temperature must be positive");
}

// Heat conductivity k(theta) = k0 + k1 theta^beta, theta > 0.
inline double conductivity_k(double theta, const Parameters& p) {
    require_positive_theta(theta);
    return p.k0 + p.k1 * std::pow(theta, p.beta);
}

inline double conductivity_kprime(double theta, const Parameters& p) {
    require_positive_theta(theta);
    return p.k1 * p.beta * std::pow(theta, p.beta - 1.0);
}

// Heat content Q(theta) = c_v/2 theta^2 and thermal entropy density
// Lambda(theta) = c_v theta.  Q' = theta Lambda'.
inline double heat_Q(double theta, const Parameters& p) {
    return 0.5 * p.c_v * theta * theta;
}

inline double entropy_Lambda(double theta, const Parameters& p) {
    return p.c_v * theta;
}

// Antiderivative kernel g with grad g(theta) = (k(theta)/theta) grad(1/theta):
// g(theta) = k0/(2 theta^2) + k1/((2-beta) theta^(2-beta)).
inline double kernel_g(double theta, const Parameters& p) {
    require_positive_theta(theta);
    return 0.5 * p.k0 / (theta * theta)
         + p.k1 / ((2.0 - p.beta) * std::pow(theta, 2.0 - p.beta));
}

// Rescaled chemical potential chi = (f(u) - lambda theta - alpha lap_u)/theta.
inline double chi_of(double u, double theta, double lap_u, const Parameters& p) {
    require_positive_theta(theta);
    return (potential_f(u) - p.lambda * theta - p.alpha * lap_u) / theta;
}

// mu = chi theta.
inline double mu_of(double chi, double theta) {
    return chi * theta;
}

// Ginzburg-Landau free energy density
// psi = alpha/2 |grad u|^2 - Q(theta) - lambda theta u + F(u).
inline double free_energy_density(double u, double grad_u_sq, double theta,
                                  const Parameters& p) {
    require_positive_theta(theta);
    return 0.5 * p.alpha * grad_u_sq - heat_Q(theta, p) - p.lambda * theta * u
         + potential_F(u);
}

// sign(x) |x|^p, the odd power appearing in both regularizing terms.
inline double odd_power(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p), x);
}

// R1 = eps1 |lap_chi|^(p1-1) lap_chi - eps2 |chi|^(p2-1) chi.
inline double reg_R1(double chi, double lap_chi, const Parameters& p) {
    double r = 0.0;
    if (p.eps1 != 0.0) r += p.eps1 * odd_power(lap_chi, p.p1);
    if (p.eps2 != 0.0) r -= p.eps2 * odd_power(chi, p.p2);
    return r;
}

// R2 = eps3 theta^p3 - eps4 theta^(-p4); negative for small theta when
// eps4 > 0, which is what keeps the heat equation sourced near theta = 0.
inline double reg_R2(double theta, const Parameters& p) {
    require_positive_theta(theta);
    double r = 0.0;
    if (p.eps3 != 0.0) r += p.eps3 * std::pow(theta, p.p3);
    if (p.eps4 != 0.0) r -= p.eps4 * std::pow(theta, -p.p4);
    return r;
}

} // namespace thermch
