#include "thermch/grid.hpp"

#include <algorithm>
#include <cmath>

namespace thermch {

bool Field::finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Field make_field(const Grid& g, const std::function<double(double, double)>& fn) {
    Field f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.at(i, j) = fn(g.x(i), g.y(j));
    return f;
}

// Fluxes are written as (f_R - f_L)/h and the cell update as the difference
// of the two face fluxes divided by h, so the discrete integral telescopes
// and div_coeff_grad with a == 1 reproduces this arithmetic exactly.
Field laplacian_neumann(const Field& f) {
    const Grid& g = f.grid;
    Field out(g);
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c = f.at(i, j);
            const double fe = i + 1 < nx ? (f.at(i + 1, j) - c) / hx : 0.0;
            const double fw = i > 0 ? (c - f.at(i - 1, j)) / hx : 0.0;
            double lap = (fe - fw) / hx;
            if (g.dim == 2) {
                const double fn = j + 1 < ny ? (f.at(i, j + 1) - c) / hy : 0.0;
                const double fs = j > 0 ? (c - f.at(i, j - 1)) / hy : 0.0;
                lap += (fn - fs) / hy;
            }
            out.at(i, j) = lap;
        }
    }
    return out;
}

namespace {
inline double face_avg(double al, double ar, FaceAveraging mode) {
    if (mode == FaceAveraging::arithmetic) return 0.5 * (al + ar);
    return 2.0 * al * ar / (al + ar);
}
} // namespace

Field div_coeff_grad(const Field& a_cell, const Field& f, FaceAveraging averaging) {
    const Grid& g = f.grid;
    if (a_cell.grid.cells() != g.cells())
        throw std::invalid_argument("div_coeff_grad: coefficient/field grid mismatch");
    for (double a : a_cell.v)
        if (!(a > 0.0))
            throw std::domain_error("div_coeff_grad: coefficient must be positive everywhere");

    Field out(g);
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c = f.at(i, j);
            const double ac = a_cell.at(i, j);
            double fe = 0.0, fw = 0.0;
            if (i + 1 < nx)
                fe = face_avg(ac, a_cell.at(i + 1, j), averaging) * ((f.at(i + 1, j) - c) / hx);
            if (i > 0)
                fw = face_avg(a_cell.at(i - 1, j), ac, averaging) * ((c - f.at(i - 1, j)) / hx);
            double d = (fe - fw) / hx;
            if (g.dim == 2) {
                double fn = 0.0, fs = 0.0;
                if (j + 1 < ny)
                    fn = face_avg(ac, a_cell.at(i, j + 1), averaging) * ((f.at(i, j + 1) - c) / hy);
                if (j > 0)
                    fs = face_avg(a_cell.at(i, j - 1), ac, averaging) * ((c - f.at(i, j - 1)) / hy);
                d += (fn - fs) / hy;
            }
            out.at(i, j) = d;
        }
    }
    return out;
}

double integrate(const Field& f) {
    return deterministic_sum(f.size(), [&](int i) { return f.v[i]; }) * f.grid.cell_volume();
}

double mean(const Field& f) {
    return deterministic_sum(f.size(), [&](int i) { return f.v[i]; }) / f.size();
}

double norm_L2(const Field& f) {
    const double s = deterministic_sum(f.size(), [&](int i) { return f.v[i] * f.v[i]; });
    return std::sqrt(s * f.grid.cell_volume());
}

double norm_Linf(const Field& f) {
    double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (int i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f.v[i]));
    return m;
}

double h1_seminorm_sq(const Field& f) {
    const Grid& g = f.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy;
    // x-faces: (ny rows) x (nx-1 faces); y-faces follow in the flat index.
    const int nxf = (nx - 1) * ny;
    const int nyf = g.dim == 2 ? nx * (ny - 1) : 0;
    auto term = [&](int q) {
        if (q < nxf) {
            const int j = q / (nx - 1);
            const int i = q % (nx - 1);
            const double d = (f.at(i + 1, j) - f.at(i, j)) / hx;
            const double wx = (i == 0 || i == nx - 2) ? 1.5 * hx : hx;
            return d * d * wx * (g.dim == 2 ? hy : 1.0);
        }
        const int r = q - nxf;
        const int j = r / nx;
        const int i = r % nx;
        const double d = (f.at(i, j + 1) - f.at(i, j)) / hy;
        const double wy = (j == 0 || j == ny - 2) ? 1.5 * hy : hy;
        return d * d * wy * hx;
    };
    return deterministic_sum(nxf + nyf, term);
}

double weighted_face_inner_product(
    const Field& f, const Field& g_field,
    const std::function<double(int, int)>& face_weight) {
    const Grid& g = f.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy;
    const int nxf = (nx - 1) * ny;
    const int nyf = g.dim == 2 ? nx * (ny - 1) : 0;
    auto term = [&](int q) {
        if (q < nxf) {
            const int j = q / (nx - 1);
            const int i = q % (nx - 1);
            const int l = j * nx + i, r = l + 1;
            const double df = (f.v[r] - f.v[l]) / hx;
            const double dg = (g_field.v[r] - g_field.v[l]) / hx;
            const double w = face_weight ? face_weight(l, r) : 1.0;
            return w * df * dg * hx * (g.dim == 2 ? hy : 1.0);
        }
        const int s = q - nxf;
        const int j = s / nx;
        const int i = s % nx;
        const int l = j * nx + i, r = l + nx;
        const double df = (f.v[r] - f.v[l]) / hy;
        const double dg = (g_field.v[r] - g_field.v[l]) / hy;
        const double w = face_weight ? face_weight(l, r) : 1.0;
        return w * df * dg * hy * hx;
    };
    return deterministic_sum(nxf + nyf, term);
}

double face_inner_product(const Field& f, const Field& g) {
    return weighted_face_inner_product(f, g, nullptr);
}

namespace ref {

Field laplacian_neumann(const Field& f) {
    const Grid& g = f.grid;
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f.at(i, j);
            const double fe = i + 1 < g.nx ? (f.at(i + 1, j) - c) / g.hx : 0.0;
            const double fw = i > 0 ? (c - f.at(i - 1, j)) / g.hx : 0.0;
            double lap = (fe - fw) / g.hx;
            if (g.dim == 2) {
                const double fn = j + 1 < g.ny ? (f.at(i, j + 1) - c) / g.hy : 0.0;
                const double fs = j > 0 ? (c - f.at(i, j - 1)) / g.hy : 0.0;
                lap += (fn - fs) / g.hy;
            }
            out.at(i, j) = lap;
        }
    }
    return out;
}

Field div_coeff_grad(const Field& a_cell, const Field& f, FaceAveraging averaging) {
    const Grid& g = f.grid;
    for (double a : a_cell.v)
        if (!(a > 0.0))
            throw std::domain_error("div_coeff_grad: coefficient must be positive everywhere");
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f.at(i, j);
            const double ac = a_cell.at(i, j);
            double fe = 0.0, fw = 0.0;
            if (i + 1 < g.nx)
                fe = face_avg(ac, a_cell.at(i + 1, j), averaging) * ((f.at(i + 1, j) - c) / g.hx);
            if (i > 0)
                fw = face_avg(a_cell.at(i - 1, j), ac, averaging) * ((c - f.at(i - 1, j)) / g.hx);
            double d = (fe - fw) / g.hx;
            if (g.dim == 2) {
                double fn = 0.0, fs = 0.0;
                if (j + 1 < g.ny)
                    fn = face_avg(ac, a_cell.at(i, j + 1), averaging) * ((f.at(i, j + 1) - c) / g.hy);
                if (j > 0)
                    fs = face_avg(a_cell.at(i, j - 1), ac, averaging) * ((c - f.at(i, j - 1)) / g.hy);
                d += (fn - fs) / g.hy;
            }
            out.at(i, j) = d;
        }
    }
    return out;
}

double integrate(const Field& f) {
    // Same fixed block order as the parallel reduction, executed serially.
    const int n = f.size();
    double total = 0.0;
    for (int lo = 0; lo < n; lo += kSumBlock) {
        const int hi = std::min(lo + kSumBlock, n);
        double s = 0.0;
        for (int i = lo; i < hi; ++i) s += f.v[i];
        total += s;
    }
    return total * f.grid.cell_volume();
}

} // namespace ref
} // namespace thermch
