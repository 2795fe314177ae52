#pragma once

// Uniform cell-centered mesh in 1D/2D with homogeneous Neumann (no-flux)
// boundary semantics, discrete operators with summation-by-parts structure,
// and quadrature/norm utilities.
//
// The stencil kernels are OpenMP-parallel; thermch::ref holds plain serial
// implementations of the same arithmetic used as a reference in tests and
// benchmarks.  Reductions use a fixed block order so results are
// bit-identical regardless of thread count.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace thermch {

struct Grid {
    int dim = 1;
    int nx = 4, ny = 1;
    double lx = 1.0, ly = 1.0;
    double hx = 0.25, hy = 1.0;

    static Grid make_1d(int n, double length) {
        if (n < 4 || length <= 0)
            throw std::invalid_argument("Grid: need n >= 4 and positive length");
        Grid g;
        g.dim = 1; g.nx = n; g.ny = 1;
        g.lx = length; g.ly = 1.0;
        g.hx = length / n; g.hy = 1.0;
        return g;
    }

    static Grid make_2d(int nx, int ny, double lx, double ly) {
        if (nx < 4 || ny < 4 || lx <= 0 || ly <= 0)
            throw std::invalid_argument("Grid: need nx, ny >= 4 and positive lengths");
        Grid g;
        g.dim = 2; g.nx = nx; g.ny = ny;
        g.lx = lx; g.ly = ly;
        g.hx = lx / nx; g.hy = ly / ny;
        return g;
    }

    int cells() const { return nx * ny; }
    double cell_volume() const { return dim == 1 ? hx : hx * hy; }
    double volume() const { return cells() * cell_volume(); }
    double x(int i) const { return (i + 0.5) * hx; }
    double y(int j) const { return dim == 1 ? 0.0 : (j + 0.5) * hy; }

    bool operator==(const Grid&) const = default;
};

struct Field {
    Grid grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
    double& at(int i, int j) { return v[j * grid.nx + i]; }
    double at(int i, int j) const { return v[j * grid.nx + i]; }
    int size() const { return static_cast<int>(v.size()); }

    bool finite() const;
};

// Fills a field from a function of the cell-center coordinates.
Field make_field(const Grid& g, const std::function<double(double, double)>& fn);

enum class FaceAveraging { harmonic, arithmetic };

// Deterministic reduction: fixed 1024-cell blocks summed independently,
// block sums combined in index order.  The blocking defines the canonical
// summation order for the whole library.
inline constexpr int kSumBlock = 1024;

template <class TermFn>
double deterministic_sum(int n, TermFn&& term) {
    const int nblocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nblocks; ++b) {
        const int lo = b * kSumBlock;
        const int hi = lo + kSumBlock < n ? lo + kSumBlock : n;
        double s = 0.0;
        for (int i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    }
    double total = 0.0;
    for (int b = 0; b < nblocks; ++b) total += partial[b];
    return total;
}

// 3-point (1D) / 5-point (2D) Laplacian in conservative flux form with
// zero-flux boundary faces.  Its discrete integral telescopes to zero.
Field laplacian_neumann(const Field& f);

// Conservative variable-coefficient diffusion div(a grad f) with the cell
// coefficient averaged to faces (harmonic by default) and zero boundary flux.
Field div_coeff_grad(const Field& a_cell, const Field& f,
                     FaceAveraging averaging = FaceAveraging::harmonic);

double integrate(const Field& f);
double mean(const Field& f);
double norm_L2(const Field& f);
double norm_Linf(const Field& f);

// Face-difference approximation of the H1 seminorm squared.  Faces adjacent
// to the boundary carry an extended weight so the quadrature is exact for
// fields linear in the coordinates.
double h1_seminorm_sq(const Field& f);

// Plain face inner product sum_faces w(face) (df/h)(dg/h) h^dim, the exact
// summation-by-parts partner of laplacian_neumann: integrate(g * lap f) =
// -face_inner_product(f, g) up to round-off.  The optional face weight is
// evaluated from the two adjacent cell indices.
double face_inner_product(const Field& f, const Field& g);
double weighted_face_inner_product(
    const Field& f, const Field& g,
    const std::function<double(int left, int right)>& face_weight);

namespace ref {
// Serial reference kernels: independent straightforward loops, same
// summation-order convention, no OpenMP.  Kept for testing and benchmarks.
Field laplacian_neumann(const Field& f);
Field div_coeff_grad(const Field& a_cell, const Field& f,
                     FaceAveraging averaging = FaceAveraging::harmonic);
double integrate(const Field& f);
} // namespace ref

} // namespace thermch
