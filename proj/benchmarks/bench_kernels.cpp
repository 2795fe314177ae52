// Timing comparison between the OpenMP stencil/reduction kernels and the
// serial reference implementations, and a cross-check that they agree.

#include "thermch/grid.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

using namespace thermch;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(
               clock::now().time_since_epoch())
        .count();
}

template <class Fn>
double time_ms(int reps, Fn&& fn) {
    fn();  // warm up
    const double t0 = now_ms();
    for (int r = 0; r < reps; ++r) fn();
    return (now_ms() - t0) / reps;
}

} // namespace

int main() {
    const int n = 1024;
    const Grid g = Grid::make_2d(n, n, 1.0, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    Field f(g), a(g);
    for (int i = 0; i < f.size(); ++i) {
        f[i] = dist(rng);
        a[i] = dist(rng);
    }

    const int reps = 20;
    std::printf("kernel benchmark, %dx%d grid, %d reps\n", n, n, reps);

    volatile double sink = 0;
    const double lap_par = time_ms(reps, [&] { sink = laplacian_neumann(f)[0]; });
    const double lap_ser = time_ms(reps, [&] { sink = ref::laplacian_neumann(f)[0]; });
    const double div_par = time_ms(reps, [&] { sink = div_coeff_grad(a, f)[0]; });
    const double div_ser = time_ms(reps, [&] { sink = ref::div_coeff_grad(a, f)[0]; });
    const double int_par = time_ms(reps, [&] { sink = integrate(f); });
    const double int_ser = time_ms(reps, [&] { sink = ref::integrate(f); });
    (void)sink;

    std::printf("%-18s %10s %10s %8s\n", "kernel", "omp (ms)", "serial", "speedup");
    std::printf("%-18s %10.3f %10.3f %8.2f\n", "laplacian", lap_par, lap_ser, lap_ser / lap_par);
    std::printf("%-18s %10.3f %10.3f %8.2f\n", "div_coeff_grad", div_par, div_ser, div_ser / div_par);
    std::printf("%-18s %10.3f %10.3f %8.2f\n", "integrate", int_par, int_ser, int_ser / int_par);

    // agreement check (bit-exact by construction)
    const Field lp = laplacian_neumann(f), ls = ref::laplacian_neumann(f);
    const Field dp = div_coeff_grad(a, f), ds = ref::div_coeff_grad(a, f);
    double max_diff = std::abs(integrate(f) - ref::integrate(f));
    for (int i = 0; i < f.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(lp[i] - ls[i]));
        max_diff = std::max(max_diff, std::abs(dp[i] - ds[i]));
    }
    std::printf("max |omp - serial| = %.3g\n", max_diff);
    return max_diff == 0.0 ? 0 : 1;
}
