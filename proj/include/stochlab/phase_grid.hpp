#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stochlab {

// Uniform cell-centred lattice: cell i covers [lo + i*step, lo + (i+1)*step).
struct Axis {
    double lo = 0.0;
    double step = 1.0;
    std::size_t n = 0;

    static Axis spanning(double lo, double hi, std::size_t n) { return Axis{lo, (hi - lo) / static_cast<double>(n), n}; }
    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * step; }
    double hi() const { return lo + step * static_cast<double>(n); }
    // Cell containing v, or -1 when outside.
    long locate(double v) const;
};

// Probability density Phi(x, p) in one spatial dimension, stored x-major:
// density[i * p_axis.n + j] is the value at (x_i, p_j).
struct PhaseSpaceGrid {
    Axis x_axis;
    Axis p_axis;
    std::vector<double> density;
    double time = 0.0;

    PhaseSpaceGrid() = default;
    PhaseSpaceGrid(Axis x, Axis p, double t = 0.0) : x_axis(x), p_axis(p), density(x.n * p.n, 0.0), time(t) {}

    double& at(std::size_t i, std::size_t j) { return density[i * p_axis.n + j]; }
    double at(std::size_t i, std::size_t j) const { return density[i * p_axis.n + j]; }
    double cell_area() const { return x_axis.step * p_axis.step; }

    std::vector<double> position_marginal() const;  // integral over p, per x cell
    std::vector<double> momentum_marginal() const;  // integral over x, per p cell
};

// Flat little-endian snapshot: u64 Nx, u64 Np, f64 x_lo, dx, p_lo, dp, time, then Nx*Np f64.
void write_phase_grid(const std::string& path, const PhaseSpaceGrid& grid);
PhaseSpaceGrid read_phase_grid(const std::string& path);

}  // namespace stochlab
