#pragma once

#include "stochlab/model.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace stochlab {

using cplx = std::complex<double>;
using ComplexField = std::vector<cplx>;
using RealField = std::vector<double>;

// Uniform node lattice x_i = lo + i*step, i < n, per axis. Arrays over the
// lattice are row-major with the last axis fastest. Spectral operations treat
// the box as periodic with length n*step.
struct GridSpec {
    std::vector<std::size_t> n;
    std::vector<double> lo;
    std::vector<double> step;

    // `axes` axes of `points` nodes covering [-half_width, half_width).
    static GridSpec cube(std::size_t axes, std::size_t points, double half_width);

    std::size_t axes() const { return n.size(); }
    std::size_t size() const;
    std::size_t stride(std::size_t axis) const;
    double cell_volume() const;
    double coordinate(std::size_t axis, std::size_t i) const { return lo[axis] + static_cast<double>(i) * step[axis]; }
    double length(std::size_t axis) const { return static_cast<double>(n[axis]) * step[axis]; }
    // Coordinate along `axis` of flat index `flat`.
    double coordinate_of(std::size_t flat, std::size_t axis) const;
    void validate() const;
};

// Amplitude on a grid with particles*dim axes; axis (alpha*dim + i) is
// component i of particle alpha.
struct WaveFunction {
    GridSpec grid;
    int particles = 1;
    int dim = 1;
    ComplexField amplitude;
    double time = 0.0;

    WaveFunction() = default;
    WaveFunction(GridSpec g, int particles, int dim);

    std::size_t axis_of(int particle, int component) const { return static_cast<std::size_t>(particle * dim + component); }
    double norm() const;
    void normalize();
};

double integrate(const GridSpec& grid, const RealField& f);
cplx integrate(const GridSpec& grid, const ComplexField& f);
// sum conj(a) b dV
cplx inner_product(const GridSpec& grid, const ComplexField& a, const ComplexField& b);

// Product Gaussian per axis: |psi|^2 has mean `center` and standard deviation
// `sigma`; the phase is wavenumber*(x - center) + chirp*(x - center)^2.
struct GaussianPacket {
    std::vector<double> center;
    std::vector<double> sigma;
    std::vector<double> wavenumber;
    std::vector<double> chirp;
};

// All builders normalise on the lattice.
WaveFunction gaussian_packet(const GridSpec& grid, int particles, int dim, const GaussianPacket& packet);

// Product of 1D oscillator eigenfunctions with quanta n_a <= 2 per axis;
// omega given per axis.
WaveFunction harmonic_eigenstate(const GridSpec& grid, int particles, int dim, const PhysicalConstants& consts,
                                 const std::vector<double>& omega, const std::vector<int>& quanta);

// Box-normalised exp(i k.x) with k_a = 2 pi mode_a / L_a.
WaveFunction plane_wave(const GridSpec& grid, int particles, int dim, const std::vector<int>& mode);

// psi ~ exp(-(x-c)^T Q (x-c) / 4) so that |psi|^2 has precision matrix Q.
// Q is row-major over all grid axes.
WaveFunction correlated_gaussian(const GridSpec& grid, int particles, int dim, const std::vector<double>& precision,
                                 const std::vector<double>& center);

// Header: u64 axes, per axis (u64 n, f64 lo, f64 step), u64 particles, u64 dim, f64 time; body: (re, im) pairs.
void write_wavefunction(const std::string& path, const WaveFunction& psi);
WaveFunction read_wavefunction(const std::string& path);

}  // namespace stochlab
