#include "stochlab/wavefunction.hpp"

#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"

#include <cmath>

namespace stochlab {

namespace {

// Accepts a per-axis vector or a single value broadcast to every axis.
template <class T>
std::vector<T> per_axis(const std::vector<T>& v, std::size_t axes, T fallback, const char* what) {
    if (v.empty()) return std::vector<T>(axes, fallback);
    if (v.size() == 1) return std::vector<T>(axes, v[0]);
    if (v.size() != axes) throw UsageError(std::string(what) + ": expected 1 or " + std::to_string(axes) + " values");
    return v;
}

void check_layout(const GridSpec& grid, int particles, int dim) {
    grid.validate();
    if (particles < 1 || dim < 1 || static_cast<std::size_t>(particles * dim) != grid.axes())
        throw UsageError("grid axes must equal particles * dim");
}

// Product state from one complex function per axis.
template <class Fn>
WaveFunction product_state(const GridSpec& grid, int particles, int dim, Fn&& axis_factor) {
    WaveFunction psi(grid, particles, dim);
    std::vector<ComplexField> factors(grid.axes());
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        factors[a].resize(grid.n[a]);
        for (std::size_t i = 0; i < grid.n[a]; ++i) factors[a][i] = axis_factor(a, grid.coordinate(a, i));
    }
    std::vector<std::size_t> idx(grid.axes(), 0);
    for (std::size_t flat = 0; flat < psi.amplitude.size(); ++flat) {
        cplx v = 1.0;
        for (std::size_t a = 0; a < grid.axes(); ++a) v *= factors[a][idx[a]];
        psi.amplitude[flat] = v;
        for (std::size_t a = grid.axes(); a-- > 0;) {
            if (++idx[a] < grid.n[a]) break;
            idx[a] = 0;
        }
    }
    psi.normalize();
    return psi;
}

}  // namespace

GridSpec GridSpec::cube(std::size_t axes, std::size_t points, double half_width) {
    GridSpec g;
    g.n.assign(axes, points);
    g.lo.assign(axes, -half_width);
    g.step.assign(axes, 2.0 * half_width / static_cast<double>(points));
    return g;
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (auto v : n) s *= v;
    return s;
}

std::size_t GridSpec::stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t a = axis + 1; a < n.size(); ++a) s *= n[a];
    return s;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (double s : step) v *= s;
    return v;
}

double GridSpec::coordinate_of(std::size_t flat, std::size_t axis) const {
    return coordinate(axis, (flat / stride(axis)) % n[axis]);
}

void GridSpec::validate() const {
    if (n.empty() || lo.size() != n.size() || step.size() != n.size())
        throw ValidationError("grid", "axis metadata sizes disagree");
    for (std::size_t a = 0; a < n.size(); ++a) {
        if (n[a] < 4) throw ValidationError("grid", "each axis needs at least 4 points");
        if (!(step[a] > 0.0) || !std::isfinite(step[a]) || !std::isfinite(lo[a]))
            throw ValidationError("grid", "steps must be finite and positive");
    }
}

WaveFunction::WaveFunction(GridSpec g, int particles_, int dim_)
    : grid(std::move(g)), particles(particles_), dim(dim_), amplitude(grid.size(), cplx(0.0)) {
    check_layout(grid, particles, dim);
}

double WaveFunction::norm() const {
    double s = 0.0;
    for (const auto& v : amplitude) s += std::norm(v);
    return s * grid.cell_volume();
}

void WaveFunction::normalize() {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw NumericalError("cannot normalise a zero wavefunction");
    const double scale = 1.0 / std::sqrt(nrm);
    for (auto& v : amplitude) v *= scale;
}

double integrate(const GridSpec& grid, const RealField& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * grid.cell_volume();
}

cplx integrate(const GridSpec& grid, const ComplexField& f) {
    cplx s = 0.0;
    for (const auto& v : f) s += v;
    return s * grid.cell_volume();
}

cplx inner_product(const GridSpec& grid, const ComplexField& a, const ComplexField& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s * grid.cell_volume();
}

WaveFunction gaussian_packet(const GridSpec& grid, int particles, int dim, const GaussianPacket& packet) {
    check_layout(grid, particles, dim);
    const std::size_t axes = grid.axes();
    const auto c = per_axis(packet.center, axes, 0.0, "center");
    const auto s = per_axis(packet.sigma, axes, 1.0, "sigma");
    const auto k = per_axis(packet.wavenumber, axes, 0.0, "wavenumber");
    const auto b = per_axis(packet.chirp, axes, 0.0, "chirp");
    for (double v : s)
        if (!(v > 0.0)) throw ValidationError("sigma", "must be positive");
    return product_state(grid, particles, dim, [&](std::size_t a, double x) {
        const double d = x - c[a];
        return std::exp(cplx(-d * d / (4.0 * s[a] * s[a]), k[a] * d + b[a] * d * d));
    });
}

WaveFunction harmonic_eigenstate(const GridSpec& grid, int particles, int dim, const PhysicalConstants& consts,
                                 const std::vector<double>& omega, const std::vector<int>& quanta) {
    check_layout(grid, particles, dim);
    const std::size_t axes = grid.axes();
    const auto w = per_axis(omega, axes, 1.0, "omega");
    const auto q = per_axis(quanta, axes, 0, "quanta");
    for (std::size_t a = 0; a < axes; ++a) {
        if (q[a] < 0 || q[a] > 2) throw UsageError("oscillator quanta must be 0, 1 or 2");
        if (!(w[a] > 0.0)) throw ValidationError("omega", "must be positive");
    }
    return product_state(grid, particles, dim, [&](std::size_t a, double x) {
        const double xi = x * std::sqrt(consts.mass * w[a] / consts.hbar);
        const double hermite = q[a] == 0 ? 1.0 : q[a] == 1 ? 2.0 * xi : 4.0 * xi * xi - 2.0;
        return cplx(hermite * std::exp(-0.5 * xi * xi), 0.0);
    });
}

WaveFunction plane_wave(const GridSpec& grid, int particles, int dim, const std::vector<int>& mode) {
    check_layout(grid, particles, dim);
    const auto m = per_axis(mode, grid.axes(), 0, "mode");
    return product_state(grid, particles, dim, [&](std::size_t a, double x) {
        const double k = 2.0 * M_PI * m[a] / grid.length(a);
        return std::exp(cplx(0.0, k * (x - grid.lo[a])));
    });
}

WaveFunction correlated_gaussian(const GridSpec& grid, int particles, int dim, const std::vector<double>& precision,
                                 const std::vector<double>& center) {
    check_layout(grid, particles, dim);
    const std::size_t axes = grid.axes();
    if (precision.size() != axes * axes) throw UsageError("precision matrix must be axes x axes");
    const auto c = per_axis(center, axes, 0.0, "center");
    WaveFunction psi(grid, particles, dim);
    std::vector<double> d(axes);
    for (std::size_t flat = 0; flat < psi.amplitude.size(); ++flat) {
        for (std::size_t a = 0; a < axes; ++a) d[a] = grid.coordinate_of(flat, a) - c[a];
        double q = 0.0;
        for (std::size_t a = 0; a < axes; ++a)
            for (std::size_t b = 0; b < axes; ++b) q += d[a] * precision[a * axes + b] * d[b];
        psi.amplitude[flat] = std::exp(-0.25 * q);
    }
    psi.normalize();
    return psi;
}

void write_wavefunction(const std::string& path, const WaveFunction& psi) {
    io::BinaryWriter w(path);
    w.u64(psi.grid.axes());
    for (std::size_t a = 0; a < psi.grid.axes(); ++a) {
        w.u64(psi.grid.n[a]);
        w.f64(psi.grid.lo[a]);
        w.f64(psi.grid.step[a]);
    }
    w.u64(static_cast<std::uint64_t>(psi.particles));
    w.u64(static_cast<std::uint64_t>(psi.dim));
    w.f64(psi.time);
    w.complexes(psi.amplitude);
    w.close();
}

WaveFunction read_wavefunction(const std::string& path) {
    io::BinaryReader r(path);
    GridSpec g;
    const auto axes = r.u64();
    if (axes == 0 || axes > 6) throw Error("corrupt wavefunction snapshot '" + path + "'");
    for (std::uint64_t a = 0; a < axes; ++a) {
        g.n.push_back(r.u64());
        g.lo.push_back(r.f64());
        g.step.push_back(r.f64());
    }
    const int particles = static_cast<int>(r.u64());
    const int dim = static_cast<int>(r.u64());
    WaveFunction psi(g, particles, dim);
    psi.time = r.f64();
    psi.amplitude = r.complexes(g.size());
    return psi;
}

}  // namespace stochlab
