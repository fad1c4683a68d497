#include "stochlab/phase_grid.hpp"

#include "stochlab/binary_io.hpp"

#include <charconv>
#include <cmath>

namespace stochlab {

long Axis::locate(double v) const {
    const double u = std::floor((v - lo) / step);
    if (!(u >= 0.0) || u >= static_cast<double>(n)) return -1;
    return static_cast<long>(u);
}

std::vector<double> PhaseSpaceGrid::position_marginal() const {
    std::vector<double> m(x_axis.n, 0.0);
    for (std::size_t i = 0; i < x_axis.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p_axis.n; ++j) s += at(i, j);
        m[i] = s * p_axis.step;
    }
    return m;
}

std::vector<double> PhaseSpaceGrid::momentum_marginal() const {
    std::vector<double> m(p_axis.n, 0.0);
    for (std::size_t i = 0; i < x_axis.n; ++i)
        for (std::size_t j = 0; j < p_axis.n; ++j) m[j] += at(i, j);
    for (auto& v : m) v *= x_axis.step;
    return m;
}

void write_phase_grid(const std::string& path, const PhaseSpaceGrid& grid) {
    io::BinaryWriter w(path);
    w.u64(grid.x_axis.n);
    w.u64(grid.p_axis.n);
    w.f64(grid.x_axis.lo);
    w.f64(grid.x_axis.step);
    w.f64(grid.p_axis.lo);
    w.f64(grid.p_axis.step);
    w.f64(grid.time);
    w.f64s(grid.density);
    w.close();
}

PhaseSpaceGrid read_phase_grid(const std::string& path) {
    io::BinaryReader r(path);
    const auto nx = r.u64();
    const auto np = r.u64();
    Axis x{r.f64(), r.f64(), nx};
    Axis p{r.f64(), r.f64(), np};
    PhaseSpaceGrid g(x, p, r.f64());
    g.density = r.f64s(nx * np);
    return g;
}

namespace io {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace io

}  // namespace stochlab
