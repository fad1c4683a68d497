#include "stochlab/spectral.hpp"

#include "stochlab/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace stochlab {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void run_fft(const GridSpec& grid, ComplexField& f, int sign) {
    if (f.size() != grid.size()) throw UsageError("field size does not match grid");
    std::vector<int> dims(grid.n.begin(), grid.n.end());
    auto* data = reinterpret_cast<fftw_complex*>(f.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), data, data, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("FFTW could not create a plan");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

template <class Fn>
void for_each_line(const GridSpec& grid, std::size_t axis, Fn&& fn) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t n = grid.n[axis];
    const std::size_t outer = grid.size() / (n * stride);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t s = 0; s < stride; ++s) fn(o * n * stride + s, stride, n);
}

ComplexField fd4_derivative(const GridSpec& grid, const ComplexField& f, std::size_t axis, int order) {
    ComplexField out(f.size());
    const double h = grid.step[axis];
    for_each_line(grid, axis, [&](std::size_t base, std::size_t stride, std::size_t n) {
        auto at = [&](long i) -> cplx {
            if (i < 0 || i >= static_cast<long>(n)) return 0.0;
            return f[base + static_cast<std::size_t>(i) * stride];
        };
        for (long i = 0; i < static_cast<long>(n); ++i) {
            cplx v;
            if (order == 1)
                v = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
            else
                v = (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) / (12.0 * h * h);
            out[base + static_cast<std::size_t>(i) * stride] = v;
        }
    });
    return out;
}

}  // namespace

void fft_forward(const GridSpec& grid, ComplexField& f) { run_fft(grid, f, FFTW_FORWARD); }

void fft_backward(const GridSpec& grid, ComplexField& f) {
    run_fft(grid, f, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(grid.size());
    for (auto& v : f) v *= inv;
}

std::vector<double> wavenumbers(const GridSpec& grid, std::size_t axis) {
    const std::size_t n = grid.n[axis];
    const double dk = 2.0 * M_PI / grid.length(axis);
    std::vector<double> k(n);
    for (std::size_t m = 0; m < n; ++m) {
        const long mm = m <= n / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n);
        k[m] = dk * static_cast<double>(mm);
    }
    return k;
}

ComplexField apply_momentum_powers(const GridSpec& grid, const ComplexField& f, const std::vector<int>& powers,
                                   double hbar) {
    if (powers.size() != grid.axes()) throw UsageError("one momentum power per grid axis is required");
    ComplexField g = f;
    bool any = false;
    for (int p : powers) any = any || p != 0;
    if (!any) return g;
    fft_forward(grid, g);
    // Per-axis factor tables so the inner loop is a product of lookups.
    std::vector<std::vector<double>> factor(grid.axes());
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        const auto k = wavenumbers(grid, a);
        factor[a].resize(k.size());
        for (std::size_t m = 0; m < k.size(); ++m) {
            double v = std::pow(hbar * k[m], powers[a]);
            if (powers[a] % 2 == 1 && grid.n[a] % 2 == 0 && m == grid.n[a] / 2) v = 0.0;
            factor[a][m] = v;
        }
    }
    const std::size_t axes = grid.axes();
    std::vector<std::size_t> idx(axes, 0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        double w = 1.0;
        for (std::size_t a = 0; a < axes; ++a) w *= factor[a][idx[a]];
        g[flat] *= w;
        for (std::size_t a = axes; a-- > 0;) {
            if (++idx[a] < grid.n[a]) break;
            idx[a] = 0;
        }
    }
    fft_backward(grid, g);
    return g;
}

ComplexField derivative(const GridSpec& grid, const ComplexField& f, std::size_t axis, int order,
                        DerivativeMode mode) {
    if (order != 1 && order != 2) throw UsageError("derivative order must be 1 or 2");
    if (axis >= grid.axes()) throw UsageError("derivative axis out of range");
    if (mode == DerivativeMode::FourthOrder) return fd4_derivative(grid, f, axis, order);
    // d/dx = (i/hbar) p with hbar = 1.
    std::vector<int> powers(grid.axes(), 0);
    powers[axis] = order;
    ComplexField g = apply_momentum_powers(grid, f, powers, 1.0);
    const cplx scale = order == 1 ? cplx(0.0, 1.0) : cplx(-1.0, 0.0);
    for (auto& v : g) v *= scale;
    return g;
}

ComplexField mixed_derivative(const GridSpec& grid, const ComplexField& f, std::size_t a, std::size_t b,
                              DerivativeMode mode) {
    if (a == b) return derivative(grid, f, a, 2, mode);
    if (mode == DerivativeMode::FourthOrder) return fd4_derivative(grid, fd4_derivative(grid, f, a, 1), b, 1);
    std::vector<int> powers(grid.axes(), 0);
    powers[a] = 1;
    powers[b] = 1;
    ComplexField g = apply_momentum_powers(grid, f, powers, 1.0);
    for (auto& v : g) v = -v;
    return g;
}

}  // namespace stochlab
