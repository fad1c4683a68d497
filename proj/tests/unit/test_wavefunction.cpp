#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/spectral.hpp"
#include "stochlab/wavefunction.hpp"

#include <cmath>
#include <filesystem>

using namespace stochlab;

namespace {

double moment(const WaveFunction& psi, std::size_t axis, int power) {
    RealField f(psi.grid.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = std::norm(psi.amplitude[k]) * std::pow(psi.grid.coordinate_of(k, axis), power);
    return integrate(psi.grid, f);
}

}  // namespace

TEST_CASE("grid layout") {
    const auto g = GridSpec::cube(3, 8, 2.0);
    CHECK(g.size() == 512);
    CHECK(g.stride(2) == 1);
    CHECK(g.stride(0) == 64);
    CHECK(g.step[0] == doctest::Approx(0.5));
    CHECK(g.coordinate(1, 0) == doctest::Approx(-2.0));
    CHECK(g.coordinate_of(64 * 3 + 8 * 2 + 5, 0) == doctest::Approx(-0.5));
    CHECK(g.coordinate_of(64 * 3 + 8 * 2 + 5, 2) == doctest::Approx(0.5));
    CHECK(g.cell_volume() == doctest::Approx(0.125));
    CHECK_THROWS(GridSpec::cube(1, 2, 1.0).validate());
}

TEST_CASE("Gaussian packet moments") {
    const auto g = GridSpec::cube(1, 256, 12.0);
    GaussianPacket gp{{0.7}, {1.3}, {2.0}, {0.0}};
    const auto psi = gaussian_packet(g, 1, 1, gp);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(moment(psi, 0, 1) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(moment(psi, 0, 2) - 0.49 == doctest::Approx(1.69).epsilon(1e-10));
    // <p> = hbar k via the spectral momentum operator.
    const auto pp = apply_momentum_powers(g, psi.amplitude, {1}, 1.0);
    CHECK(inner_product(g, psi.amplitude, pp).real() == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("oscillator eigenstates are orthonormal") {
    PhysicalConstants c;
    const auto g = GridSpec::cube(1, 128, 10.0);
    std::vector<WaveFunction> states;
    for (int n = 0; n <= 2; ++n) states.push_back(harmonic_eigenstate(g, 1, 1, c, {1.3}, {n}));
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b) {
            const cplx ip = inner_product(g, states[a].amplitude, states[b].amplitude);
            CHECK(std::abs(ip - cplx(a == b ? 1.0 : 0.0)) < 1e-12);
        }
    // <x^2> = (n + 1/2) hbar / (mu omega)
    CHECK(moment(states[2], 0, 2) == doctest::Approx(2.5 / 1.3).epsilon(1e-10));
    CHECK_THROWS_AS(harmonic_eigenstate(g, 1, 1, c, {1.0}, {3}), UsageError);
}

TEST_CASE("plane waves and derivatives") {
    const auto g = GridSpec::cube(1, 64, 4.0);
    const auto psi = plane_wave(g, 1, 1, {3});
    const double k = 2 * M_PI * 3 / g.length(0);
    const auto d1 = derivative(g, psi.amplitude, 0, 1, DerivativeMode::Spectral);
    const auto d2 = derivative(g, psi.amplitude, 0, 2, DerivativeMode::Spectral);
    double err1 = 0, err2 = 0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        err1 = std::max(err1, std::abs(d1[i] - cplx(0, k) * psi.amplitude[i]));
        err2 = std::max(err2, std::abs(d2[i] + k * k * psi.amplitude[i]));
    }
    CHECK(err1 < 1e-12);
    CHECK(err2 < 1e-11);

    // Fourth-order stencil on a smooth localised function: error scales as h^4.
    auto errs = [](std::size_t n) {
        const auto gg = GridSpec::cube(1, n, 10.0);
        const auto p = gaussian_packet(gg, 1, 1, {{0.0}, {1.0}, {0.0}, {0.0}});
        const auto d = derivative(gg, p.amplitude, 0, 1, DerivativeMode::FourthOrder);
        const auto ref = derivative(gg, p.amplitude, 0, 1, DerivativeMode::Spectral);
        double e = 0;
        for (std::size_t i = 0; i < d.size(); ++i) e = std::max(e, std::abs(d[i] - ref[i]));
        return e;
    };
    const double order = std::log2(errs(64) / errs(128));
    CHECK(order > 3.7);
}

TEST_CASE("mixed derivative of a separable product") {
    const auto g = GridSpec::cube(2, 32, 6.0);
    const auto psi = gaussian_packet(g, 1, 2, {{0.3, -0.4}, {1.0, 0.8}, {0.5, 1.0}, {0.0, 0.0}});
    const auto dxy = mixed_derivative(g, psi.amplitude, 0, 1, DerivativeMode::Spectral);
    const auto dx = derivative(g, psi.amplitude, 0, 1, DerivativeMode::Spectral);
    const auto dydx = derivative(g, dx, 1, 1, DerivativeMode::Spectral);
    double e = 0;
    for (std::size_t i = 0; i < dxy.size(); ++i) e = std::max(e, std::abs(dxy[i] - dydx[i]));
    CHECK(e < 1e-10);
}

TEST_CASE("correlated Gaussian has the requested precision") {
    const auto g = GridSpec::cube(2, 64, 8.0);
    // Q = [[2, 0.6], [0.6, 1]] -> covariance Q^-1
    const auto psi = correlated_gaussian(g, 1, 2, {2.0, 0.6, 0.6, 1.0}, {0.0, 0.0});
    RealField xy(g.size());
    for (std::size_t k = 0; k < xy.size(); ++k)
        xy[k] = std::norm(psi.amplitude[k]) * g.coordinate_of(k, 0) * g.coordinate_of(k, 1);
    const double det = 2.0 - 0.36;
    CHECK(integrate(g, xy) == doctest::Approx(-0.6 / det).epsilon(1e-8));
    CHECK(moment(psi, 0, 2) == doctest::Approx(1.0 / det).epsilon(1e-8));
}

TEST_CASE("wavefunction file round trip") {
    const auto g = GridSpec::cube(2, 16, 3.0);
    auto psi = gaussian_packet(g, 1, 2, {{0.1}, {0.9}, {0.4}, {0.2}});
    psi.time = 1.25;
    const auto path = std::filesystem::temp_directory_path() / "stochlab_psi.bin";
    write_wavefunction(path.string(), psi);
    const auto back = read_wavefunction(path.string());
    CHECK(back.amplitude == psi.amplitude);
    CHECK(back.time == 1.25);
    CHECK(back.grid.n == psi.grid.n);
    CHECK(back.dim == 2);
    std::filesystem::remove(path);
}
