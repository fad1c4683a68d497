#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/qsolver.hpp"

#include <cmath>

using namespace stochlab;

namespace {

double variance(const WaveFunction& psi, std::size_t axis) {
    RealField m1(psi.grid.size()), m2(psi.grid.size());
    for (std::size_t k = 0; k < m1.size(); ++k) {
        const double x = psi.grid.coordinate_of(k, axis), w = std::norm(psi.amplitude[k]);
        m1[k] = w * x;
        m2[k] = w * x * x;
    }
    const double mean = integrate(psi.grid, m1);
    return integrate(psi.grid, m2) - mean * mean;
}

// sigma^2(t) = sigma0^2 (1 + (hbar t / (2 mu sigma0^2))^2)
double free_variance(double s0, double t, const PhysicalConstants& c) {
    const double r = c.hbar * t / (2 * c.mass * s0 * s0);
    return s0 * s0 * (1 + r * r);
}

}  // namespace

TEST_CASE("free Gaussian spreads at the analytic rate") {
    PhysicalConstants c;
    c.mass = 1.3;
    c.hbar = 0.8;
    const auto g = GridSpec::cube(1, 1024, 40.0);
    const auto psi0 = gaussian_packet(g, 1, 1, {{-2.0}, {0.9}, {1.0}, {0.0}});
    const double t = 3.0;
    const auto spec = evolve_psi_steps(psi0, c, FieldSpec::free(1), 0.01, 300, 300, PsiScheme::Spectral).psi;
    CHECK(variance(spec, 0) == doctest::Approx(free_variance(0.9, t, c)).epsilon(1e-9));
    const auto cn = evolve_psi_steps(psi0, c, FieldSpec::free(1), 0.01, 300, 300, PsiScheme::CrankNicolson).psi;
    // Second-order stencil and time step: dx = 0.078 gives about 1e-3 relative.
    CHECK(variance(cn, 0) == doctest::Approx(free_variance(0.9, t, c)).epsilon(5e-3));
}

TEST_CASE("3D oscillator ground state is stationary with energy 3/2 hbar omega") {
    PhysicalConstants c;
    const double w = 1.4;
    const auto g = GridSpec::cube(3, 32, 8.0 * std::sqrt(c.hbar / (2 * c.mass * w)));
    const auto psi0 = harmonic_eigenstate(g, 1, 3, c, {w}, {0});
    const auto f = FieldSpec::harmonic(3, w);
    CHECK(hamiltonian_expectation(psi0, c, f) == doctest::Approx(1.5 * w).epsilon(1e-8));
    // Strang splitting carries an O(dt^2) phase error on the eigenstate.
    auto phase_error = [&](double dt) {
        auto psi = psi0;
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int s = 0; s < steps; ++s) evolve_psi_inplace(psi, c, f, dt, PsiScheme::Spectral);
        const cplx overlap = inner_product(g, psi0.amplitude, psi.amplitude);
        CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-6));
        return std::abs(std::remainder(std::arg(overlap) + 1.5 * w, 2 * M_PI));
    };
    const double coarse = phase_error(0.01), fine = phase_error(0.005);
    CHECK(coarse < 1e-4);
    CHECK(std::log2(coarse / fine) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("plane wave kinetic energy") {
    PhysicalConstants c;
    c.mass = 2.0;
    const auto g = GridSpec::cube(1, 64, 5.0);
    const auto psi = plane_wave(g, 1, 1, {4});
    const double k = 2 * M_PI * 4 / g.length(0);
    CHECK(hamiltonian_expectation(psi, c, FieldSpec::free(1)) == doctest::Approx(k * k / 4.0).epsilon(1e-12));
}

TEST_CASE("norm is preserved by both schemes over 1000 steps") {
    PhysicalConstants c;
    const auto g = GridSpec::cube(1, 256, 12.0);
    const auto psi0 = gaussian_packet(g, 1, 1, {{1.0}, {0.8}, {0.5}, {0.1}});
    const auto f = FieldSpec::harmonic(1, 1.0);
    const auto sp = evolve_psi_steps(psi0, c, f, 0.005, 1000, 100, PsiScheme::Spectral);
    const auto cn = evolve_psi_steps(psi0, c, f, 0.005, 1000, 100, PsiScheme::CrankNicolson);
    CHECK(std::abs(sp.psi.norm() - 1.0) <= 1e-10);
    CHECK(std::abs(cn.psi.norm() - 1.0) <= 1e-8);
    // Energy is conserved as well for time-independent fields.
    const double e0 = sp.records.front().energy;
    CHECK(std::abs(sp.records.back().energy - e0) < 1e-8 * 1000);
    CHECK(std::abs(cn.records.back().energy - cn.records.front().energy) < 1e-8 * 1000);
}

TEST_CASE("constant vector potential is a gauge shift of free evolution") {
    PhysicalConstants c;
    const auto g = GridSpec::cube(1, 256, 15.0);
    const double a0 = 0.7;
    const FieldSpec fa(1, preset::UniformVectorPotential{{a0, 0, 0}});
    const auto psi0 = gaussian_packet(g, 1, 1, {{0.0}, {1.0}, {0.3}, {0.0}});
    // Lattice oracle: gauge away the Peierls phase, evolve freely, gauge back.
    const double ec = c.coupling();
    WaveFunction shifted = psi0;
    for (std::size_t i = 0; i < g.size(); ++i)
        shifted.amplitude[i] *= std::exp(cplx(0, -ec * a0 * g.coordinate(0, i) / c.hbar));
    auto free = shifted;
    auto gauge = psi0;
    for (int s = 0; s < 200; ++s) {
        evolve_psi_inplace(free, c, FieldSpec::free(1), 0.01, PsiScheme::CrankNicolson);
        evolve_psi_inplace(gauge, c, fa, 0.01, PsiScheme::CrankNicolson);
    }
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(gauge.amplitude[i] -
                                     free.amplitude[i] * std::exp(cplx(0, ec * a0 * g.coordinate(0, i) / c.hbar))));
    CHECK(err < 1e-10);
    CHECK_THROWS_AS(evolve_psi_inplace(gauge, c, fa, 0.01, PsiScheme::Spectral), UsageError);
}

TEST_CASE("commutator identity") {
    PhysicalConstants c;
    SUBCASE("free fields give zero on both sides") {
        const auto g = GridSpec::cube(1, 128, 10.0);
        const auto psi = gaussian_packet(g, 1, 1, {{0.5}, {1.0}, {0.7}, {0.2}});
        const auto r = commutator_check(psi, c, FieldSpec::free(1));
        CHECK(std::abs(r.lhs[0]) < 1e-10);
        CHECK(std::abs(r.rhs[0]) < 1e-10);
    }
    SUBCASE("harmonic coherent state") {
        const double w = 1.2;
        const auto g = GridSpec::cube(1, 256, 12.0);
        const double s = std::sqrt(c.hbar / (2 * c.mass * w));
        const auto psi = gaussian_packet(g, 1, 1, {{1.1}, {s}, {0.4}, {0.0}});
        const auto r = commutator_check(psi, c, FieldSpec::harmonic(1, w));
        const cplx expect(0, c.hbar * c.mass * w * w * 1.1);
        CHECK(std::abs(r.lhs[0] - expect) < 1e-9);
        CHECK(std::abs(r.rhs[0] - expect) < 1e-9);
    }
    SUBCASE("uniform magnetic field") {
        const FieldSpec f(2, preset::UniformMagnetic{{0, 0, 0.6}});
        const auto g = GridSpec::cube(2, 96, 10.0);
        const auto psi = gaussian_packet(g, 1, 2, {{0.4, -0.3}, {1.0, 1.1}, {0.5, -0.2}, {0.1, 0.0}});
        const auto r = commutator_check(psi, c, f);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(r.residual[j]) < 1e-8);
            CHECK(std::abs(r.lhs[j]) > 1e-3);
        }
    }
}

TEST_CASE("two-dimensional CN with a magnetic field conserves norm and energy") {
    PhysicalConstants c;
    const FieldSpec f(2, preset::UniformMagnetic{{0, 0, 0.5}});
    const auto g = GridSpec::cube(2, 64, 10.0);
    const auto psi0 = gaussian_packet(g, 1, 2, {{0.0, 0.0}, {1.0, 1.0}, {0.5, 0.0}, {0.0, 0.0}});
    const auto run = evolve_psi_steps(psi0, c, f, 0.01, 200, 200, PsiScheme::CrankNicolson);
    CHECK(std::abs(run.psi.norm() - 1.0) < 1e-10);
    const double e0 = run.records.front().energy, e1 = run.records.back().energy;
    CHECK(std::abs(e1 - e0) < 1e-2 * e0);
}
