#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/fpe.hpp"
#include "stochlab/observables.hpp"

#include <cmath>
#include <random>

using namespace stochlab;

namespace {

NumericPolynomial numeric(const OperatorPolynomial& p, double hbar = 1.0) { return to_numeric(p, hbar); }

// H = sum_a (p_a^2 / 2mu + mu w^2 x_a^2 / 2) as a polynomial with mu = 1.
OperatorPolynomial oscillator_hamiltonian(int dim, double w2) {
    OperatorPolynomial h;
    for (int a = 0; a < dim; ++a) {
        h.add(ExactComplex(Rational(1, 2)), 0, {P(a), P(a)});
        h.add(ExactComplex(Rational(static_cast<std::int64_t>(std::lround(w2 * 2)), 4)), 0, {X(a), X(a)});
    }
    return h;
}

WaveFunction random_state(std::mt19937_64& rng, const GridSpec& g) {
    std::uniform_real_distribution<double> u(-0.5, 0.5), s(0.7, 1.2);
    GaussianPacket gp;
    for (int a = 0; a < 3; ++a) {
        gp.center.push_back(u(rng));
        gp.sigma.push_back(s(rng));
        gp.wavenumber.push_back(2 * u(rng));
        gp.chirp.push_back(0.4 * u(rng));
    }
    return gaussian_packet(g, 1, 3, gp);
}

}  // namespace

TEST_CASE("classical expectations over an ensemble") {
    PhysicalConstants c;
    const double w = 2.0;
    GaussianCloud cloud;
    // Ground-state-matched Gaussian: Var(x) = hbar / 2 mu w, Var(p) = hbar mu w / 2.
    for (int a = 0; a < 3; ++a) {
        cloud.sigma_x[a] = std::sqrt(0.5 / w);
        cloud.sigma_p[a] = std::sqrt(0.5 * w);
    }
    const auto ens = make_ensemble(c, FieldSpec::harmonic(3, w), 40000, cloud, 17);
    const auto one = classical_expectation(ens, numeric(OperatorPolynomial::constant(ExactComplex(1), 0)));
    CHECK(one.value == doctest::Approx(1.0));
    CHECK(one.standard_error == doctest::Approx(0.0));

    const auto h = classical_expectation(ens, numeric(oscillator_hamiltonian(3, w * w)));
    CHECK(std::abs(h.value - 1.5 * w) < 4 * h.standard_error);
    const auto lz = classical_expectation(ens, numeric(angular_momentum_component(0, 1)));
    CHECK(std::abs(lz.value) < 4 * lz.standard_error);
}

TEST_CASE("classical expectation on a phase-space grid") {
    PhysicalConstants c;
    const auto g = gaussian_phase_grid(Axis::spanning(-8, 8, 160), Axis::spanning(-8, 8, 160), 0.5, -0.3, 1.0, 0.7);
    OperatorPolynomial xp;
    xp.add(ExactComplex(1), 0, {X(0), P(0)});
    CHECK(classical_expectation(g, numeric(xp)) == doctest::Approx(-0.15).epsilon(1e-6));
    CHECK(classical_expectation(g, numeric(OperatorPolynomial::constant(ExactComplex(1), 0))) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quantum expectations on the oscillator ground state") {
    PhysicalConstants c;
    const auto g = GridSpec::cube(3, 32, 8.0 * std::sqrt(0.5));
    const auto psi = harmonic_eigenstate(g, 1, 3, c, {1.0}, {0});
    CHECK(std::abs(quantum_expectation(psi, OperatorPolynomial::constant(ExactComplex(1), 0), 1.0) - 1.0) < 1e-12);
    CHECK(std::abs(quantum_expectation(psi, angular_momentum_component(0, 1), 1.0)) < 1e-10);
    CHECK(std::abs(quantum_expectation(psi, angular_momentum_squared(3), 1.0)) < 1e-10);
    CHECK(quantum_expectation(psi, oscillator_hamiltonian(3, 1.0), 1.0).real() == doctest::Approx(1.5).epsilon(1e-10));
    // A word that is not normal-ordered is rejected.
    NumericPolynomial px{{1.0, {P(0), X(0)}}};
    CHECK_THROWS_AS(quantum_expectation(psi, px, 1.0), UsageError);
}

TEST_CASE("zero-point squared angular momentum") {
    PhysicalConstants c;
    c.hbar = 0.9;
    const double w = 1.0;
    const double sigma = std::sqrt(c.hbar / (2 * c.mass * w));
    const auto g = GridSpec::cube(3, 48, 8.0 * sigma);
    const auto ground = harmonic_eigenstate(g, 1, 3, c, {w}, {0});
    const double l2 = L2_classical(ground, c);
    CHECK(l2 == doctest::Approx(1.5 * c.hbar * c.hbar).epsilon(1e-8));

    // Rotor picture: <L^2> / 2I with I = 2 mu r^2 and r = sigma.
    const double inertia = 2 * c.mass * sigma * sigma;
    CHECK(l2 / (2 * inertia) == doctest::Approx(1.5 * c.hbar * c.hbar / (4 * c.mass * sigma * sigma)));

    // Excited, boosted and chirped states keep the same offset.
    const auto g2 = GridSpec::cube(3, 48, 9.0);
    const auto excited = harmonic_eigenstate(g2, 1, 3, c, {1.0, 0.8, 1.2}, {1, 2, 0});
    const auto packet = gaussian_packet(g2, 1, 3, {{0.3, -0.2, 0.1}, {0.8, 1.0, 0.9}, {1.0, 0.5, -0.7}, {0.2, 0.0, 0.1}});
    for (const auto* psi : {&excited, &packet}) {
        const double cl = L2_classical(*psi, c);
        const double q = quantum_expectation(*psi, angular_momentum_squared(3), c.hbar).real();
        const double sym = quantum_expectation(*psi, L2_symmetric_operator(1, 3), c.hbar).real();
        CHECK(cl - q == doctest::Approx(1.5 * c.hbar * c.hbar).epsilon(1e-9));
        CHECK(cl == doctest::Approx(sym).epsilon(1e-9));
    }
}

TEST_CASE("broad packet with a strong phase") {
    PhysicalConstants c;
    // Close to a momentum eigenstate; L^2 is large but the offset is unchanged.
    const auto g = GridSpec::cube(3, 64, 14.0);
    const auto psi = gaussian_packet(g, 1, 3, {{0.5, 0.0, 0.0}, {2.0}, {0.0, 3.0, 0.0}, {0.0}});
    const double cl = L2_classical(psi, c);
    const double q = quantum_expectation(psi, angular_momentum_squared(3), 1.0).real();
    CHECK(q > 1.0);
    CHECK(cl - q == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("chi4 closed form and permutation oracle agree on random states") {
    std::mt19937_64 rng(2024);
    const auto g = GridSpec::cube(3, 24, 7.0);
    std::uniform_int_distribution<int> idx(0, 2);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto psi = random_state(rng, g);
        const int i = idx(rng), j = idx(rng), k = idx(rng), l = idx(rng);
        const cplx a = chi4_symmetric_expectation(psi, 1.0, i, j, k, l);
        const cplx b = quantum_expectation(psi, chi4_symmetric(i, j, k, l), 1.0);
        worst = std::max(worst, std::abs(a - b));
    }
    CHECK(worst <= 1e-10);

    // Real Gaussian with sigma = 1: the Weyl symbol factorises, so the
    // symmetric expectation is <x^2><p^2> = 1/4.
    const auto real = gaussian_packet(g, 1, 3, {{0.0}, {1.0}, {0.0}, {0.0}});
    const cplx sym = chi4_symmetric_expectation(real, 1.0, 0, 0, 0, 0);
    OperatorPolynomial xxpp;
    xxpp.add(ExactComplex(1), 0, {X(0), X(0), P(0), P(0)});
    const cplx direct = quantum_expectation(real, xxpp, 1.0);
    // sym = xxpp - 2 i hbar xp - hbar^2/2 and <xp> = i hbar / 2 for a real state.
    CHECK(std::abs(sym - (direct + 1.0 - 0.5)) < 1e-8);  // <xp> itself carries quadrature error
    CHECK(std::abs(sym.imag()) < 1e-12);
    CHECK(sym.real() == doctest::Approx(0.25).epsilon(1e-8));
}
