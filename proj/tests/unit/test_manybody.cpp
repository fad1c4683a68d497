#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/manybody.hpp"
#include "stochlab/qsolver.hpp"

#include <cmath>

using namespace stochlab;

TEST_CASE("many-body chi4 closed form matches the permutation oracle for N=2, D=2") {
    int count = 0;
    for (int code = 0; code < 256; ++code) {
        const int al = code & 1, be = (code >> 1) & 1, ga = (code >> 2) & 1, de = (code >> 3) & 1;
        const int i = (code >> 4) & 1, j = (code >> 5) & 1, k = (code >> 6) & 1, l = (code >> 7) & 1;
        CHECK_MESSAGE(mb_chi4_symmetric(al, be, ga, de, i, j, k, l) == mb_chi4_closed_form(al, be, ga, de, i, j, k, l),
                      "particles " << al << be << ga << de << " axes " << i << j << k << l);
        ++count;
    }
    CHECK(count == 256);
}

TEST_CASE("many-body chi4 reductions") {
    // Distinct particles commute: no hbar terms.
    const auto distinct = mb_chi4_symmetric(0, 1, 2, 3, 0, 0, 0, 0);
    for (const auto& [key, coef] : distinct.terms()) CHECK(key.hbar_power == 0);
    // One particle reduces to the single-particle operator.
    for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l) CHECK(mb_chi4_symmetric(0, 0, 0, 0, i, l, i, l) == chi4_symmetric(i, l, i, l));
}

TEST_CASE("zero-point constant of the symmetric many-body L^2") {
    for (int n = 1; n <= 3; ++n)
        for (int d = 2; d <= 3; ++d)
            CHECK(L2_symmetric_operator(n, d).constant_term(2) == ExactComplex(zero_point_constant(n, d)));
    CHECK(zero_point_constant(2, 2) == Rational(1));
}

TEST_CASE("product states block-factorise the tensor") {
    const auto g = GridSpec::cube(2, 48, 8.0);
    const GaussianPacket a{{0.3}, {0.9}, {0.8}, {0.1}}, b{{-0.5}, {1.1}, {-0.4}, {0.0}};
    const auto g1 = GridSpec::cube(1, 48, 8.0);
    const auto s1 = gaussian_packet(g1, 1, 1, a), s2 = gaussian_packet(g1, 1, 1, b);
    WaveFunction prod(g, 2, 1);
    for (std::size_t i = 0; i < 48; ++i)
        for (std::size_t j = 0; j < 48; ++j) prod.amplitude[i * 48 + j] = s1.amplitude[i] * s2.amplitude[j];
    const auto T = mb_tensor_from_psi(prod);
    const auto J1 = current_from_psi(s1), J2 = current_from_psi(s2);
    double err = 0;
    for (std::size_t i = 0; i < 48; ++i)
        for (std::size_t j = 0; j < 48; ++j) err = std::max(err, std::abs(T.at(0, 1)[i * 48 + j] - J1[0][i] * J2[0][j]));
    CHECK(err < 1e-12);

    // A real state gives a real tensor.
    auto real = prod;
    for (auto& v : real.amplitude) v = std::abs(v);
    const auto Tr = mb_tensor_from_psi(real);
    for (const auto& comp : Tr.components)
        for (const auto& v : comp) CHECK(v.imag() == 0.0);
}

TEST_CASE("grid zero-point identity for two particles in two dimensions") {
    PhysicalConstants c;
    const double sigma = std::sqrt(0.5);
    const auto g = GridSpec::cube(4, 20, 8 * sigma);
    const auto ground = harmonic_eigenstate(g, 2, 2, c, {1.0}, {0});
    CHECK(mb_L2_classical(ground, c) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(mb_L2_classical(ground, c, AngularSum::Total) == doctest::Approx(1.0).epsilon(1e-3));

    // Entangled two-mode Gaussian: particle 0 and 1 coordinates correlated.
    std::vector<double> q(16, 0.0);
    for (int a = 0; a < 4; ++a) q[a * 5] = 1.6;
    q[0 * 4 + 2] = q[2 * 4 + 0] = 0.7;
    q[1 * 4 + 3] = q[3 * 4 + 1] = -0.5;
    q[0 * 4 + 3] = q[3 * 4 + 0] = 0.3;
    auto ent = correlated_gaussian(GridSpec::cube(4, 20, 7.0), 2, 2, q, {0.2, -0.1, 0.0, 0.3});
    // Add a phase so currents do not vanish.
    for (std::size_t k = 0; k < ent.amplitude.size(); ++k)
        ent.amplitude[k] *= std::exp(cplx(0, 0.6 * ent.grid.coordinate_of(k, 1) - 0.4 * ent.grid.coordinate_of(k, 2)));
    const double per = mb_L2_classical(ent, c);
    const double q_per = quantum_expectation(ent, angular_momentum_squared(2, 0) + angular_momentum_squared(2, 1), 1.0).real();
    CHECK(per - q_per == doctest::Approx(1.0).epsilon(1e-6));
    const double tot = mb_L2_classical(ent, c, AngularSum::Total);
    const double q_tot = quantum_expectation(ent, total_angular_momentum_squared(2, 2), 1.0).real();
    CHECK(tot - q_tot == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(mb_L2_classical(WaveFunction(GridSpec::cube(6, 4, 1.0), 2, 3), c), UsageError);
}

TEST_CASE("single particle in three dimensions reduces to the one-body result") {
    PhysicalConstants c;
    const auto g = GridSpec::cube(3, 32, 8.0);
    const auto psi = gaussian_packet(g, 1, 3, {{0.2, 0.0, -0.3}, {1.0, 0.9, 1.1}, {0.5, 0.2, 0.0}, {0.1}});
    CHECK(mb_L2_classical(psi, c) == doctest::Approx(L2_classical(psi, c)).epsilon(1e-12));
}

TEST_CASE("noninteracting particles gain energy additively") {
    PhysicalConstants c;
    c.vacuum_power = 0.02;
    ExperimentConfig cfg;
    cfg.consts = c;
    cfg.particles = 2;
    cfg.trajectories = 20000;
    cfg.dt = 0.02;
    cfg.steps = 250;
    cfg.record_every = 25;
    const auto r = run_experiment(cfg);
    CHECK(std::abs(r.energy_rate.slope - 2 * c.vacuum_power) < 4 * r.energy_rate.stderr_slope);

    // Identical particles: the two single-particle marginals agree statistically.
    const auto& last = r.records.back();
    const double se = std::sqrt((last.var_x[0] + last.var_x[1]) / static_cast<double>(last.count));
    CHECK(std::abs(last.mean_x[0] - last.mean_x[1]) < 4 * se);
    CHECK(last.var_x[0] == doctest::Approx(last.var_x[1]).epsilon(0.05));
}

TEST_CASE("harmonic pair coupling splits into normal modes") {
    PhysicalConstants c;
    const double w = 1.0, kappa = 0.75;
    const double w_rel = std::sqrt(w * w + 2 * kappa / c.mass);
    GaussianCloud cloud;
    cloud.sigma_x = {0, 0, 0};
    cloud.sigma_p = {0, 0, 0};
    cloud.particle_offsets = {{0.8, 0, 0}, {-0.4, 0, 0}};
    PairInteraction pair;
    pair.kind = PairInteraction::Kind::Harmonic;
    pair.strength = kappa;
    auto ens = make_ensemble(c, FieldSpec::harmonic(1, w), 1, cloud, 1, 2, pair);
    const double sum0 = 0.4, diff0 = 1.2;
    const double dt = 0.0005;
    for (int s = 1; s <= 8000; ++s) {
        mb_sde_step(ens, dt);
        if (s % 2000 == 0) {
            const double t = s * dt;
            CHECK(ens.positions[0] + ens.positions[1] == doctest::Approx(sum0 * std::cos(w * t)).epsilon(0.01).scale(1));
            CHECK(ens.positions[0] - ens.positions[1] ==
                  doctest::Approx(diff0 * std::cos(w_rel * t)).epsilon(0.01).scale(1));
        }
    }
}
