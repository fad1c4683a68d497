#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/model.hpp"

#include <cmath>

using namespace stochlab;

TEST_CASE("hamiltonian of simple presets") {
    PhysicalConstants c;
    CHECK(eval_hamiltonian(c, FieldSpec::free(3), {0.3, -1.0, 2.0}, {0, 0, 0}, 0.0) == doctest::Approx(0.0));

    const double w = 1.7;
    CHECK(eval_hamiltonian(c, FieldSpec::harmonic(3, w), {1, 0, 0}, {0, 0, 0}, 0.0) == doctest::Approx(0.5 * w * w));

    // p - (e/c)A vanishes for p = (0, B/2, 0) at x = (1, 0, 0) in the symmetric gauge.
    const double b0 = 2.4;
    FieldSpec mag(3, preset::UniformMagnetic{{0.0, 0.0, b0}});
    CHECK(eval_hamiltonian(c, mag, {1, 0, 0}, {0, 0.5 * b0, 0}, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    const auto a = mag.vector_potential({1, 0, 0}, 0.0);
    CHECK(a[1] == doctest::Approx(0.5 * b0));
}

TEST_CASE("force bundle of harmonic and free fields") {
    PhysicalConstants c;
    const auto f = eval_force_fields(c, FieldSpec::harmonic(1, 1.0), {2.0, 0, 0}, 0.0);
    CHECK(f.grad_V[0] == doctest::Approx(2.0));
    const auto z = eval_force_fields(c, FieldSpec::free(3), {1.0, 2.0, 3.0}, 0.5);
    for (int j = 0; j < 3; ++j) {
        CHECK(z.grad_V[j] == 0.0);
        CHECK(z.dA_dt[j] == 0.0);
        for (int l = 0; l < 3; ++l) CHECK(z.grad_A[j][l] == 0.0);
    }
}

TEST_CASE("plane-wave vector potential derivatives agree with finite differences") {
    PhysicalConstants c;
    preset::PlaneWaveA pw;
    pw.amplitude = 0.3;
    pw.wavenumber = 1.3;
    pw.frequency = 0.7;
    pw.polarization_axis = 1;
    pw.propagation_axis = 0;
    FieldSpec f(3, pw);
    const Vec3 x{0.4, -0.2, 0.9};
    const double t = 0.35, h = 1e-5;
    const auto d = f.derivatives(x, t, c);
    for (int l = 0; l < 3; ++l) {
        Vec3 xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        const auto ap = f.vector_potential(xp, t), am = f.vector_potential(xm, t);
        for (int j = 0; j < 3; ++j) CHECK(d.grad_A[j][l] == doctest::Approx((ap[j] - am[j]) / (2 * h)).epsilon(1e-8));
    }
    const auto ap = f.vector_potential(x, t + h), am = f.vector_potential(x, t - h);
    for (int j = 0; j < 3; ++j) CHECK(d.dA_dt[j] == doctest::Approx((ap[j] - am[j]) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("uniform electric field and effective potential") {
    PhysicalConstants c;
    c.charge = 2.0;
    FieldSpec e(1, preset::UniformElectric{{0.5, 0, 0}});
    // V = -e E x
    CHECK(e.scalar_potential({3.0, 0, 0}, 0.0, c) == doctest::Approx(-3.0));
    CHECK(eval_force_fields(c, e, {3.0, 0, 0}, 0.0).grad_V[0] == doctest::Approx(-1.0));

    // U = V + (e/c)^2 A.A / 2mu for a constant vector potential.
    FieldSpec u(3, preset::UniformVectorPotential{{0.2, 0.0, -0.1}});
    EffectivePotential U(c, u);
    CHECK(U.value({0, 0, 0}, 0.0) == doctest::Approx(4.0 * 0.05 / 2.0));
    CHECK(u.has_vector_potential());
    CHECK_FALSE(FieldSpec::free(2).has_vector_potential());
    CHECK(FieldSpec::free(2).with_vector_offset({0.1, 0, 0}).has_vector_potential());
}

TEST_CASE("phase flow is velocity and minus gradient") {
    PhysicalConstants c;
    c.mass = 2.0;
    const auto flow = eval_phase_flow(c, FieldSpec::harmonic(1, 1.5), {0.4, 0, 0}, {1.0, 0, 0}, 0.0);
    CHECK(flow.velocity[0] == doctest::Approx(0.5));
    CHECK(flow.force[0] == doctest::Approx(-2.0 * 1.5 * 1.5 * 0.4));
}

TEST_CASE("grid table interpolates a linear potential exactly") {
    preset::GridTable g;
    g.shape = {11};
    g.origin = {-1.0};
    g.spacing = {0.2};
    for (int i = 0; i < 11; ++i) g.potential.push_back(3.0 * (-1.0 + 0.2 * i) + 1.0);
    FieldSpec f(1, g);
    PhysicalConstants c;
    CHECK(f.scalar_potential({0.33, 0, 0}, 0.0, c) == doctest::Approx(1.99));
    CHECK(eval_force_fields(c, f, {0.33, 0, 0}, 0.0).grad_V[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(f.scalar_potential({1.5, 0, 0}, 0.0, c), DomainError);
}

TEST_CASE("constants validation names the field") {
    PhysicalConstants c;
    c.mass = -1.0;
    try {
        c.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "mass");
    }
    PhysicalConstants d;
    d.vacuum_power = -0.1;
    CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("preset names cover every kind") {
    CHECK(field_preset_names().size() == 7);
    CHECK(FieldSpec::harmonic(2, 1.0).kind_name() == "harmonic");
    CHECK(FieldSpec::harmonic(2, 3.0).max_frequency() == doctest::Approx(3.0));
}
