#include <doctest.h>

#include "stochlab/errors.hpp"
#include "stochlab/fpe.hpp"

#include <cmath>
#include <numeric>

using namespace stochlab;

namespace {

struct Moments {
    double mean_x = 0, mean_p = 0, var_x = 0, var_p = 0;
};

Moments moments(const PhaseSpaceGrid& g) {
    Moments m;
    double mass = 0;
    for (std::size_t i = 0; i < g.x_axis.n; ++i)
        for (std::size_t j = 0; j < g.p_axis.n; ++j) {
            const double w = g.at(i, j) * g.cell_area();
            mass += w;
            m.mean_x += w * g.x_axis.center(i);
            m.mean_p += w * g.p_axis.center(j);
        }
    m.mean_x /= mass;
    m.mean_p /= mass;
    for (std::size_t i = 0; i < g.x_axis.n; ++i)
        for (std::size_t j = 0; j < g.p_axis.n; ++j) {
            const double w = g.at(i, j) * g.cell_area() / mass;
            m.var_x += w * std::pow(g.x_axis.center(i) - m.mean_x, 2);
            m.var_p += w * std::pow(g.p_axis.center(j) - m.mean_p, 2);
        }
    return m;
}

double stable_dt(const PhaseSpaceGrid& g, const PhysicalConstants& c, const FieldSpec& f) {
    return 0.4 * fp_cfl_limit(g, c, f);
}

}  // namespace

TEST_CASE("norm and mean energy of Gaussian data") {
    auto g = gaussian_phase_grid(Axis::spanning(-10, 10, 200), Axis::spanning(-8, 8, 160), 0.0, 0.0, 1.0, 1.0);
    CHECK(fp_norm(g) == doctest::Approx(1.0).epsilon(1e-12));
    PhysicalConstants c;
    // <p^2>/2mu with Var(p) = mu = 1; midpoint quadrature of a resolved Gaussian.
    CHECK(fp_mean_energy(g, c, FieldSpec::free(1)) == doctest::Approx(0.5).epsilon(1e-3));
    PhaseSpaceGrid zero(Axis::spanning(-1, 1, 8), Axis::spanning(-1, 1, 8));
    CHECK(fp_norm(zero) == 0.0);
}

TEST_CASE("free Liouville transport shears the density") {
    PhysicalConstants c;
    const auto f = FieldSpec::free(1);
    auto g = gaussian_phase_grid(Axis::spanning(-6, 10, 256), Axis::spanning(-4, 4, 128), 0.0, 1.0, 1.0, 0.5);
    const auto before = moments(g);
    const double dt = stable_dt(g, c, f);
    const auto steps = static_cast<std::size_t>(std::ceil(2.0 / dt));
    const auto run = fp_evolve(g, c, f, 2.0 / static_cast<double>(steps), steps, steps);
    const auto after = moments(run.grid);
    CHECK(after.mean_x == doctest::Approx(before.mean_x + 2.0 * before.mean_p).epsilon(1e-3));
    CHECK(after.mean_p == doctest::Approx(before.mean_p).epsilon(1e-6));
    CHECK(after.var_p == doctest::Approx(before.var_p).epsilon(1e-3));
    CHECK(fp_norm(run.grid) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("harmonic flow rotates phase space and conserves mass and energy") {
    PhysicalConstants c;
    const auto f = FieldSpec::harmonic(1, 1.0);
    auto g = gaussian_phase_grid(Axis::spanning(-8, 8, 256), Axis::spanning(-8, 8, 256), 1.5, 0.0, 0.7, 0.7);
    const double e0 = fp_mean_energy(g, c, f);
    const double period = 2 * M_PI;
    const auto steps = static_cast<std::size_t>(std::ceil(period / stable_dt(g, c, f)));
    const double dt = period / static_cast<double>(steps);

    // Quarter period: the characteristics map (x, p) -> (x cos t + p sin t, p cos t - x sin t).
    auto quarter = fp_evolve(g, c, f, dt, steps / 4, steps / 4).grid;
    const auto mq = moments(quarter);
    const double tq = dt * static_cast<double>(steps / 4);
    CHECK(mq.mean_x == doctest::Approx(1.5 * std::cos(tq)).epsilon(0.01).scale(1.0));
    CHECK(mq.mean_p == doctest::Approx(-1.5 * std::sin(tq)).epsilon(0.01));

    const auto full = fp_evolve(g, c, f, dt, steps, steps);
    CHECK(std::abs(fp_norm(full.grid) - 1.0) <= 1e-6);
    double l1 = 0;
    for (std::size_t k = 0; k < g.density.size(); ++k) l1 += std::abs(full.grid.density[k] - g.density[k]);
    l1 *= g.cell_area();
    // Second-order upwinding smears the rotated bump slightly; the shape survives one period.
    CHECK(l1 < 0.05);
    CHECK(fp_mean_energy(full.grid, c, f) == doctest::Approx(e0).epsilon(2e-3));
    CHECK(full.budget.absorbed < 1e-12);
}

TEST_CASE("diffusion grows the momentum variance at 2 mu P and energy at P") {
    PhysicalConstants c;
    c.vacuum_power = 0.05;
    c.mass = 1.5;
    const auto f = FieldSpec::free(1);
    auto g = gaussian_phase_grid(Axis::spanning(-12, 12, 192), Axis::spanning(-5, 5, 200), 0.0, 0.0, 1.0, 0.5);
    const auto before = moments(g);
    const double t = 2.0;
    const auto steps = static_cast<std::size_t>(std::ceil(t / stable_dt(g, c, f)));
    const auto run = fp_evolve(g, c, f, t / static_cast<double>(steps), steps, steps / 4);
    const auto after = moments(run.grid);
    CHECK(after.var_p - before.var_p == doctest::Approx(2 * c.mass * c.vacuum_power * t).epsilon(0.01));
    const auto& d = run.diagnostics;
    REQUIRE(d.size() >= 2);
    const double rate = (d.back().mean_energy - d.front().mean_energy) / (d.back().time - d.front().time);
    CHECK(rate == doctest::Approx(c.vacuum_power).epsilon(0.02));
}

TEST_CASE("unstable step and budget reporting") {
    PhysicalConstants c;
    const auto f = FieldSpec::harmonic(1, 1.0);
    auto g = gaussian_phase_grid(Axis::spanning(-4, 4, 64), Axis::spanning(-4, 4, 64), 0.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(fp_step_inplace(g, c, f, 10 * fp_cfl_limit(g, c, f)), StabilityError);

    // A bump pushed against the edge leaks through the absorbing boundary and
    // the budget accounts for it.
    auto edge = gaussian_phase_grid(Axis::spanning(-4, 4, 64), Axis::spanning(-4, 4, 64), 3.0, 2.0, 0.5, 0.3);
    const double m0 = fp_norm(edge);
    const auto free = FieldSpec::free(1);
    const double dt = stable_dt(edge, c, free);
    const auto run = fp_evolve(edge, c, free, dt, 200, 50);
    CHECK(run.budget.absorbed > 0.1);
    CHECK(fp_norm(run.grid) + run.budget.absorbed - run.budget.clipped == doctest::Approx(m0).epsilon(1e-10));
}
