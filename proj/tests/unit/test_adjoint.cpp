#include <doctest.h>

#include "stochlab/adjoint.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/fpe.hpp"
#include "stochlab/qsolver.hpp"

#include <cmath>
#include <filesystem>

using namespace stochlab;

namespace {

double max_abs(const ComplexField& f) {
    double m = 0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("adjoint transform of simple densities") {
    PhysicalConstants c;
    // 41 momentum cells centred on p = 0.
    const Axis xa = Axis::spanning(-4, 4, 32), pa = Axis::spanning(-4.1, 4.1, 41);
    PhaseSpaceGrid delta(xa, pa);
    for (std::size_t i = 0; i < xa.n; ++i) delta.at(i, 20) = std::exp(-xa.center(i) * xa.center(i)) / pa.step;
    const auto phi = adjoint_transform(delta, c, {-0.5, 0.0, 0.25, 0.5});
    for (std::size_t i = 0; i < xa.n; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(std::abs(phi.values[i * 4 + k] - std::exp(-xa.center(i) * xa.center(i))) < 1e-12);

    // Gaussian momentum profile: |phi| is Gaussian in y with variance hbar^2 / sigma^2.
    const double sp = 0.8;
    const auto g = gaussian_phase_grid(Axis::spanning(-5, 5, 40), Axis::spanning(-6, 6, 120), 0.3, 0.5, 1.0, sp);
    std::vector<double> ys{0.0, 0.25, 0.5, 0.75};
    const auto phg = adjoint_transform(g, c, ys);
    const auto marginal = g.position_marginal();
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(std::abs(phg.values[i * 4].real() - marginal[i]) < 1e-12);
        for (std::size_t k = 1; k < 4; ++k) {
            const double ratio = std::abs(phg.values[i * 4 + k]) / std::abs(phg.values[i * 4]);
            CHECK(ratio == doctest::Approx(std::exp(-0.5 * sp * sp * ys[k] * ys[k])).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(adjoint_transform(g, c, {0.0, 40.0}), DomainError);
}

TEST_CASE("Taylor coefficients from a phase-space grid are momentum moments") {
    PhysicalConstants c;
    c.hbar = 0.7;
    const double p0 = 0.6, sp = 0.9;
    const auto g = gaussian_phase_grid(Axis::spanning(-6, 6, 48), Axis::spanning(-8, 8, 200), 0.0, p0, 1.0, sp);
    const auto t = taylor_coeffs(g, c, 3);
    const auto marginal = g.position_marginal();
    for (std::size_t i = 0; i < 48; ++i) {
        const double rho = marginal[i];
        CHECK(std::abs(t.at({0, 0, 0})[i] - rho) < 1e-12);
        // i hbar phi_1 = int p Phi dp
        CHECK(std::abs(cplx(0, c.hbar) * t.at({1, 0, 0})[i] - p0 * rho) < 1e-10);
        // phi_2 = (-i/hbar)^2 / 2 * E[p^2] rho
        CHECK(std::abs(t.at({2, 0, 0})[i] + (p0 * p0 + sp * sp) * rho / (2 * c.hbar * c.hbar)) < 1e-10);
    }

    // The analytic Gaussian builder agrees with the quadrature on the same nodes.
    GridSpec nodes;
    nodes.n = {48};
    nodes.lo = {g.x_axis.center(0)};
    nodes.step = {g.x_axis.step};
    const auto a = taylor_coeffs(GaussianPhaseDensity{{0.0}, {1.0}, {p0}, {sp}}, nodes, c, 3);
    for (const auto& [idx, field] : a.coeffs) CHECK(max_diff(field, t.at(idx)) < 1e-9 * (1 + max_abs(field)));
}

TEST_CASE("recursion terms") {
    PhysicalConstants c;
    const auto grid = GridSpec::cube(1, 64, 8.0);
    const auto table = taylor_coeffs(GaussianPhaseDensity{{0.2}, {1.0}, {0.4}, {0.6}}, grid, c, 3);

    // Free fields: d phi_0 / dt = (hbar / i mu) d phi_1 / dx.
    const auto rhs = recursion_rhs(table, c, FieldSpec::free(1), 0.0);
    const auto d1 = derivative(grid, table.at({1, 0, 0}), 0, 1, DerivativeMode::Spectral);
    ComplexField expect(d1.size());
    for (std::size_t i = 0; i < d1.size(); ++i) expect[i] = c.hbar / (cplx(0, 1) * c.mass) * d1[i];
    CHECK(max_diff(rhs.at({0, 0, 0}), expect) < 1e-12);

    // The vacuum power enters first at second order.
    PhysicalConstants cp = c;
    cp.vacuum_power = 0.3;
    const auto rhs_p = recursion_rhs(table, cp, FieldSpec::free(1), 0.0);
    CHECK(max_diff(rhs_p.at({0, 0, 0}), rhs.at({0, 0, 0})) == 0.0);
    CHECK(max_diff(rhs_p.at({1, 0, 0}), rhs.at({1, 0, 0})) == 0.0);
    ComplexField diff(grid.size());
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = rhs_p.at({2, 0, 0})[i] - rhs.at({2, 0, 0})[i] + cp.mass * cp.vacuum_power * table.at({0, 0, 0})[i];
    CHECK(max_abs(diff) < 1e-14);

    // A truncated table is reported, not silently padded.
    CoefficientTable cut = table;
    cut.coeffs.erase({3, 0, 0});
    CHECK_THROWS_AS(recursion_rhs(cut, c, FieldSpec::free(1), 0.0), UsageError);
}

TEST_CASE("stationary oscillator density has vanishing recursion rates") {
    PhysicalConstants c;
    const double w = 1.3;
    const double sx = std::sqrt(c.hbar / (2 * c.mass * w)), sp = std::sqrt(c.hbar * c.mass * w / 2);
    for (std::size_t dim : {1u, 2u}) {
        const auto grid = GridSpec::cube(dim, 48, 8 * sx);
        GaussianPhaseDensity d;
        d.x0.assign(dim, 0.0);
        d.sigma_x.assign(dim, sx);
        d.p0.assign(dim, 0.0);
        d.sigma_p.assign(dim, sp);
        const auto table = taylor_coeffs(d, grid, c, 4);
        const auto rhs = recursion_rhs(table, c, FieldSpec::harmonic(static_cast<int>(dim), w), 0.0);
        for (const auto& [idx, rate] : rhs.coeffs)
            CHECK_MESSAGE(max_abs(rate) < 1e-10 * (1 + max_abs(table.at(idx))),
                          "index " << idx[0] << idx[1] << idx[2]);
    }
}

TEST_CASE("current and tensor of simple wavefunctions") {
    const auto g = GridSpec::cube(1, 64, 5.0);
    const auto pw = plane_wave(g, 1, 1, {3});
    const double k = 2 * M_PI * 3 / g.length(0);
    const auto J = current_from_psi(pw);
    const auto T = tensor_from_psi(pw);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rho = std::norm(pw.amplitude[i]);
        // i hbar J = hbar k rho
        CHECK(std::abs(cplx(0, 1) * J[0][i] - k * rho) < 1e-12);
        CHECK(std::abs(T.at(0, 0)[i] + k * k * rho) < 1e-11);
    }

    WaveFunction flat(g, 1, 1);
    for (auto& v : flat.amplitude) v = 1.0;
    flat.normalize();
    CHECK(max_abs(tensor_from_psi(flat).at(0, 0)) < 1e-14);
    CHECK(max_abs(current_from_psi(flat)[0]) < 1e-14);

    const auto g3 = GridSpec::cube(3, 32, 6.0);
    PhysicalConstants c;
    const auto ground = harmonic_eigenstate(g3, 1, 3, c, {1.0}, {0});
    for (const auto& comp : current_from_psi(ground)) CHECK(max_abs(comp) < 1e-14);
    // Real Gaussian with density variance s^2: T_jl = -delta_jl |psi|^2 / (4 s^2).
    const double s2 = 0.5;
    const auto T3 = tensor_from_psi(ground);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            ComplexField expect(g3.size());
            for (std::size_t i = 0; i < g3.size(); ++i)
                expect[i] = a == b ? -std::norm(ground.amplitude[i]) / (4 * s2) : 0.0;
            CHECK(max_diff(T3.at(a, b), expect) < 1e-8);
        }

    const auto packet = gaussian_packet(GridSpec::cube(1, 128, 10.0), 1, 1, {{0.4}, {1.0}, {1.7}, {0.3}});
    const auto Jp = current_from_psi(packet);
    CHECK(std::abs((cplx(0, 1) * integrate(packet.grid, Jp[0])) - 1.7) < 1e-10);
}

TEST_CASE("P-independent equations hold along exact evolution") {
    PhysicalConstants c;
    SUBCASE("free packet") {
        const auto g = GridSpec::cube(1, 256, 16.0);
        auto a = gaussian_packet(g, 1, 1, {{-1.0}, {1.0}, {0.8}, {0.0}});
        const double dt = 0.002;
        auto b = evolve_psi(a, c, FieldSpec::free(1), dt, PsiScheme::Spectral);
        auto d = evolve_psi(b, c, FieldSpec::free(1), dt, PsiScheme::Spectral);
        const auto r = consistency_check_P_independent(a, b, d, c, FieldSpec::free(1), DerivativeMode::Spectral);
        CHECK(r.density_residual < 1e-5 * r.density_scale);
        CHECK(r.current_residual < 1e-5 * r.current_scale);
    }
    SUBCASE("stationary eigenstate") {
        // Exact evolution is a global phase exp(-i E t / hbar) with E = 3/2 hbar omega.
        const auto g = GridSpec::cube(1, 128, 8.0);
        const auto f = FieldSpec::harmonic(1, 1.0);
        auto a = harmonic_eigenstate(g, 1, 1, c, {1.0}, {1});
        auto rotate = [&](double t) {
            WaveFunction w = a;
            for (auto& v : w.amplitude) v *= std::exp(cplx(0, -1.5 * t));
            w.time = t;
            return w;
        };
        const auto r = consistency_check_P_independent(a, rotate(0.01), rotate(0.02), c, f, DerivativeMode::Spectral);
        CHECK(r.density_residual < 1e-12);
        CHECK(r.current_residual < 1e-10);
    }
    SUBCASE("uniform vector potential") {
        const FieldSpec f(1, preset::UniformVectorPotential{{0.5, 0, 0}});
        const auto g = GridSpec::cube(1, 512, 16.0);
        auto a = gaussian_packet(g, 1, 1, {{0.0}, {1.0}, {1.0}, {0.0}});
        const double dt = 0.001;
        auto b = evolve_psi(a, c, f, dt, PsiScheme::CrankNicolson);
        auto d = evolve_psi(b, c, f, dt, PsiScheme::CrankNicolson);
        const auto r = consistency_check_P_independent(a, b, d, c, f, DerivativeMode::FourthOrder);
        // The lattice Hamiltonian is second order in dx, so the balance holds to that order.
        CHECK(r.density_residual < 1e-2 * r.density_scale);
        CHECK(r.current_residual < 1e-2 * r.current_scale);
    }
}

TEST_CASE("coefficients from an ensemble") {
    PhysicalConstants c;
    GaussianCloud cloud;
    cloud.sigma_x = {1.0, 1.0, 1.0};
    cloud.sigma_p = {0.5, 0.5, 0.5};
    cloud.p0 = {1.0, 0, 0};
    const auto ens = make_ensemble(c, FieldSpec::free(1), 200000, cloud, 8);
    GridSpec grid;
    grid.n = {40};
    grid.lo = {-5.0 + 0.125};
    grid.step = {0.25};
    const auto t = taylor_coeffs(ens, grid, c, {});
    // Binned density against the normal density at bin centres.
    for (std::size_t i = 0; i < 40; i += 5) {
        const double x = grid.coordinate(0, i);
        const double rho = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
        CHECK(std::abs(t.at({0, 0, 0})[i].real() - rho) < 0.02);
        CHECK(std::abs((cplx(0, 1) * t.at({1, 0, 0})[i]).real() - rho) < 0.03);
    }
    const auto tiny = make_ensemble(c, FieldSpec::free(1), 5, cloud, 8);
    CHECK_THROWS_AS(taylor_coeffs(tiny, grid, c, {}), NumericalError);
}

TEST_CASE("table export writes one file per coefficient") {
    PhysicalConstants c;
    const auto grid = GridSpec::cube(1, 16, 4.0);
    const auto table = taylor_coeffs(GaussianPhaseDensity{{0.0}, {1.0}, {0.0}, {1.0}}, grid, c, 2);
    const auto dir = std::filesystem::temp_directory_path() / "stochlab_table";
    std::filesystem::remove_all(dir);
    export_table(dir.string(), table);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::file_size(dir / "phi_2_0_0.bin") == 16 * 16);
    std::filesystem::remove_all(dir);
}
