#include "stochlab/fpe.hpp"

#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace stochlab {

namespace {

// Field data sampled once per stage.
struct FieldSamples {
    std::vector<double> a_face;    // (e/c) A at x faces, size nx+1
    std::vector<double> a_center;  // (e/c) A at x centres
    std::vector<double> da_center; // (e/c) dA/dx at x centres
    std::vector<double> dv_center; // dV/dx at x centres
};

FieldSamples sample_fields(const PhaseSpaceGrid& g, const PhysicalConstants& c, const FieldSpec& f, double t) {
    const std::size_t nx = g.x_axis.n;
    const double ec = c.coupling();
    FieldSamples s;
    s.a_face.resize(nx + 1);
    s.a_center.resize(nx);
    s.da_center.resize(nx);
    s.dv_center.resize(nx);
    for (std::size_t i = 0; i <= nx; ++i) {
        const Vec3 x{g.x_axis.lo + static_cast<double>(i) * g.x_axis.step, 0.0, 0.0};
        s.a_face[i] = ec * f.vector_potential(x, t)[0];
    }
    for (std::size_t i = 0; i < nx; ++i) {
        const Vec3 x{g.x_axis.center(i), 0.0, 0.0};
        s.a_center[i] = ec * f.vector_potential(x, t)[0];
        const ForceBundle fb = f.derivatives(x, t, c);
        s.da_center[i] = ec * fb.grad_A[0][0];
        s.dv_center[i] = fb.grad_V[0];
    }
    return s;
}

// Van Leer limited slope: harmonic mean of one-sided differences, zero at extrema.
inline double van_leer(double a, double b) {
    const double ab = a * b;
    return ab > 0.0 ? 2.0 * ab / (a + b) : 0.0;
}

// Limited MUSCL face value at face k (between cells k-1 and k) of a line with
// zero ghost cells on both sides.
inline double upwind_face(const double* phi, std::size_t stride, std::size_t n, std::size_t k, double vel) {
    auto at = [&](long i) { return (i < 0 || i >= static_cast<long>(n)) ? 0.0 : phi[static_cast<std::size_t>(i) * stride]; };
    const long c = vel >= 0.0 ? static_cast<long>(k) - 1 : static_cast<long>(k);
    if (c < 0 || c >= static_cast<long>(n)) return 0.0;
    const double mid = at(c);
    const double slope = van_leer(mid - at(c - 1), at(c + 1) - mid);
    return vel >= 0.0 ? mid + 0.5 * slope : mid - 0.5 * slope;
}

// dPhi/dt into `rate`; returns the outflow rate through the boundary.
double fp_rate(const PhaseSpaceGrid& g, const std::vector<double>& phi, const PhysicalConstants& c,
               const FieldSamples& s, std::vector<double>& rate) {
    const std::size_t nx = g.x_axis.n, np = g.p_axis.n;
    const double dx = g.x_axis.step, dp = g.p_axis.step;
    const double inv_mass = 1.0 / c.mass;
    const double diff = c.mass * c.vacuum_power;
    double outflow = 0.0;

    std::fill(rate.begin(), rate.end(), 0.0);

    // Boundary outflow is collected per line and summed serially so the result
    // does not depend on the thread count.
    std::vector<double> out_x(np, 0.0), out_p(nx, 0.0);

    // x sweeps: one line per momentum row j.
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < np; ++j) {
        const double pj = g.p_axis.center(j);
        const double* line = phi.data() + j;
        double prev_flux = 0.0;
        for (std::size_t k = 0; k <= nx; ++k) {
            const double v = (pj - s.a_face[k]) * inv_mass;
            const double flux = v * upwind_face(line, np, nx, k, v);
            if (k == 0) out_x[j] -= flux * dp;
            if (k == nx) out_x[j] += flux * dp;
            if (k > 0) rate[(k - 1) * np + j] -= (flux - prev_flux) / dx;
            prev_flux = flux;
        }
    }

    // p sweeps: one line per position column i.
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < nx; ++i) {
        const double* line = phi.data() + i * np;
        double prev_flux = 0.0;
        for (std::size_t k = 0; k <= np; ++k) {
            const double pf = g.p_axis.lo + static_cast<double>(k) * dp;
            const double force = (pf - s.a_center[i]) * s.da_center[i] * inv_mass - s.dv_center[i];
            const double left = k > 0 ? line[k - 1] : 0.0;
            const double right = k < np ? line[k] : 0.0;
            const double flux = force * upwind_face(line, 1, np, k, force) - diff * (right - left) / dp;
            if (k == 0) out_p[i] -= flux * dx;
            if (k == np) out_p[i] += flux * dx;
            if (k > 0) rate[i * np + k - 1] -= (flux - prev_flux) / dp;
            prev_flux = flux;
        }
    }
    for (double v : out_x) outflow += v;
    for (double v : out_p) outflow += v;
    return outflow;
}

double sum_mass(const std::vector<double>& phi, double area) {
    double s = 0.0;
    for (double v : phi) s += v;
    return s * area;
}

}  // namespace

double fp_cfl_limit(const PhaseSpaceGrid& g, const PhysicalConstants& c, const FieldSpec& f) {
    if (f.dim() != 1) throw UsageError("phase-space grid solver needs one-dimensional fields");
    const FieldSamples s = sample_fields(g, c, f, g.time);
    double vmax = 0.0, fmax = 0.0;
    const double p_lo = g.p_axis.lo, p_hi = g.p_axis.hi();
    for (std::size_t i = 0; i <= g.x_axis.n; ++i)
        vmax = std::max({vmax, std::abs(p_lo - s.a_face[i]), std::abs(p_hi - s.a_face[i])});
    vmax /= c.mass;
    for (std::size_t i = 0; i < g.x_axis.n; ++i)
        for (double pe : {p_lo, p_hi})
            fmax = std::max(fmax, std::abs((pe - s.a_center[i]) * s.da_center[i] / c.mass - s.dv_center[i]));
    double lim = std::numeric_limits<double>::infinity();
    if (vmax > 0.0) lim = std::min(lim, g.x_axis.step / vmax);
    if (fmax > 0.0) lim = std::min(lim, g.p_axis.step / fmax);
    if (c.vacuum_power > 0.0) lim = std::min(lim, g.p_axis.step * g.p_axis.step / (2.0 * c.mass * c.vacuum_power));
    return lim;
}

FpStepReport fp_step_inplace(PhaseSpaceGrid& grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                             const FpOptions& options) {
    if (!(dt > 0.0)) throw UsageError("dt must be > 0");
    const double limit = fp_cfl_limit(grid, consts, fields);
    if (dt > options.safety * limit)
        throw StabilityError("fp_step: dt=" + std::to_string(dt) + " violates the CFL bound " +
                             std::to_string(options.safety * limit));

    const std::size_t cells = grid.density.size();
    const double area = grid.cell_area();
    const double mass_before = sum_mass(grid.density, area);
    const double t0 = grid.time;

    // Shu-Osher SSP-RK3; the boundary outflow is combined with the same weights
    // so the discrete mass budget closes to rounding.
    std::vector<double> k(cells), s1(cells), s2(cells);
    const FieldSamples f0 = sample_fields(grid, consts, fields, t0);
    const double b0 = fp_rate(grid, grid.density, consts, f0, k);
    for (std::size_t c = 0; c < cells; ++c) s1[c] = grid.density[c] + dt * k[c];

    const FieldSamples f1 = fields.is_time_dependent() ? sample_fields(grid, consts, fields, t0 + dt) : f0;
    const double b1 = fp_rate(grid, s1, consts, f1, k);
    for (std::size_t c = 0; c < cells; ++c) s2[c] = 0.75 * grid.density[c] + 0.25 * (s1[c] + dt * k[c]);

    const FieldSamples f2 = fields.is_time_dependent() ? sample_fields(grid, consts, fields, t0 + 0.5 * dt) : f0;
    const double b2 = fp_rate(grid, s2, consts, f2, k);
    for (std::size_t c = 0; c < cells; ++c)
        grid.density[c] = grid.density[c] / 3.0 + (2.0 / 3.0) * (s2[c] + dt * k[c]);

    FpStepReport rep;
    rep.absorbed = dt * (b0 / 6.0 + b1 / 6.0 + 2.0 * b2 / 3.0);
    double neg = 0.0, minv = std::numeric_limits<double>::infinity();
    bool finite = true;
    for (double v : grid.density) {
        if (!std::isfinite(v)) finite = false;
        if (v < 0.0) neg -= v;
        minv = std::min(minv, v);
    }
    if (!finite) throw NumericalError("fp_step produced a non-finite density");
    rep.undershoot = neg * area;
    rep.min_value = minv;
    if (options.clip_negative && neg > 0.0) {
        for (double& v : grid.density) v = std::max(v, 0.0);
        rep.clipped = rep.undershoot;
    }
    grid.time = t0 + dt;

    const double drift = std::abs(sum_mass(grid.density, area) + rep.absorbed - rep.clipped - mass_before);
    if (drift > options.norm_drift_threshold)
        throw NumericalError("fp_step: mass budget drift " + std::to_string(drift) + " exceeds threshold");
    return rep;
}

PhaseSpaceGrid fp_step(PhaseSpaceGrid grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                       const FpOptions& options) {
    fp_step_inplace(grid, consts, fields, dt, options);
    return grid;
}

double fp_norm(const PhaseSpaceGrid& grid) { return sum_mass(grid.density, grid.cell_area()); }

double fp_mean_energy(const PhaseSpaceGrid& grid, const PhysicalConstants& consts, const FieldSpec& fields) {
    double e = 0.0;
    for (std::size_t i = 0; i < grid.x_axis.n; ++i) {
        const Vec3 x{grid.x_axis.center(i), 0.0, 0.0};
        for (std::size_t j = 0; j < grid.p_axis.n; ++j) {
            const Vec3 p{grid.p_axis.center(j), 0.0, 0.0};
            e += eval_hamiltonian(consts, fields, x, p, grid.time) * grid.at(i, j);
        }
    }
    return e * grid.cell_area();
}

FpRun fp_evolve(PhaseSpaceGrid grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                std::size_t steps, std::size_t record_every, const FpOptions& options) {
    if (record_every == 0) throw UsageError("record_every must be >= 1");
    FpRun run;
    run.budget.initial_mass = fp_norm(grid);
    double last_undershoot = 0.0;
    auto record = [&] {
        run.diagnostics.push_back(FpDiagnostics{grid.time, fp_norm(grid), fp_mean_energy(grid, consts, fields),
                                                run.budget.absorbed, run.budget.clipped, last_undershoot});
    };
    record();
    for (std::size_t s = 1; s <= steps; ++s) {
        FpStepReport rep;
        try {
            rep = fp_step_inplace(grid, consts, fields, dt, options);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (step " + std::to_string(s) + ")");
        }
        run.budget.absorbed += rep.absorbed;
        run.budget.clipped += rep.clipped;
        run.budget.max_undershoot = std::max(run.budget.max_undershoot, rep.undershoot);
        last_undershoot = rep.undershoot;
        if (s % record_every == 0 || s == steps) record();
    }
    run.grid = std::move(grid);
    return run;
}

PhaseSpaceGrid gaussian_phase_grid(const Axis& x_axis, const Axis& p_axis, double x0, double p0, double sigma_x,
                                   double sigma_p) {
    PhaseSpaceGrid g(x_axis, p_axis);
    const double norm = 1.0 / (2.0 * M_PI * sigma_x * sigma_p);
    for (std::size_t i = 0; i < x_axis.n; ++i) {
        const double ux = (x_axis.center(i) - x0) / sigma_x;
        for (std::size_t j = 0; j < p_axis.n; ++j) {
            const double up = (p_axis.center(j) - p0) / sigma_p;
            g.at(i, j) = norm * std::exp(-0.5 * (ux * ux + up * up));
        }
    }
    return g;
}

void write_fp_diagnostics_csv(const std::string& path, const std::vector<FpDiagnostics>& diags) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    using io::format_double;
    out << "t,norm,mean_H,absorbed,clipped,undershoot\n";
    for (const auto& d : diags)
        out << format_double(d.time) << ',' << format_double(d.norm) << ',' << format_double(d.mean_energy) << ','
            << format_double(d.absorbed) << ',' << format_double(d.clipped) << ',' << format_double(d.undershoot)
            << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace stochlab
