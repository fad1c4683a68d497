#include "stochlab/harness.hpp"

#include "stochlab/adjoint.hpp"
#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/fpe.hpp"
#include "stochlab/manybody.hpp"
#include "stochlab/observables.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace stochlab {

namespace fs = std::filesystem;
using io::format_double;

namespace {

std::size_t whole_steps(double horizon, double dt) { return static_cast<std::size_t>(std::llround(horizon / dt)); }

double param_double(const Scenario& sc, const std::string& key, double fallback) {
    const auto it = sc.task_params.find(key);
    if (it == sc.task_params.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("task." + key, "expected a number, got '" + it->second + "'");
    }
}

std::size_t param_count(const Scenario& sc, const std::string& key, std::size_t fallback) {
    const double v = param_double(sc, key, static_cast<double>(fallback));
    if (v < 1 || v != std::floor(v)) throw ValidationError("task." + key, "expected a positive integer");
    return static_cast<std::size_t>(v);
}

double param_positive(const Scenario& sc, const std::string& key, double fallback) {
    const double v = param_double(sc, key, fallback);
    if (!(v > 0.0)) throw ValidationError("task." + key, "must be > 0");
    return v;
}

std::vector<double> harmonic_omegas(const Scenario& sc) {
    const auto* h = std::get_if<preset::Harmonic>(&sc.fields.preset());
    if (!h) throw ValidationError("field.preset", "task '" + sc.task + "' needs the harmonic preset");
    return std::vector<double>(h->omega.begin(), h->omega.begin() + sc.dim);
}

// Owns the run directory and the report under construction.
class RunContext {
public:
    RunContext(const Scenario& sc, fs::path dir) : sc_(sc), dir_(std::move(dir)) {}

    const Scenario& scenario() const { return sc_; }
    std::string path(const std::string& file) const { return (dir_ / file).string(); }
    const fs::path& dir() const { return dir_; }

    void artifact(const std::string& role, const std::string& file) { report.artifacts[role] = file; }

    CheckResult& check(const std::string& name, Comparison cmp, double measured, double expected,
                       double standard_error = 0.0, std::string detail = {}) {
        CheckResult c;
        c.name = name;
        c.criterion = find_task(sc_.task).criterion;
        c.comparison = cmp;
        c.measured = measured;
        c.expected = expected;
        c.tolerance = sc_.tolerances.at(name);
        c.standard_error = standard_error;
        c.detail = std::move(detail);
        c.pass = judge(c);
        report.checks.push_back(c);
        return report.checks.back();
    }

    RunReport report;
    std::string stage = "setup";

private:
    const Scenario& sc_;
    fs::path dir_;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path, std::ios::trunc), path_(path) {
        if (!out_) throw Error("cannot open '" + path + "' for writing");
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
        out_ << '\n';
    }
    void row(const std::string& label, const std::vector<double>& values) {
        out_ << label;
        for (double v : values) out_ << ',' << format_double(v);
        out_ << '\n';
    }
    void close() {
        out_.close();
        if (!out_) throw Error("failed writing '" + path_ + "'");
    }

private:
    std::ofstream out_;
    std::string path_;
};

GaussianCloud cloud_of(const Scenario& sc) {
    GaussianCloud c;
    c.x0 = sc.initial.x0;
    c.p0 = sc.initial.p0;
    c.sigma_x = sc.initial.sigma_x;
    c.sigma_p = sc.initial.sigma_p;
    return c;
}

PhaseSpaceGrid initial_phase_grid(const Scenario& sc) {
    const auto& f = sc.fpe;
    return gaussian_phase_grid(Axis::spanning(f.x_min, f.x_max, f.nx), Axis::spanning(f.p_min, f.p_max, f.np),
                               sc.initial.x0[0], sc.initial.p0[0], sc.initial.sigma_x[0], sc.initial.sigma_p[0]);
}

GridSpec psi_grid(const Scenario& sc, std::size_t points, double half_width) {
    return GridSpec::cube(static_cast<std::size_t>(sc.dim), points, half_width);
}

WaveFunction initial_psi(const Scenario& sc, const GridSpec& grid) {
    const auto d = static_cast<std::size_t>(sc.dim);
    if (sc.initial.kind == "eigenstate")
        return harmonic_eigenstate(grid, 1, sc.dim, sc.consts, harmonic_omegas(sc), sc.initial.quanta);
    GaussianPacket gp;
    for (std::size_t a = 0; a < d; ++a) {
        gp.center.push_back(sc.initial.x0[a]);
        gp.sigma.push_back(sc.initial.sigma_x[a]);
        gp.wavenumber.push_back(sc.initial.p0[a] / sc.consts.hbar);
        gp.chirp.push_back(0.0);
    }
    return gaussian_packet(grid, 1, sc.dim, gp);
}

ExperimentConfig sde_config(const Scenario& sc) {
    ExperimentConfig cfg;
    cfg.consts = sc.consts;
    cfg.fields = sc.fields;
    cfg.initial = cloud_of(sc);
    cfg.trajectories = sc.sde.trajectories;
    cfg.dt = sc.sde.dt;
    cfg.steps = whole_steps(sc.sde.horizon, sc.sde.dt);
    cfg.record_every = sc.sde.record_every;
    cfg.scheme = sc.sde.scheme;
    cfg.seed = sc.seed;
    cfg.allow_unstable_dt = sc.sde.allow_unstable_dt;
    return cfg;
}

ExperimentResult run_sde(RunContext& ctx, const ExperimentConfig& cfg, const std::string& tag = "sde") {
    ctx.stage = "engine " + tag;
    auto result = run_experiment(cfg);
    write_moments_csv(ctx.path(tag + "_moments.csv"), result.records);
    ctx.artifact(tag + "_moments", tag + "_moments.csv");
    write_ensemble_snapshot(ctx.path(tag + "_final.bin"), result.final_state);
    ctx.artifact(tag + "_final", tag + "_final.bin");
    return result;
}

FpRun run_fpe(RunContext& ctx, const FieldSpec& fields, std::size_t steps, const std::string& tag = "fp") {
    const Scenario& sc = ctx.scenario();
    ctx.stage = "engine " + tag;
    auto run = fp_evolve(initial_phase_grid(sc), sc.consts, fields, sc.fpe.dt, steps, sc.fpe.record_every);
    write_fp_diagnostics_csv(ctx.path(tag + "_diagnostics.csv"), run.diagnostics);
    ctx.artifact(tag + "_diagnostics", tag + "_diagnostics.csv");
    write_phase_grid(ctx.path(tag + "_final.bin"), run.grid);
    ctx.artifact(tag + "_final", tag + "_final.bin");
    return run;
}

PsiRun run_psi(RunContext& ctx, const FieldSpec& fields, PsiScheme scheme, std::size_t steps,
               const std::string& tag = "psi") {
    const Scenario& sc = ctx.scenario();
    ctx.stage = "engine " + tag;
    const auto grid = psi_grid(sc, sc.qsolver.points, sc.qsolver.half_width);
    auto run = evolve_psi_steps(initial_psi(sc, grid), sc.consts, fields, sc.qsolver.dt, steps, sc.qsolver.record_every,
                                scheme);
    write_psi_records_csv(ctx.path(tag + "_records.csv"), run.records);
    ctx.artifact(tag + "_records", tag + "_records.csv");
    write_wavefunction(ctx.path(tag + "_final.bin"), run.psi);
    ctx.artifact(tag + "_final", tag + "_final.bin");
    return run;
}

// Ordinary least squares slope.
double ols_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const double n = static_cast<double>(t.size());
    double tb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tb += t[i];
        yb += y[i];
    }
    tb /= n;
    yb /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        num += (t[i] - tb) * (y[i] - yb);
        den += (t[i] - tb) * (t[i] - tb);
    }
    return num / den;
}

// ---------------------------------------------------------------------------

void task_evolve(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    if (sc.engines.count("sde")) run_sde(ctx, sde_config(sc));
    if (sc.engines.count("fpe")) run_fpe(ctx, sc.fields, whole_steps(sc.fpe.horizon, sc.fpe.dt));
    if (sc.engines.count("qsolver"))
        run_psi(ctx, sc.fields, sc.qsolver.scheme, whole_steps(sc.qsolver.horizon, sc.qsolver.dt));
}

void task_zero_point(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    if (sc.dim != 3) throw ValidationError("scenario.dim", "the zero-point task is three-dimensional");
    const auto omega = harmonic_omegas(sc);
    const double hbar = sc.consts.hbar;
    const double offset = 1.5 * hbar * hbar;

    ctx.stage = "ground-state grid";
    double sigma = 0.0;
    for (double w : omega) sigma = std::max(sigma, std::sqrt(hbar / (2.0 * sc.consts.mass * w)));
    const auto points = param_count(sc, "points", 128);
    const double hw = param_positive(sc, "half_width_sigmas", 8.0) * sigma;
    {
        const auto ground = harmonic_eigenstate(GridSpec::cube(3, points, hw), 1, 3, sc.consts, omega, {0, 0, 0});
        const double cl = L2_classical(ground, sc.consts);
        const double q = quantum_expectation(ground, angular_momentum_squared(3), hbar).real();
        ctx.check("ground_grid", Comparison::Relative, cl - q, offset, 0.0,
                  std::to_string(points) + "^3 grid; classical " + format_double(cl) + ", quantum " + format_double(q));
    }

    ctx.stage = "symbolic identity";
    const auto sym = L2_symmetric_operator(1, 3);
    const auto lsq = angular_momentum_squared(3);
    const auto residual = sym - lsq - OperatorPolynomial::constant(ExactComplex(Rational(3, 2)), 2);
    ctx.check("symbolic_constant", Comparison::AtMost, static_cast<double>(residual.terms().size()), 0.0, 0.0,
              "terms left in sym(L^2) - L^2 - (3/2) hbar^2");

    ctx.stage = "additional states";
    const auto n_extra = param_count(sc, "extra_states", 10);
    const auto extra_points = param_count(sc, "extra_points", 48);
    const double extra_hw = param_positive(sc, "extra_half_width", 9.0);
    const auto g = GridSpec::cube(3, extra_points, extra_hw);
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> quanta(0, 2);
    CsvWriter csv(ctx.path("zero_point_states.csv"), {"state", "sym", "quantum", "difference", "relative_error"});
    double worst = 0.0;
    for (std::size_t s = 0; s < n_extra; ++s) {
        WaveFunction psi;
        if (s % 2 == 0) {
            std::vector<double> w;
            std::vector<int> n;
            for (int a = 0; a < 3; ++a) {
                w.push_back(0.9 + 0.3 * std::abs(u(rng)));
                n.push_back(quanta(rng));
            }
            psi = harmonic_eigenstate(g, 1, 3, sc.consts, w, n);
        } else {
            GaussianPacket gp;
            for (int a = 0; a < 3; ++a) {
                gp.center.push_back(0.4 * u(rng));
                gp.sigma.push_back(0.8 + 0.3 * std::abs(u(rng)));
                gp.wavenumber.push_back(u(rng));
                gp.chirp.push_back(0.2 * u(rng));
            }
            psi = gaussian_packet(g, 1, 3, gp);
        }
        const double a = quantum_expectation(psi, sym, hbar).real();
        const double b = quantum_expectation(psi, lsq, hbar).real();
        const double rel = std::abs((a - b) - offset) / offset;
        worst = std::max(worst, rel);
        csv.row({static_cast<double>(s), a, b, a - b, rel});
    }
    csv.close();
    ctx.artifact("zero_point_states", "zero_point_states.csv");
    ctx.check("extra_states", Comparison::AtMost, worst, 0.0, 0.0,
              "largest relative error of <sym(L^2)> - <L^2> against 1.5 hbar^2 over " + std::to_string(n_extra) + " states");
}

void task_chi4_oracle(RunContext& ctx) {
    ctx.stage = "chi4 tuples";
    CsvWriter csv(ctx.path("chi4_tuples.csv"), {"i", "j", "k", "l", "terms", "match"});
    int mismatches = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const auto a = chi4_symmetric(i, j, k, l);
                    const bool match = a == chi4_closed_form(i, j, k, l);
                    mismatches += match ? 0 : 1;
                    csv.row({double(i), double(j), double(k), double(l), double(a.terms().size()), match ? 1.0 : 0.0});
                }
    csv.close();
    ctx.artifact("chi4_tuples", "chi4_tuples.csv");
    ctx.check("mismatches", Comparison::AtMost, mismatches, 0.0, 0.0, "81 index tuples, exact rational comparison");
}

void task_manybody_constant(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const double hbar = sc.consts.hbar;
    ctx.stage = "symbolic constants";
    CsvWriter csv(ctx.path("manybody_constants.csv"), {"particles", "dim", "constant", "expected", "residual_terms"});
    int bad = 0;
    for (int n = 1; n <= 3; ++n)
        for (int d = 2; d <= 3; ++d) {
            OperatorPolynomial quantum;
            for (int alpha = 0; alpha < n; ++alpha) quantum = quantum + angular_momentum_squared(d, alpha);
            const Rational expected(n * d * (d - 1), 4);
            const auto residual = L2_symmetric_operator(n, d) - quantum - OperatorPolynomial::constant(ExactComplex(expected), 2);
            const auto constant = L2_symmetric_operator(n, d).constant_term(2);
            const bool ok = residual.empty() && constant == ExactComplex(expected) &&
                            zero_point_constant(n, d) == expected;
            bad += ok ? 0 : 1;
            csv.row({double(n), double(d), boost::rational_cast<double>(constant.re), boost::rational_cast<double>(expected),
                     double(residual.terms().size())});
        }
    csv.close();
    ctx.artifact("manybody_constants", "manybody_constants.csv");
    ctx.check("symbolic_constant", Comparison::AtMost, bad, 0.0, 0.0,
              "N in {1,2,3}, D in {2,3}: sym(L^2_N) - sum L^2 = N D (D-1) hbar^2 / 4 exactly");

    ctx.stage = "two-particle grid";
    const double w = 1.0;
    const double sigma = std::sqrt(hbar / (2.0 * sc.consts.mass * w));
    const auto points = param_count(sc, "points", 24);
    const double hw = param_positive(sc, "half_width_sigmas", 8.0) * sigma;
    const auto ground = harmonic_eigenstate(GridSpec::cube(4, points, hw), 2, 2, sc.consts, {w}, {0});
    const double cl = mb_L2_classical(ground, sc.consts);
    const double q = quantum_expectation(ground, angular_momentum_squared(2, 0) + angular_momentum_squared(2, 1), hbar).real();
    ctx.check("grid_N2_D2", Comparison::Relative, cl - q, hbar * hbar, 0.0,
              std::to_string(points) + "^4 grid; classical " + format_double(cl) + ", quantum " + format_double(q));
}

void task_energy_rate(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const double expected = sc.dim * sc.consts.vacuum_power;
    const auto sde = run_sde(ctx, sde_config(sc));
    ctx.check("sde_rate", Comparison::Sigma, sde.energy_rate.slope, expected, sde.energy_rate.stderr_slope,
              std::to_string(sc.sde.trajectories) + " trajectories, horizon " + format_double(sc.sde.horizon));

    const auto fp = run_fpe(ctx, sc.fields, whole_steps(sc.fpe.horizon, sc.fpe.dt));
    std::vector<double> t, h;
    for (const auto& d : fp.diagnostics) {
        t.push_back(d.time);
        h.push_back(d.mean_energy);
    }
    ctx.check("fpe_rate", Comparison::Relative, ols_slope(t, h), expected, 0.0,
              std::to_string(sc.fpe.nx) + "x" + std::to_string(sc.fpe.np) + " lattice, final norm " +
                  format_double(fp.diagnostics.back().norm));
}

void task_norm_preservation(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    harmonic_omegas(sc);
    const auto steps = param_count(sc, "steps", 1000);
    CsvWriter csv(ctx.path("norm_drift.csv"), {"run", "t", "drift"});
    auto drift_of = [&](const std::string& label, const std::vector<std::pair<double, double>>& series) {
        double worst = 0.0;
        for (const auto& [t, n] : series) {
            const double d = std::abs(n - series.front().second);
            worst = std::max(worst, d);
            csv.row(label, {t, d});
        }
        return worst;
    };
    auto fp_series = [](const FpRun& r) {
        std::vector<std::pair<double, double>> s;
        for (const auto& d : r.diagnostics) s.emplace_back(d.time, d.norm);
        return s;
    };
    auto psi_series = [](const PsiRun& r) {
        std::vector<std::pair<double, double>> s;
        for (const auto& d : r.records) s.emplace_back(d.time, d.norm);
        return s;
    };

    const auto free_run = run_fpe(ctx, FieldSpec::free(1), steps, "fp_free");
    const double free_drift = drift_of("fpe_free", fp_series(free_run));
    const auto harm_run = run_fpe(ctx, sc.fields, steps, "fp_harmonic");
    const double harm_drift = drift_of("fpe_harmonic", fp_series(harm_run));
    const auto sp = run_psi(ctx, sc.fields, PsiScheme::Spectral, steps, "psi_spectral");
    const double sp_drift = drift_of("psi_spectral", psi_series(sp));
    const auto cn = run_psi(ctx, sc.fields, PsiScheme::CrankNicolson, steps, "psi_cn");
    const double cn_drift = drift_of("psi_crank_nicolson", psi_series(cn));
    csv.close();
    ctx.artifact("norm_drift", "norm_drift.csv");

    const std::string n = std::to_string(steps) + " steps";
    ctx.check("fpe_free", Comparison::AtMost, free_drift, 0.0, 0.0,
              n + ", absorbed " + format_double(free_run.budget.absorbed) + ", clipped " +
                  format_double(free_run.budget.clipped));
    ctx.check("fpe_harmonic", Comparison::AtMost, harm_drift, 0.0, 0.0,
              n + ", absorbed " + format_double(harm_run.budget.absorbed) + ", clipped " +
                  format_double(harm_run.budget.clipped));
    ctx.check("psi_spectral", Comparison::AtMost, sp_drift, 0.0, 0.0, n);
    ctx.check("psi_crank_nicolson", Comparison::AtMost, cn_drift, 0.0, 0.0, n);
}

void task_ehrenfest(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const auto omega = harmonic_omegas(sc);
    if (!(sc.consts.vacuum_power > 0.0))
        throw ValidationError("constants.vacuum_power", "the ehrenfest task compares P = 0 with the configured P > 0");
    const double periods = param_positive(sc, "periods", 2.0);
    const double w_max = *std::max_element(omega.begin(), omega.end());
    const double horizon = periods * 2.0 * M_PI / w_max;

    CsvWriter csv(ctx.path("residuals.csv"), {"P", "t", "axis", "z_position", "z_momentum", "force_residual"});
    const double mu = sc.consts.mass;
    for (int variant = 0; variant < 2; ++variant) {
        ExperimentConfig cfg = sde_config(sc);
        cfg.consts.vacuum_power = variant == 0 ? 0.0 : sc.consts.vacuum_power;
        cfg.steps = static_cast<std::size_t>(std::ceil(horizon / cfg.dt));
        cfg.seed = sc.seed + static_cast<std::uint64_t>(variant);
        const auto res = run_sde(ctx, cfg, variant == 0 ? "sde_P0" : "sde_P");
        const auto force = ehrenfest_residual(res.records, cfg.fields, cfg.consts);

        // Classical orbit started from the ensemble's own initial means.
        const auto& first = res.records.front();
        double zx = 0.0, zp = 0.0;
        for (std::size_t k = 0; k < res.records.size(); ++k) {
            const auto& r = res.records[k];
            const double t = r.time - first.time;
            for (int a = 0; a < sc.dim; ++a) {
                const double w = omega[static_cast<std::size_t>(a)];
                const double x0 = first.mean_x[a], v0 = first.mean_v[a];
                const double x_cl = x0 * std::cos(w * t) + v0 / w * std::sin(w * t);
                const double v_cl = v0 * std::cos(w * t) - x0 * w * std::sin(w * t);
                const double n = static_cast<double>(r.count);
                const double se_x = std::sqrt(r.var_x[a] / n);
                const double se_p = mu * std::sqrt(r.var_v[a] / n);
                const double z1 = se_x > 0 ? (r.mean_x[a] - x_cl) / se_x : 0.0;
                const double z2 = se_p > 0 ? (mu * r.mean_v[a] - mu * v_cl) / se_p : 0.0;
                zx = std::max(zx, std::abs(z1));
                zp = std::max(zp, std::abs(z2));
                double fres = 0.0;
                for (const auto& f : force)
                    if (std::abs(f.time - r.time) < 1e-12) fres = f.residual[a];
                csv.row({cfg.consts.vacuum_power, r.time, double(a), z1, z2, fres});
            }
        }
        const std::string suffix = variant == 0 ? "P0" : "P";
        const std::string detail = "max |z| over " + std::to_string(res.records.size()) + " records, P = " +
                                   format_double(cfg.consts.vacuum_power);
        ctx.check("position_" + suffix, Comparison::AtMost, zx, 0.0, 0.0, detail);
        ctx.check("momentum_" + suffix, Comparison::AtMost, zp, 0.0, 0.0, detail);
    }
    csv.close();
    ctx.artifact("residuals", "residuals.csv");
}

void task_p_independent(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const auto levels = param_count(sc, "levels", 4);
    if (levels < 2) throw ValidationError("task.levels", "needs at least two refinement levels");
    CsvWriter csv(ctx.path("residuals.csv"),
                  {"level", "points", "dx", "dt", "density_residual", "current_residual", "density_scale", "current_scale"});
    std::vector<double> ldx, lrho, lj;
    for (std::size_t lev = 0; lev < levels; ++lev) {
        ctx.stage = "refinement level " + std::to_string(lev);
        const auto scale = std::size_t{1} << lev;
        const std::size_t n = sc.qsolver.points * scale;
        const double dt = sc.qsolver.dt / static_cast<double>(scale);
        const auto grid = psi_grid(sc, n, sc.qsolver.half_width);
        auto a = initial_psi(sc, grid);
        const auto steps = whole_steps(sc.qsolver.horizon, sc.qsolver.dt) * scale;
        for (std::size_t s = 0; s < steps; ++s) evolve_psi_inplace(a, sc.consts, sc.fields, dt, sc.qsolver.scheme);
        const auto b = evolve_psi(a, sc.consts, sc.fields, dt, sc.qsolver.scheme);
        const auto c = evolve_psi(b, sc.consts, sc.fields, dt, sc.qsolver.scheme);
        const auto r = consistency_check_P_independent(a, b, c, sc.consts, sc.fields, DerivativeMode::FourthOrder);
        csv.row({double(lev), double(n), grid.step[0], dt, r.density_residual, r.current_residual, r.density_scale,
                 r.current_scale});
        ldx.push_back(std::log(grid.step[0]));
        lrho.push_back(std::log(r.density_residual));
        lj.push_back(std::log(r.current_residual));
    }
    csv.close();
    ctx.artifact("residuals", "residuals.csv");
    const std::string detail = "log-log slope over " + std::to_string(levels) + " joint (dt, dx) levels";
    ctx.check("density_order", Comparison::AtLeast, ols_slope(ldx, lrho), 0.0, 0.0, detail);
    ctx.check("current_order", Comparison::AtLeast, ols_slope(ldx, lj), 0.0, 0.0, detail);
}

void task_cross_engine(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    if (sc.dim != 1) throw ValidationError("scenario.dim", "the cross-engine task is one-dimensional");
    if (sc.consts.vacuum_power != 0.0) throw ValidationError("constants.vacuum_power", "the cross-engine task needs P = 0");
    const double horizon = sc.fpe.horizon;
    if (std::abs(sc.sde.horizon - horizon) > 1e-12 || std::abs(sc.qsolver.horizon - horizon) > 1e-12)
        throw ValidationError("sde.horizon", "sde, fpe and qsolver horizons must agree");
    const double every = param_positive(sc, "compare_every", horizon);
    const auto bins = param_count(sc, "bins", 64);
    const Axis lattice = Axis::spanning(sc.fpe.x_min, sc.fpe.x_max, bins);
    const auto n_cmp = whole_steps(horizon, every);
    auto chunk = [&](double dt, const std::string& section) {
        const double r = every / dt;
        if (std::abs(r - std::round(r)) > 1e-9 * r)
            throw ValidationError("task.compare_every", "must be a whole number of " + section + " steps");
        return static_cast<std::size_t>(std::llround(r));
    };
    const auto sde_chunk = chunk(sc.sde.dt, "sde");
    const auto fp_chunk = chunk(sc.fpe.dt, "fpe");
    const auto psi_chunk = chunk(sc.qsolver.dt, "qsolver");
    if (sc.sde.scheme == SdeScheme::EulerMaruyama && !sc.sde.allow_unstable_dt) {
        const double w = sc.fields.max_frequency();
        if (w > 0.0 && sc.sde.dt > sde_stability_bound(sc.fields)) throw StabilityError("sde.dt exceeds the stability bound");
    }

    ctx.stage = "initial data";
    auto ens = make_ensemble(sc.consts, sc.fields, sc.sde.trajectories, cloud_of(sc), sc.seed);
    auto phase = initial_phase_grid(sc);
    auto psi = initial_psi(sc, psi_grid(sc, sc.qsolver.points, sc.qsolver.half_width));

    auto sde_mass = [&]() {
        std::vector<double> m(bins, 0.0);
        const std::size_t stride = ens.coords();
        for (std::size_t k = 0; k < ens.size(); ++k) {
            const long b = lattice.locate(ens.positions[k * stride]);
            if (b >= 0) m[static_cast<std::size_t>(b)] += 1.0;
        }
        for (auto& v : m) v /= static_cast<double>(ens.size());
        return m;
    };
    auto fp_mass = [&]() {
        std::vector<double> m(bins, 0.0);
        const auto marg = phase.position_marginal();
        for (std::size_t i = 0; i < marg.size(); ++i) {
            const long b = lattice.locate(phase.x_axis.center(i));
            if (b >= 0) m[static_cast<std::size_t>(b)] += marg[i] * phase.x_axis.step;
        }
        return m;
    };
    auto psi_mass = [&]() {
        std::vector<double> m(bins, 0.0);
        for (std::size_t i = 0; i < psi.grid.n[0]; ++i) {
            const long b = lattice.locate(psi.grid.coordinate(0, i));
            if (b >= 0) m[static_cast<std::size_t>(b)] += std::norm(psi.amplitude[i]) * psi.grid.step[0];
        }
        return m;
    };
    auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s;
    };

    CsvWriter l1csv(ctx.path("l1_distance.csv"), {"t", "fp_sde", "fp_psi", "sde_psi"});
    std::vector<MomentRecord> moments{measure_moments(ens)};
    std::vector<FpDiagnostics> fp_diag;
    std::vector<PsiRecord> psi_rec;
    std::vector<double> ms = sde_mass(), mf = fp_mass(), mq = psi_mass();
    l1csv.row({0.0, l1(mf, ms), l1(mf, mq), l1(ms, mq)});
    for (std::size_t c = 1; c <= n_cmp; ++c) {
        ctx.stage = "engine sde";
        for (std::size_t s = 0; s < sde_chunk; ++s) step_ensemble_inplace(ens, sc.sde.dt, sc.sde.scheme);
        moments.push_back(measure_moments(ens));
        ctx.stage = "engine fpe";
        auto fr = fp_evolve(std::move(phase), sc.consts, sc.fields, sc.fpe.dt, fp_chunk, sc.fpe.record_every);
        phase = std::move(fr.grid);
        fp_diag.insert(fp_diag.end(), fr.diagnostics.begin() + (c == 1 ? 0 : 1), fr.diagnostics.end());
        ctx.stage = "engine qsolver";
        auto pr = evolve_psi_steps(std::move(psi), sc.consts, sc.fields, sc.qsolver.dt, psi_chunk, sc.qsolver.record_every,
                                   sc.qsolver.scheme);
        psi = std::move(pr.psi);
        psi_rec.insert(psi_rec.end(), pr.records.begin() + (c == 1 ? 0 : 1), pr.records.end());
        ms = sde_mass();
        mf = fp_mass();
        mq = psi_mass();
        l1csv.row({static_cast<double>(c) * every, l1(mf, ms), l1(mf, mq), l1(ms, mq)});
    }
    l1csv.close();
    ctx.artifact("l1_distance", "l1_distance.csv");

    ctx.stage = "artifacts";
    write_moments_csv(ctx.path("sde_moments.csv"), moments);
    ctx.artifact("sde_moments", "sde_moments.csv");
    write_ensemble_snapshot(ctx.path("sde_final.bin"), ens);
    ctx.artifact("sde_final", "sde_final.bin");
    write_fp_diagnostics_csv(ctx.path("fp_diagnostics.csv"), fp_diag);
    ctx.artifact("fp_diagnostics", "fp_diagnostics.csv");
    write_phase_grid(ctx.path("fp_final.bin"), phase);
    ctx.artifact("fp_final", "fp_final.bin");
    write_psi_records_csv(ctx.path("psi_records.csv"), psi_rec);
    ctx.artifact("psi_records", "psi_records.csv");
    write_wavefunction(ctx.path("psi_final.bin"), psi);
    ctx.artifact("psi_final", "psi_final.bin");

    CsvWriter marg(ctx.path("marginals.csv"), {"x", "fpe", "sde", "qsolver"});
    for (std::size_t b = 0; b < bins; ++b)
        marg.row({lattice.center(b), mf[b] / lattice.step, ms[b] / lattice.step, mq[b] / lattice.step});
    marg.close();
    ctx.artifact("marginals", "marginals.csv");

    const std::string detail = std::to_string(bins) + "-bin lattice on [" + format_double(lattice.lo) + ", " +
                               format_double(lattice.hi()) + "] at t = " + format_double(horizon);
    ctx.check("fp_sde", Comparison::AtMost, l1(mf, ms), 0.0, 0.0, detail);
    ctx.check("fp_psi", Comparison::AtMost, l1(mf, mq), 0.0, 0.0, detail);
    ctx.check("sde_psi", Comparison::AtMost, l1(ms, mq), 0.0, 0.0, detail);
}

void task_ground_energy(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const auto omega = harmonic_omegas(sc);
    double sigma = 0.0;
    for (double w : omega) sigma = std::max(sigma, std::sqrt(sc.consts.hbar / (2.0 * sc.consts.mass * w)));
    const auto points = param_count(sc, "points", 64);
    const double hw = param_positive(sc, "half_width_sigmas", 8.0) * sigma;
    const auto grid = psi_grid(sc, points, hw);
    ctx.stage = "eigenstate";
    const auto psi = initial_psi(sc, grid);
    std::vector<int> quanta = sc.initial.quanta;
    if (sc.initial.kind != "eigenstate") throw ValidationError("initial.kind", "the ground-energy task needs an eigenstate");
    double expected = 0.0;
    for (int a = 0; a < sc.dim; ++a) expected += sc.consts.hbar * omega[static_cast<std::size_t>(a)] * (quanta[a] + 0.5);
    const double e = hamiltonian_expectation(psi, sc.consts, sc.fields, EnergyMode::Spectral);
    write_wavefunction(ctx.path("psi_initial.bin"), psi);
    ctx.artifact("psi_initial", "psi_initial.bin");
    ctx.check("energy", Comparison::Relative, e, expected, 0.0, std::to_string(points) + "-point spectral grid per axis");
}

std::vector<fs::path> numeric_files(const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && (e.path().extension() == ".csv" || e.path().extension() == ".bin"))
            out.push_back(fs::relative(e.path(), root));
    std::sort(out.begin(), out.end());
    return out;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || !fs::exists(b) || fs::file_size(a) != fs::file_size(b)) return false;
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    return std::equal(std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>(),
                      std::istreambuf_iterator<char>(fb));
}

void task_determinism(RunContext& ctx) {
    const Scenario& sc = ctx.scenario();
    const auto it = sc.task_params.find("rerun");
    if (it == sc.task_params.end()) throw ValidationError("task.rerun", "lists the scenarios to repeat");
    std::vector<std::string> names;
    std::string cur;
    for (char c : it->second + ",") {
        if (c == ',' || c == ' ') {
            if (!cur.empty()) names.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    CsvWriter csv(ctx.path("determinism.csv"), {"scenario", "file_index", "bytes", "identical"});
    std::size_t compared = 0, differing = 0;
    for (const auto& name : names) {
        Scenario inner = builtin_scenario(name);
        if (inner.task == "determinism") throw ValidationError("task.rerun", "cannot repeat a determinism scenario");
        std::vector<fs::path> dirs;
        for (const char* pass : {"pass_a", "pass_b"}) {
            ctx.stage = "rerun " + name + " " + pass;
            inner.output_dir = (ctx.dir() / pass).string();
            run(inner);
            dirs.push_back(fs::path(inner.output_dir) / inner.name);
        }
        auto fa = numeric_files(dirs[0]), fb = numeric_files(dirs[1]);
        std::vector<fs::path> all = fa;
        all.insert(all.end(), fb.begin(), fb.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        for (std::size_t i = 0; i < all.size(); ++i) {
            const bool same = same_bytes(dirs[0] / all[i], dirs[1] / all[i]);
            const double bytes = fs::exists(dirs[0] / all[i]) ? static_cast<double>(fs::file_size(dirs[0] / all[i])) : 0.0;
            ++compared;
            differing += same ? 0 : 1;
            csv.row(name + "/" + all[i].generic_string(), {double(i), bytes, same ? 1.0 : 0.0});
        }
    }
    csv.close();
    ctx.artifact("determinism", "determinism.csv");
    ctx.check("differing_files", Comparison::AtMost, static_cast<double>(differing), 0.0, 0.0,
              std::to_string(compared) + " numeric artifacts compared across two runs of " + std::to_string(names.size()) +
                  " scenarios");
}

using TaskFn = void (*)(RunContext&);

TaskFn task_function(const std::string& name) {
    static const std::map<std::string, TaskFn> table = {
        {"evolve", task_evolve},
        {"zero-point", task_zero_point},
        {"chi4-oracle", task_chi4_oracle},
        {"manybody-constant", task_manybody_constant},
        {"energy-rate", task_energy_rate},
        {"norm-preservation", task_norm_preservation},
        {"ehrenfest", task_ehrenfest},
        {"p-independent", task_p_independent},
        {"cross-engine", task_cross_engine},
        {"ground-energy", task_ground_energy},
        {"determinism", task_determinism},
    };
    return table.at(name);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

RunReport run(const Scenario& scenario) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = fs::path(scenario.output_dir) / scenario.name;
    fs::create_directories(dir);
    fs::remove(dir / "FAILED");

    RunContext ctx(scenario, dir);
    ctx.report.scenario = scenario.name;
    ctx.report.task = scenario.task;
    ctx.report.seed = scenario.seed;
    ctx.report.run_dir = dir.string();
    write_text(ctx.path("scenario_echo.ini"), scenario.echo());
    ctx.artifact("scenario_echo", "scenario_echo.ini");

    auto finish = [&] {
        ctx.report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text(ctx.path("report.json"), report_to_json(ctx.report));
    };
    try {
        task_function(scenario.task)(ctx);
    } catch (const std::exception& e) {
        const std::string msg = "scenario '" + scenario.name + "' failed during " + ctx.stage + ": " + e.what();
        ctx.report.status = "error";
        ctx.report.error = msg;
        write_text(ctx.path("FAILED"), msg + "\n");
        finish();
        throw Error(msg);
    }
    const TaskInfo& info = find_task(scenario.task);
    bool all = ctx.report.checks.size() == info.checks.size();
    for (const auto& c : ctx.report.checks) all = all && c.pass;
    ctx.report.status = all ? "passed" : "failed";
    finish();
    return ctx.report;
}

}  // namespace stochlab
