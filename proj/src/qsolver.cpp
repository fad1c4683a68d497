#include "stochlab/qsolver.hpp"

#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"

#include <cmath>
#include <fstream>

namespace stochlab {

namespace {

Vec3 particle_position(const GridSpec& grid, int dim, int particle, std::size_t flat) {
    Vec3 x{};
    for (int i = 0; i < dim; ++i) x[i] = grid.coordinate_of(flat, static_cast<std::size_t>(particle * dim + i));
    return x;
}

void check_fields(const WaveFunction& psi, const FieldSpec& fields) {
    if (fields.dim() != psi.dim)
        throw UsageError("field dimension " + std::to_string(fields.dim()) + " does not match wavefunction dimension " +
                         std::to_string(psi.dim));
}

// Index of the n-th line along `axis` and its first element.
inline std::size_t line_base(const GridSpec& grid, std::size_t axis, std::size_t line) {
    const std::size_t stride = grid.stride(axis);
    return (line / stride) * grid.n[axis] * stride + line % stride;
}

// Solves (1 + i tau H) out = (1 - i tau H) in along one line, where H is the
// Peierls-coupled tridiagonal kinetic operator plus an optional diagonal.
void cn_line(cplx* data, std::size_t stride, std::size_t n, double tau, double hop, const std::vector<double>& theta,
             const double* diagonal_extra, std::vector<cplx>& work) {
    work.resize(4 * n);
    cplx* rhs = work.data();
    cplx* cprime = rhs + n;
    cplx* dprime = cprime + n;
    cplx* upper = dprime + n;  // H_{j,j+1}
    const cplx I(0.0, 1.0);
    for (std::size_t j = 0; j + 1 < n; ++j)
        upper[j] = theta.empty() ? cplx(-hop) : -hop * std::exp(cplx(0.0, -theta[j]));
    auto diag = [&](std::size_t j) { return 2.0 * hop + (diagonal_extra ? diagonal_extra[j] : 0.0); };
    for (std::size_t j = 0; j < n; ++j) {
        cplx h = diag(j) * data[j * stride];
        if (j + 1 < n) h += upper[j] * data[(j + 1) * stride];
        if (j > 0) h += std::conj(upper[j - 1]) * data[(j - 1) * stride];
        rhs[j] = data[j * stride] - I * tau * h;
    }
    // Thomas sweep on the Hermitian-shifted system.
    for (std::size_t j = 0; j < n; ++j) {
        const cplx b = 1.0 + I * tau * diag(j);
        const cplx a = j > 0 ? I * tau * std::conj(upper[j - 1]) : cplx(0.0);
        const cplx c = j + 1 < n ? I * tau * upper[j] : cplx(0.0);
        const cplx m = j > 0 ? b - a * cprime[j - 1] : b;
        cprime[j] = c / m;
        dprime[j] = j > 0 ? (rhs[j] - a * dprime[j - 1]) / m : rhs[j] / m;
    }
    data[(n - 1) * stride] = dprime[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) data[j * stride] = dprime[j] - cprime[j] * data[(j + 1) * stride];
}

// Peierls phases (1/hbar) int (e/c)A_axis dx on the n-1 links of a line.
void link_phases(const GridSpec& grid, int dim, const PhysicalConstants& consts, const FieldSpec& fields, double t,
                 std::size_t axis, std::size_t base, std::vector<double>& theta) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t n = grid.n[axis];
    const int particle = static_cast<int>(axis) / dim;
    const int comp = static_cast<int>(axis) % dim;
    const double h = grid.step[axis];
    theta.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        Vec3 x = particle_position(grid, dim, particle, base + j * stride);
        x[comp] += 0.5 * h;
        theta[j] = consts.coupling() * fields.vector_potential(x, t)[comp] * h / consts.hbar;
    }
}

void cn_sweep(WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields, double t, double dt,
              std::size_t axis, const RealField* potential) {
    const GridSpec& grid = psi.grid;
    const std::size_t n = grid.n[axis];
    const std::size_t stride = grid.stride(axis);
    const std::size_t lines = grid.size() / n;
    const double h = grid.step[axis];
    const double hop = consts.hbar * consts.hbar / (2.0 * consts.mass * h * h);
    const double tau = dt / (2.0 * consts.hbar);
    const bool has_A = fields.has_vector_potential();
#pragma omp parallel
    {
        std::vector<cplx> work;
        std::vector<double> theta;
        std::vector<double> vline;
#pragma omp for schedule(static)
        for (std::size_t line = 0; line < lines; ++line) {
            const std::size_t base = line_base(grid, axis, line);
            if (has_A)
                link_phases(grid, psi.dim, consts, fields, t, axis, base, theta);
            else
                theta.clear();
            const double* extra = nullptr;
            if (potential) {
                vline.resize(n);
                for (std::size_t j = 0; j < n; ++j) vline[j] = (*potential)[base + j * stride];
                extra = vline.data();
            }
            cn_line(psi.amplitude.data() + base, stride, n, tau, hop, theta, extra, work);
        }
    }
}

void potential_phase(WaveFunction& psi, const RealField& v, double dt, double hbar) {
    const std::size_t n = psi.amplitude.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) psi.amplitude[i] *= std::exp(cplx(0.0, -v[i] * dt / hbar));
}

void spectral_step(WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt) {
    const GridSpec& grid = psi.grid;
    const double tmid = psi.time + 0.5 * dt;
    const RealField v = sample_grid_fields(grid, psi.particles, psi.dim, consts, fields, tmid, false).potential;
    potential_phase(psi, v, 0.5 * dt, consts.hbar);
    fft_forward(grid, psi.amplitude);
    std::vector<std::vector<cplx>> phase(grid.axes());
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        const auto k = wavenumbers(grid, a);
        phase[a].resize(k.size());
        for (std::size_t m = 0; m < k.size(); ++m)
            phase[a][m] = std::exp(cplx(0.0, -consts.hbar * k[m] * k[m] * dt / (2.0 * consts.mass)));
    }
    std::vector<std::size_t> idx(grid.axes(), 0);
    for (auto& value : psi.amplitude) {
        cplx f = 1.0;
        for (std::size_t a = 0; a < grid.axes(); ++a) f *= phase[a][idx[a]];
        value *= f;
        for (std::size_t a = grid.axes(); a-- > 0;) {
            if (++idx[a] < grid.n[a]) break;
            idx[a] = 0;
        }
    }
    fft_backward(grid, psi.amplitude);
    potential_phase(psi, v, 0.5 * dt, consts.hbar);
}

void crank_nicolson_step(WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt) {
    const double tmid = psi.time + 0.5 * dt;
    const GridSpec& grid = psi.grid;
    const RealField v = sample_grid_fields(grid, psi.particles, psi.dim, consts, fields, tmid, false).potential;
    if (grid.axes() == 1) {
        cn_sweep(psi, consts, fields, tmid, dt, 0, &v);
        return;
    }
    potential_phase(psi, v, 0.5 * dt, consts.hbar);
    const std::size_t axes = grid.axes();
    for (std::size_t a = 0; a < axes; ++a) cn_sweep(psi, consts, fields, tmid, 0.5 * dt, a, nullptr);
    for (std::size_t a = axes; a-- > 0;) cn_sweep(psi, consts, fields, tmid, 0.5 * dt, a, nullptr);
    potential_phase(psi, v, 0.5 * dt, consts.hbar);
}

}  // namespace

GridFieldSamples sample_grid_fields(const GridSpec& grid, int particles, int dim, const PhysicalConstants& consts,
                                    const FieldSpec& fields, double t, bool with_derivatives) {
    if (fields.dim() != dim) throw UsageError("field dimension does not match the grid layout");
    GridFieldSamples s;
    const std::size_t size = grid.size();
    const std::size_t axes = grid.axes();
    const double ec = consts.coupling();
    s.has_A = fields.has_vector_potential();
    s.potential.assign(size, 0.0);
    if (s.has_A) s.coupled_A.assign(axes, RealField(size, 0.0));
    if (with_derivatives) {
        s.grad_U.assign(axes, RealField(size, 0.0));
        if (s.has_A) s.grad_coupled_A.assign(axes, std::vector<RealField>(axes, RealField(size, 0.0)));
    }
#pragma omp parallel for schedule(static)
    for (std::size_t flat = 0; flat < size; ++flat) {
        for (int alpha = 0; alpha < particles; ++alpha) {
            const Vec3 x = particle_position(grid, dim, alpha, flat);
            s.potential[flat] += fields.scalar_potential(x, t, consts);
            Vec3 a{};
            if (s.has_A) {
                const Vec3 A = fields.vector_potential(x, t);
                for (int i = 0; i < dim; ++i) {
                    a[i] = ec * A[i];
                    s.coupled_A[static_cast<std::size_t>(alpha * dim + i)][flat] = a[i];
                }
            }
            if (!with_derivatives) continue;
            const ForceBundle fb = fields.derivatives(x, t, consts);
            for (int i = 0; i < dim; ++i) {
                const std::size_t ai = static_cast<std::size_t>(alpha * dim + i);
                double gu = fb.grad_V[i];
                for (int j = 0; j < dim; ++j) gu += a[j] * ec * fb.grad_A[j][i] / consts.mass;
                s.grad_U[ai][flat] = gu;
                if (s.has_A)
                    for (int l = 0; l < dim; ++l)
                        s.grad_coupled_A[ai][static_cast<std::size_t>(alpha * dim + l)][flat] = ec * fb.grad_A[i][l];
            }
        }
    }
    return s;
}

PsiStepReport evolve_psi_inplace(WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                                 PsiScheme scheme, const QsolverOptions& options) {
    if (!(dt > 0.0)) throw UsageError("dt must be > 0");
    check_fields(psi, fields);
    if (scheme == PsiScheme::Spectral && fields.has_vector_potential())
        throw UsageError("the spectral scheme requires A = 0; use crank_nicolson");
    PsiStepReport rep;
    rep.norm_before = psi.norm();
    if (scheme == PsiScheme::Spectral)
        spectral_step(psi, consts, fields, dt);
    else
        crank_nicolson_step(psi, consts, fields, dt);
    psi.time += dt;
    rep.norm_after = psi.norm();
    if (!std::isfinite(rep.norm_after)) throw NumericalError("wavefunction became non-finite");
    if (std::abs(rep.norm_after - rep.norm_before) > options.norm_drift_threshold)
        throw NumericalError("norm drift " + io::format_double(rep.norm_after - rep.norm_before) +
                             " in one step exceeds threshold");
    return rep;
}

WaveFunction evolve_psi(WaveFunction psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                        PsiScheme scheme, const QsolverOptions& options) {
    evolve_psi_inplace(psi, consts, fields, dt, scheme, options);
    return psi;
}

ComplexField apply_hamiltonian(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields) {
    check_fields(psi, fields);
    const GridSpec& grid = psi.grid;
    const auto s = sample_grid_fields(grid, psi.particles, psi.dim, consts, fields, psi.time, false);
    const std::size_t size = psi.amplitude.size();
    ComplexField out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = s.potential[i] * psi.amplitude[i];
    const double inv2m = 1.0 / (2.0 * consts.mass);
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        std::vector<int> pw(grid.axes(), 0);
        pw[a] = 1;
        // (p - a)^2 psi = (p - a) phi with phi = (p - a) psi
        ComplexField phi = apply_momentum_powers(grid, psi.amplitude, pw, consts.hbar);
        if (s.has_A)
            for (std::size_t i = 0; i < size; ++i) phi[i] -= s.coupled_A[a][i] * psi.amplitude[i];
        ComplexField chi = apply_momentum_powers(grid, phi, pw, consts.hbar);
        if (s.has_A)
            for (std::size_t i = 0; i < size; ++i) chi[i] -= s.coupled_A[a][i] * phi[i];
        for (std::size_t i = 0; i < size; ++i) out[i] += inv2m * chi[i];
    }
    return out;
}

double hamiltonian_expectation(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields,
                               EnergyMode mode) {
    check_fields(psi, fields);
    const GridSpec& grid = psi.grid;
    const auto s = sample_grid_fields(grid, psi.particles, psi.dim, consts, fields, psi.time, false);
    const std::size_t size = psi.amplitude.size();
    double potential = 0.0;
    for (std::size_t i = 0; i < size; ++i) potential += s.potential[i] * std::norm(psi.amplitude[i]);
    potential *= grid.cell_volume();

    double kinetic = 0.0;
    if (mode == EnergyMode::Spectral) {
        for (std::size_t a = 0; a < grid.axes(); ++a) {
            std::vector<int> pw(grid.axes(), 0);
            pw[a] = 1;
            ComplexField phi = apply_momentum_powers(grid, psi.amplitude, pw, consts.hbar);
            double acc = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                const cplx v = s.has_A ? phi[i] - s.coupled_A[a][i] * psi.amplitude[i] : phi[i];
                acc += std::norm(v);
            }
            kinetic += acc * grid.cell_volume();
        }
        kinetic /= 2.0 * consts.mass;
        return kinetic + potential;
    }

    // Quadratic form of the Dirichlet stencil: link differences plus the two
    // links to the zero exterior on every line.
    const bool has_A = fields.has_vector_potential();
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        const std::size_t n = grid.n[a];
        const std::size_t stride = grid.stride(a);
        const std::size_t lines = size / n;
        const double h = grid.step[a];
        std::vector<double> per_line(lines, 0.0);
#pragma omp parallel for schedule(static)
        for (std::size_t line = 0; line < lines; ++line) {
            std::vector<double> theta;
            const std::size_t base = line_base(grid, a, line);
            if (has_A) link_phases(grid, psi.dim, consts, fields, psi.time, a, base, theta);
            const cplx* d = psi.amplitude.data() + base;
            double sum = std::norm(d[0]) + std::norm(d[(n - 1) * stride]);
            for (std::size_t j = 0; j + 1 < n; ++j) {
                const cplx next = has_A ? std::exp(cplx(0.0, -theta[j])) * d[(j + 1) * stride] : d[(j + 1) * stride];
                sum += std::norm(next - d[j * stride]);
            }
            per_line[line] = sum;
        }
        double acc = 0.0;
        for (double v : per_line) acc += v;
        kinetic += acc * consts.hbar * consts.hbar / (2.0 * consts.mass * h * h);
    }
    return kinetic * grid.cell_volume() + potential;
}

std::vector<double> position_mean(const WaveFunction& psi) {
    const GridSpec& grid = psi.grid;
    std::vector<double> m(grid.axes(), 0.0);
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        double s = 0.0;
        for (std::size_t i = 0; i < psi.amplitude.size(); ++i)
            s += grid.coordinate_of(i, a) * std::norm(psi.amplitude[i]);
        m[a] = s * grid.cell_volume();
    }
    return m;
}

std::vector<double> momentum_mean(const WaveFunction& psi, double hbar) {
    const GridSpec& grid = psi.grid;
    std::vector<double> m(grid.axes(), 0.0);
    for (std::size_t a = 0; a < grid.axes(); ++a) {
        std::vector<int> pw(grid.axes(), 0);
        pw[a] = 1;
        const ComplexField phi = apply_momentum_powers(grid, psi.amplitude, pw, hbar);
        m[a] = inner_product(grid, psi.amplitude, phi).real();
    }
    return m;
}

CommutatorResult commutator_check(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields) {
    check_fields(psi, fields);
    const GridSpec& grid = psi.grid;
    const std::size_t axes = grid.axes();
    const std::size_t size = psi.amplitude.size();
    const auto s = sample_grid_fields(grid, psi.particles, psi.dim, consts, fields, psi.time, true);
    const ComplexField mpsi = apply_hamiltonian(psi, consts, fields);

    std::vector<ComplexField> grad(axes);
    for (std::size_t l = 0; l < axes; ++l) grad[l] = derivative(grid, psi.amplitude, l, 1, DerivativeMode::Spectral);

    CommutatorResult r;
    const cplx I(0.0, 1.0);
    for (std::size_t j = 0; j < axes; ++j) {
        std::vector<int> pw(axes, 0);
        pw[j] = 1;
        const ComplexField ppsi = apply_momentum_powers(grid, psi.amplitude, pw, consts.hbar);
        // M and pi_j are Hermitian, so <[M, pi_j]> = <M psi|pi_j psi> - <pi_j psi|M psi>.
        const cplx lhs = inner_product(grid, mpsi, ppsi) - inner_product(grid, ppsi, mpsi);

        double du = 0.0;
        for (std::size_t i = 0; i < size; ++i) du += s.grad_U[j][i] * std::norm(psi.amplitude[i]);
        cplx rhs = I * consts.hbar * du * grid.cell_volume();
        if (s.has_A) {
            cplx acc = 0.0;
            for (std::size_t l = 0; l < axes; ++l)
                for (std::size_t i = 0; i < size; ++i) {
                    const cplx u = psi.amplitude[i];
                    acc += s.grad_coupled_A[l][j][i] * (std::conj(u) * grad[l][i] - u * std::conj(grad[l][i]));
                }
            rhs -= consts.hbar * consts.hbar / (2.0 * consts.mass) * acc * grid.cell_volume();
        }
        r.lhs.push_back(lhs);
        r.rhs.push_back(rhs);
        r.residual.push_back(lhs - rhs);
    }
    return r;
}

PsiRun evolve_psi_steps(WaveFunction psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                        std::size_t steps, std::size_t record_every, PsiScheme scheme,
                        const QsolverOptions& options) {
    if (record_every == 0) throw UsageError("record_every must be >= 1");
    const EnergyMode emode = scheme == PsiScheme::Spectral ? EnergyMode::Spectral : EnergyMode::Stencil;
    PsiRun run;
    auto record = [&] {
        run.records.push_back(PsiRecord{psi.time, psi.norm(), hamiltonian_expectation(psi, consts, fields, emode),
                                        position_mean(psi), momentum_mean(psi, consts.hbar)});
    };
    record();
    for (std::size_t s = 1; s <= steps; ++s) {
        try {
            evolve_psi_inplace(psi, consts, fields, dt, scheme, options);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (step " + std::to_string(s) + ")");
        }
        if (s % record_every == 0 || s == steps) record();
    }
    run.psi = std::move(psi);
    return run;
}

void write_psi_records_csv(const std::string& path, const std::vector<PsiRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    using io::format_double;
    const std::size_t axes = records.empty() ? 0 : records.front().mean_x.size();
    out << "t,norm,energy";
    for (std::size_t a = 0; a < axes; ++a) out << ",mean_x" << a;
    for (std::size_t a = 0; a < axes; ++a) out << ",mean_p" << a;
    out << '\n';
    for (const auto& r : records) {
        out << format_double(r.time) << ',' << format_double(r.norm) << ',' << format_double(r.energy);
        for (double v : r.mean_x) out << ',' << format_double(v);
        for (double v : r.mean_p) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace stochlab
