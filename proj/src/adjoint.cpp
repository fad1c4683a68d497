#include "stochlab/adjoint.hpp"

#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/qsolver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace stochlab {

namespace {

const cplx I(0.0, 1.0);

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// (-i/hbar)^|n| / n!
cplx moment_scale(const MultiIndex& m, double hbar) {
    const int deg = total_degree(m);
    return std::pow(cplx(0.0, -1.0 / hbar), deg) / (factorial(m[0]) * factorial(m[1]) * factorial(m[2]));
}

std::string index_text(const MultiIndex& m) {
    return "(" + std::to_string(m[0]) + "," + std::to_string(m[1]) + "," + std::to_string(m[2]) + ")";
}

MultiIndex shifted(MultiIndex m, std::size_t axis, int by) {
    m[axis] += by;
    return m;
}

double l2_norm(const GridSpec& grid, const ComplexField& f) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

}  // namespace

const ComplexField& CoefficientTable::at(const MultiIndex& m) const {
    auto it = coeffs.find(m);
    if (it == coeffs.end()) throw UsageError("coefficient " + index_text(m) + " is not in the table");
    return it->second;
}

std::vector<MultiIndex> indices_up_to(int order, std::size_t axes) {
    if (axes < 1 || axes > 3) throw UsageError("coefficient tables support one to three axes");
    std::vector<MultiIndex> out;
    const int lim1 = axes > 1 ? order : 0;
    const int lim2 = axes > 2 ? order : 0;
    for (int l = 0; l <= order; ++l)
        for (int m = 0; m <= lim1; ++m)
            for (int n = 0; n <= lim2; ++n)
                if (l + m + n <= order) out.push_back({l, m, n});
    return out;
}

AdjointField adjoint_transform(const PhaseSpaceGrid& grid, const PhysicalConstants& consts,
                               const std::vector<double>& y) {
    if (y.empty()) throw UsageError("adjoint_transform needs at least one y sample");
    const double hbar = consts.hbar;
    const std::size_t nx = grid.x_axis.n, np = grid.p_axis.n;

    double peak = 0.0;
    for (double v : grid.density) peak = std::max(peak, std::abs(v));
    double pmax = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < np; ++j)
            if (std::abs(grid.at(i, j)) > 1e-12 * peak) pmax = std::max(pmax, std::abs(grid.p_axis.center(j)));

    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    if (ymax >= M_PI * hbar / grid.p_axis.step)
        throw DomainError("adjoint_transform: |y| reaches the period 2 pi hbar / dp of the discrete transform");
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        const double dy = sorted[k] - sorted[k - 1];
        if (pmax * dy / hbar > M_PI)
            throw DomainError("adjoint_transform: momentum support " + io::format_double(pmax) +
                              " exceeds the Nyquist bound pi hbar / dy = " + io::format_double(M_PI * hbar / dy));
    }

    AdjointField out{grid.x_axis, y, ComplexField(nx * y.size())};
    for (std::size_t k = 0; k < y.size(); ++k) {
        std::vector<cplx> kernel(np);
        for (std::size_t j = 0; j < np; ++j) kernel[j] = std::exp(cplx(0.0, -grid.p_axis.center(j) * y[k] / hbar));
        for (std::size_t i = 0; i < nx; ++i) {
            cplx s = 0.0;
            for (std::size_t j = 0; j < np; ++j) s += grid.at(i, j) * kernel[j];
            out.values[i * y.size() + k] = s * grid.p_axis.step;
        }
    }
    return out;
}

CoefficientTable taylor_coeffs(const PhaseSpaceGrid& grid, const PhysicalConstants& consts, int order) {
    if (order < 0) throw UsageError("order must be >= 0");
    CoefficientTable t;
    t.grid.n = {grid.x_axis.n};
    t.grid.lo = {grid.x_axis.center(0)};
    t.grid.step = {grid.x_axis.step};
    t.order = order;
    t.time = grid.time;
    for (int l = 0; l <= order; ++l) {
        const MultiIndex m{l, 0, 0};
        const cplx scale = moment_scale(m, consts.hbar);
        ComplexField f(grid.x_axis.n);
        for (std::size_t i = 0; i < grid.x_axis.n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < grid.p_axis.n; ++j) s += std::pow(grid.p_axis.center(j), l) * grid.at(i, j);
            f[i] = scale * s * grid.p_axis.step;
        }
        t.coeffs.emplace(m, std::move(f));
    }
    return t;
}

CoefficientTable taylor_coeffs(const TrajectoryEnsemble& ens, const GridSpec& grid, const PhysicalConstants& consts,
                               const EnsembleCoeffOptions& options) {
    grid.validate();
    if (ens.size() == 0) throw UsageError("empty ensemble");
    const std::size_t axes = grid.axes();
    if (static_cast<std::size_t>(ens.dim) != axes) throw UsageError("grid axes must equal the ensemble dimension");
    const auto indices = indices_up_to(options.order, axes);
    const std::size_t m = ens.size();
    const std::size_t stride = ens.coords();

    // Noise floor of each global moment.
    for (const auto& idx : indices) {
        if (total_degree(idx) == 0) continue;
        double sum = 0.0, sum2 = 0.0, sum_abs = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            double v = 1.0;
            for (std::size_t a = 0; a < axes; ++a) v *= std::pow(ens.momenta[t * stride + a], idx[a]);
            sum += v;
            sum2 += v * v;
            sum_abs += std::abs(v);
        }
        const double mean = sum / static_cast<double>(m);
        const double var = std::max(0.0, sum2 / static_cast<double>(m) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(m));
        const double ref = sum_abs / static_cast<double>(m);
        if (ref > 0.0 && se / ref > options.max_relative_noise)
            throw NumericalError("coefficient " + index_text(idx) + " is below the statistical noise floor (relative error " +
                                 io::format_double(se / ref) + ")");
    }

    CoefficientTable table;
    table.grid = grid;
    table.order = options.order;
    table.time = ens.time;
    for (const auto& idx : indices) table.coeffs.emplace(idx, ComplexField(grid.size(), cplx(0.0)));
    const double inv = 1.0 / (static_cast<double>(m) * grid.cell_volume());
    for (std::size_t t = 0; t < m; ++t) {
        std::size_t flat = 0;
        bool inside = true;
        for (std::size_t a = 0; a < axes; ++a) {
            const double u = std::floor((ens.positions[t * stride + a] - grid.lo[a]) / grid.step[a] + 0.5);
            if (!(u >= 0.0) || u >= static_cast<double>(grid.n[a])) {
                inside = false;
                break;
            }
            flat += static_cast<std::size_t>(u) * grid.stride(a);
        }
        if (!inside) continue;
        for (auto& [idx, field] : table.coeffs) {
            double v = 1.0;
            for (std::size_t a = 0; a < axes; ++a) v *= std::pow(ens.momenta[t * stride + a], idx[a]);
            field[flat] += v * inv;
        }
    }
    for (auto& [idx, field] : table.coeffs) {
        const cplx scale = moment_scale(idx, consts.hbar);
        for (auto& v : field) v *= scale;
    }
    return table;
}

CoefficientTable taylor_coeffs(const GaussianPhaseDensity& density, const GridSpec& grid,
                               const PhysicalConstants& consts, int order) {
    grid.validate();
    const std::size_t axes = grid.axes();
    auto check = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != axes) throw UsageError(std::string(name) + " needs one value per axis");
    };
    check(density.x0, "x0");
    check(density.sigma_x, "sigma_x");
    check(density.p0, "p0");
    check(density.sigma_p, "sigma_p");

    // Raw Gaussian moments E[p^k] per axis.
    std::vector<std::vector<double>> mom(axes, std::vector<double>(order + 1, 0.0));
    for (std::size_t a = 0; a < axes; ++a) {
        const double mu = density.p0[a], s2 = density.sigma_p[a] * density.sigma_p[a];
        mom[a][0] = 1.0;
        if (order >= 1) mom[a][1] = mu;
        for (int k = 2; k <= order; ++k) mom[a][k] = mu * mom[a][k - 1] + (k - 1) * s2 * mom[a][k - 2];
    }
    RealField rho(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = 1.0;
        for (std::size_t a = 0; a < axes; ++a) {
            const double u = (grid.coordinate_of(i, a) - density.x0[a]) / density.sigma_x[a];
            v *= std::exp(-0.5 * u * u) / (std::sqrt(2.0 * M_PI) * density.sigma_x[a]);
        }
        rho[i] = v;
    }
    CoefficientTable table;
    table.grid = grid;
    table.order = order;
    for (const auto& idx : indices_up_to(order, axes)) {
        cplx scale = moment_scale(idx, consts.hbar);
        for (std::size_t a = 0; a < axes; ++a) scale *= mom[a][idx[a]];
        ComplexField f(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) f[i] = scale * rho[i];
        table.coeffs.emplace(idx, std::move(f));
    }
    return table;
}

CoefficientTable recursion_rhs(const CoefficientTable& table, const PhysicalConstants& consts, const FieldSpec& fields,
                               double t, DerivativeMode mode) {
    const GridSpec& grid = table.grid;
    const std::size_t axes = grid.axes();
    const std::size_t size = grid.size();
    const double hbar = consts.hbar, mu = consts.mass;
    const auto s = sample_grid_fields(grid, 1, static_cast<int>(axes), consts, fields, t, true);

    auto need = [&](const MultiIndex& m, const MultiIndex& target) -> const ComplexField& {
        if (!table.has(m))
            throw UsageError("recursion for " + index_text(target) + " needs missing coefficient " + index_text(m));
        return table.at(m);
    };

    CoefficientTable out;
    out.grid = grid;
    out.order = table.order - 1;
    out.time = t;
    for (const auto& n : indices_up_to(table.order - 1, axes)) {
        ComplexField rate(size, cplx(0.0));
        const ComplexField& phi_n = need(n, n);
        for (std::size_t a = 0; a < axes; ++a) {
            // (hbar / i mu) (n_a + 1) d_a phi_{n+e_a}
            const ComplexField d = derivative(grid, need(shifted(n, a, 1), n), a, 1, mode);
            const cplx c1 = hbar / (I * mu) * static_cast<double>(n[a] + 1);
            for (std::size_t i = 0; i < size; ++i) rate[i] += c1 * d[i];
            // -(1 / i hbar) dU/dx_a phi_{n-e_a}
            if (n[a] >= 1) {
                const ComplexField& lower = need(shifted(n, a, -1), n);
                const cplx c2 = -1.0 / (I * hbar);
                for (std::size_t i = 0; i < size; ++i) rate[i] += c2 * s.grad_U[a][i] * lower[i];
            }
            // -(mu P / hbar^2) phi_{n-2e_a}
            if (n[a] >= 2 && consts.vacuum_power != 0.0) {
                const ComplexField& lower2 = need(shifted(n, a, -2), n);
                const double c6 = -mu * consts.vacuum_power / (hbar * hbar);
                for (std::size_t i = 0; i < size; ++i) rate[i] += c6 * lower2[i];
            }
        }
        if (s.has_A) {
            // With a = (e/c)A every e/(mu c) A block becomes (1/mu) a.
            for (std::size_t a = 0; a < axes; ++a) {
                if (n[a] > 0)
                    for (std::size_t i = 0; i < size; ++i)
                        rate[i] += static_cast<double>(n[a]) / mu * s.grad_coupled_A[a][a][i] * phi_n[i];
                for (std::size_t b = 0; b < axes; ++b) {
                    if (b == a || n[b] < 1) continue;
                    const ComplexField& other = need(shifted(shifted(n, a, 1), b, -1), n);
                    const double c4 = static_cast<double>(n[a] + 1) / mu;
                    for (std::size_t i = 0; i < size; ++i) rate[i] += c4 * s.grad_coupled_A[a][b][i] * other[i];
                }
                ComplexField flux(size);
                for (std::size_t i = 0; i < size; ++i) flux[i] = s.coupled_A[a][i] * phi_n[i];
                const ComplexField div = derivative(grid, flux, a, 1, mode);
                for (std::size_t i = 0; i < size; ++i) rate[i] += div[i] / mu;
            }
        }
        out.coeffs.emplace(n, std::move(rate));
    }
    return out;
}

std::vector<ComplexField> current_from_psi(const WaveFunction& psi, DerivativeMode mode) {
    const std::size_t axes = psi.grid.axes();
    const std::size_t size = psi.amplitude.size();
    std::vector<ComplexField> j(axes, ComplexField(size));
    for (std::size_t a = 0; a < axes; ++a) {
        const ComplexField d = derivative(psi.grid, psi.amplitude, a, 1, mode);
        for (std::size_t i = 0; i < size; ++i) {
            const cplx u = psi.amplitude[i];
            // psi d psi* - psi* d psi = -2 i Im(psi* d psi), written out so the
            // real part is exactly zero.
            j[a][i] = cplx(0.0, -(std::conj(u) * d[i]).imag());
        }
    }
    return j;
}

TensorField tensor_from_psi(const WaveFunction& psi, DerivativeMode mode) {
    const GridSpec& grid = psi.grid;
    const std::size_t axes = grid.axes();
    const std::size_t size = psi.amplitude.size();
    std::vector<ComplexField> grad(axes);
    for (std::size_t a = 0; a < axes; ++a) grad[a] = derivative(grid, psi.amplitude, a, 1, mode);
    TensorField t;
    t.axes = axes;
    t.components.assign(axes * axes, ComplexField());
    for (std::size_t a = 0; a < axes; ++a)
        for (std::size_t b = a; b < axes; ++b) {
            const ComplexField h = mixed_derivative(grid, psi.amplitude, a, b, mode);
            ComplexField c(size);
            for (std::size_t i = 0; i < size; ++i) {
                const cplx u = psi.amplitude[i];
                const cplx v = std::conj(u) * h[i] + u * std::conj(h[i]) - std::conj(grad[a][i]) * grad[b][i] -
                               grad[a][i] * std::conj(grad[b][i]);
                c[i] = 0.25 * v;
            }
            t.components[a * axes + b] = c;
            t.components[b * axes + a] = std::move(c);
        }
    return t;
}

ConsistencyReport consistency_check_P_independent(const WaveFunction& before, const WaveFunction& middle,
                                                  const WaveFunction& after, const PhysicalConstants& consts,
                                                  const FieldSpec& fields, DerivativeMode mode) {
    const double dt = middle.time - before.time;
    const double dt2 = after.time - middle.time;
    if (!(dt > 0.0) || std::abs(dt2 - dt) > 1e-9 * dt)
        throw UsageError("consistency check needs three equally spaced, increasing snapshot times");
    if (before.amplitude.size() != middle.amplitude.size() || after.amplitude.size() != middle.amplitude.size())
        throw UsageError("snapshots must share one grid");

    const GridSpec& grid = middle.grid;
    const std::size_t axes = grid.axes();
    const std::size_t size = middle.amplitude.size();
    const double hbar = consts.hbar, mu = consts.mass;
    const auto s = sample_grid_fields(grid, middle.particles, middle.dim, consts, fields, middle.time, true);

    auto density = [](const WaveFunction& w) {
        ComplexField r(w.amplitude.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::norm(w.amplitude[i]);
        return r;
    };
    const ComplexField rho = density(middle);
    const ComplexField rho0 = density(before), rho1 = density(after);
    const auto J = current_from_psi(middle, mode);
    const auto J0 = current_from_psi(before, mode), J1 = current_from_psi(after, mode);
    const TensorField T = tensor_from_psi(middle, mode);

    ConsistencyReport rep;
    rep.time = middle.time;

    ComplexField r0(size), drho(size);
    for (std::size_t i = 0; i < size; ++i) {
        drho[i] = (rho1[i] - rho0[i]) / (2.0 * dt);
        r0[i] = drho[i];
    }
    for (std::size_t a = 0; a < axes; ++a) {
        const ComplexField d = derivative(grid, J[a], a, 1, mode);
        for (std::size_t i = 0; i < size; ++i) r0[i] -= hbar / (I * mu) * d[i];
        if (s.has_A) {
            ComplexField flux(size);
            for (std::size_t i = 0; i < size; ++i) flux[i] = s.coupled_A[a][i] * rho[i];
            const ComplexField div = derivative(grid, flux, a, 1, mode);
            for (std::size_t i = 0; i < size; ++i) r0[i] -= div[i] / mu;
        }
    }
    rep.density_residual = l2_norm(grid, r0);
    rep.density_scale = l2_norm(grid, drho);

    double res2 = 0.0, scale2 = 0.0;
    for (std::size_t b = 0; b < axes; ++b) {
        ComplexField rb(size), djb(size);
        for (std::size_t i = 0; i < size; ++i) {
            djb[i] = (J1[b][i] - J0[b][i]) / (2.0 * dt);
            rb[i] = djb[i] + 1.0 / (I * hbar) * s.grad_U[b][i] * rho[i];
        }
        for (std::size_t a = 0; a < axes; ++a) {
            const ComplexField d = derivative(grid, T.at(a, b), a, 1, mode);
            for (std::size_t i = 0; i < size; ++i) rb[i] -= hbar / (I * mu) * d[i];
            if (s.has_A) {
                ComplexField flux(size);
                for (std::size_t i = 0; i < size; ++i) {
                    rb[i] -= s.grad_coupled_A[a][b][i] * J[a][i] / mu;
                    flux[i] = s.coupled_A[a][i] * J[b][i];
                }
                const ComplexField div = derivative(grid, flux, a, 1, mode);
                for (std::size_t i = 0; i < size; ++i) rb[i] -= div[i] / mu;
            }
        }
        const double rn = l2_norm(grid, rb), sn = l2_norm(grid, djb);
        res2 += rn * rn;
        scale2 += sn * sn;
    }
    rep.current_residual = std::sqrt(res2);
    rep.current_scale = std::sqrt(scale2);
    return rep;
}

void export_table(const std::string& directory, const CoefficientTable& table) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["order"] = table.order;
    manifest["time"] = table.time;
    manifest["grid"] = {{"n", table.grid.n}, {"lo", table.grid.lo}, {"step", table.grid.step}};
    manifest["coefficients"] = nlohmann::json::array();
    for (const auto& [idx, field] : table.coeffs) {
        const std::string name =
            "phi_" + std::to_string(idx[0]) + "_" + std::to_string(idx[1]) + "_" + std::to_string(idx[2]) + ".bin";
        io::BinaryWriter w((fs::path(directory) / name).string());
        w.complexes(field);
        w.close();
        manifest["coefficients"].push_back({{"index", {idx[0], idx[1], idx[2]}}, {"file", name}});
    }
    std::ofstream out(fs::path(directory) / "manifest.json", std::ios::trunc);
    if (!out) throw Error("cannot write manifest in '" + directory + "'");
    out << manifest.dump(2) << '\n';
}

}  // namespace stochlab
