#include "stochlab/sde.hpp"

#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace stochlab {

namespace {

constexpr std::size_t kReduceBlock = 1024;

Vec3 load(const std::vector<double>& v, std::size_t offset, int dim) {
    Vec3 r{};
    for (int a = 0; a < dim; ++a) r[static_cast<std::size_t>(a)] = v[offset + static_cast<std::size_t>(a)];
    return r;
}

// Force on every particle of trajectory m from external fields and pairs.
void trajectory_forces(const TrajectoryEnsemble& ens, const double* x, const double* p, double t,
                       std::vector<Vec3>& velocity, std::vector<Vec3>& force) {
    const auto d = static_cast<std::size_t>(ens.dim);
    const auto n = static_cast<std::size_t>(ens.particles);
    for (std::size_t a = 0; a < n; ++a) {
        Vec3 xa{}, pa{};
        for (std::size_t k = 0; k < d; ++k) {
            xa[k] = x[a * d + k];
            pa[k] = p[a * d + k];
        }
        const PhaseFlow flow = eval_phase_flow(ens.consts, ens.fields, xa, pa, t);
        velocity[a] = flow.velocity;
        force[a] = flow.force;
    }
    if (ens.pair.kind == PairInteraction::Kind::None) return;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            Vec3 r{};
            for (std::size_t k = 0; k < d; ++k) r[k] = x[a * d + k] - x[b * d + k];
            const Vec3 g = ens.pair.gradient(r);
            for (std::size_t k = 0; k < d; ++k) {
                force[a][k] -= g[k];
                force[b][k] += g[k];
            }
        }
}

bool all_finite(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

}  // namespace

double PairInteraction::value(const Vec3& r) const {
    const double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    switch (kind) {
        case Kind::Harmonic: return 0.5 * strength * r2;
        case Kind::SoftCoulomb: return strength / std::sqrt(r2 + softening * softening);
        case Kind::None: break;
    }
    return 0.0;
}

Vec3 PairInteraction::gradient(const Vec3& r) const {
    Vec3 g{};
    switch (kind) {
        case Kind::Harmonic:
            for (std::size_t k = 0; k < 3; ++k) g[k] = strength * r[k];
            break;
        case Kind::SoftCoulomb: {
            const double s2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + softening * softening;
            const double f = -strength / (s2 * std::sqrt(s2));
            for (std::size_t k = 0; k < 3; ++k) g[k] = f * r[k];
            break;
        }
        case Kind::None: break;
    }
    return g;
}

double TrajectoryEnsemble::energy(std::size_t m) const {
    const auto d = static_cast<std::size_t>(dim);
    const auto n = static_cast<std::size_t>(particles);
    const std::size_t off = m * coords();
    double h = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        h += eval_hamiltonian(consts, fields, load(positions, off + a * d, dim), load(momenta, off + a * d, dim), time);
    if (pair.kind != PairInteraction::Kind::None)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                Vec3 r{};
                for (std::size_t k = 0; k < d; ++k) r[k] = positions[off + a * d + k] - positions[off + b * d + k];
                h += pair.value(r);
            }
    return h;
}

TrajectoryEnsemble make_ensemble(const PhysicalConstants& consts, const FieldSpec& fields, std::size_t trajectories,
                                 const GaussianCloud& cloud, std::uint64_t seed, int particles, PairInteraction pair) {
    consts.validate();
    if (trajectories == 0) throw ValidationError("trajectories", "ensemble needs at least one trajectory");
    if (particles < 1) throw ValidationError("particles", "must be >= 1");
    TrajectoryEnsemble ens;
    ens.dim = fields.dim();
    ens.particles = particles;
    ens.seed = seed;
    ens.consts = consts;
    ens.fields = fields;
    ens.pair = pair;
    const std::size_t nc = ens.coords();
    ens.positions.assign(trajectories * nc, 0.0);
    ens.momenta.assign(trajectories * nc, 0.0);
    ens.streams.reserve(trajectories);
    for (std::size_t m = 0; m < trajectories; ++m) ens.streams.emplace_back(seed, m);

    const auto d = static_cast<std::size_t>(ens.dim);
    for (std::size_t m = 0; m < trajectories; ++m) {
        // Initial draws come from the trajectory's own stream so the state is
        // independent of traversal order.
        auto& s = ens.streams[m];
        for (std::size_t a = 0; a < static_cast<std::size_t>(particles); ++a) {
            const Vec3 shift = a < cloud.particle_offsets.size() ? cloud.particle_offsets[a] : Vec3{};
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t idx = m * nc + a * d + k;
                ens.positions[idx] = cloud.x0[k] + shift[k] + (cloud.sigma_x[k] > 0 ? cloud.sigma_x[k] * s() : 0.0);
                ens.momenta[idx] = cloud.p0[k] + (cloud.sigma_p[k] > 0 ? cloud.sigma_p[k] * s() : 0.0);
            }
        }
    }
    return ens;
}

void step_ensemble_inplace(TrajectoryEnsemble& ens, double dt, SdeScheme scheme) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("dt must be positive and finite");
    if (scheme == SdeScheme::SymplecticSplit && ens.fields.has_vector_potential())
        throw UsageError("symplectic split scheme requires a vanishing vector potential");

    const std::size_t m_total = ens.size();
    const std::size_t nc = ens.coords();
    const auto d = static_cast<std::size_t>(ens.dim);
    const auto n = static_cast<std::size_t>(ens.particles);
    const double noise = std::sqrt(2.0 * ens.consts.mass * ens.consts.vacuum_power * dt);
    const bool noisy = noise > 0.0;
    const double mass = ens.consts.mass;
    const double t0 = ens.time;
    long bad = -1;

#pragma omp parallel
    {
        std::vector<Vec3> vel(n), force(n);
#pragma omp for schedule(static)
        for (std::size_t m = 0; m < m_total; ++m) {
            double* x = ens.positions.data() + m * nc;
            double* p = ens.momenta.data() + m * nc;
            auto& stream = ens.streams[m];
            if (scheme == SdeScheme::EulerMaruyama) {
                trajectory_forces(ens, x, p, t0, vel, force);
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t k = 0; k < d; ++k) {
                        x[a * d + k] += vel[a][k] * dt;
                        p[a * d + k] += force[a][k] * dt + (noisy ? noise * stream() : 0.0);
                    }
            } else {
                trajectory_forces(ens, x, p, t0, vel, force);
                for (std::size_t i = 0; i < nc; ++i) p[i] += 0.5 * dt * force[i / d][i % d];
                for (std::size_t i = 0; i < nc; ++i) x[i] += dt * p[i] / mass;
                trajectory_forces(ens, x, p, t0 + dt, vel, force);
                for (std::size_t i = 0; i < nc; ++i)
                    p[i] += 0.5 * dt * force[i / d][i % d] + (noisy ? noise * stream() : 0.0);
            }
            if (!all_finite(x, nc) || !all_finite(p, nc)) {
#pragma omp critical
                if (bad < 0 || static_cast<long>(m) < bad) bad = static_cast<long>(m);
            }
        }
    }
    ens.time = t0 + dt;
    if (bad >= 0)
        throw NumericalError("trajectory " + std::to_string(bad) + " became non-finite at t=" + std::to_string(ens.time));
}

TrajectoryEnsemble step_ensemble(TrajectoryEnsemble ens, double dt, SdeScheme scheme) {
    step_ensemble_inplace(ens, dt, scheme);
    return ens;
}

MomentRecord measure_moments(const TrajectoryEnsemble& ens) {
    const std::size_t m_total = ens.size();
    if (m_total == 0) throw UsageError("empty ensemble");
    const std::size_t nc = ens.coords();
    const auto d = static_cast<std::size_t>(ens.dim);
    const auto n = static_cast<std::size_t>(ens.particles);
    const double ec = ens.consts.coupling();

    // Shifted sums, with the shift taken from trajectory 0, reduced block by block in index order.
    struct Sums {
        std::vector<double> x, v, p, f, xx, vv, xp;
        double h = 0.0, hh = 0.0;
        explicit Sums(std::size_t nc)
            : x(nc), v(nc), p(nc), f(nc), xx(nc), vv(nc), xp(nc * nc) {}
    };
    auto sample = [&](std::size_t m, std::vector<double>& xv, std::vector<double>& vv, std::vector<double>& pv,
                      std::vector<double>& fv, double& h, std::vector<Vec3>& vel, std::vector<Vec3>& force) {
        const double* x = ens.positions.data() + m * nc;
        const double* p = ens.momenta.data() + m * nc;
        trajectory_forces(ens, x, p, ens.time, vel, force);
        for (std::size_t a = 0; a < n; ++a) {
            Vec3 xa{};
            for (std::size_t k = 0; k < d; ++k) xa[k] = x[a * d + k];
            const ForceBundle fb = ens.fields.derivatives(xa, ens.time, ens.consts);
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t i = a * d + k;
                xv[i] = x[i];
                pv[i] = p[i];
                vv[i] = vel[a][k];
                // Total derivative of (e/c)A along the path: explicit plus convective part.
                double convective = 0.0;
                for (std::size_t l = 0; l < d; ++l) convective += vel[a][l] * fb.grad_A[k][l];
                fv[i] = force[a][k] - ec * (fb.dA_dt[k] + convective);
            }
        }
        h = ens.energy(m);
    };

    std::vector<double> sx(nc), sv(nc), sp(nc), sf(nc);
    double sh = 0.0;
    {
        std::vector<Vec3> vel(n), force(n);
        sample(0, sx, sv, sp, sf, sh, vel, force);
    }

    const std::size_t blocks = (m_total + kReduceBlock - 1) / kReduceBlock;
    std::vector<Sums> partial(blocks, Sums(nc));
#pragma omp parallel
    {
        std::vector<double> xv(nc), vv(nc), pv(nc), fv(nc);
        std::vector<Vec3> vel(n), force(n);
#pragma omp for schedule(static)
        for (std::size_t b = 0; b < blocks; ++b) {
            Sums& s = partial[b];
            const std::size_t end = std::min(m_total, (b + 1) * kReduceBlock);
            for (std::size_t m = b * kReduceBlock; m < end; ++m) {
                double h = 0.0;
                sample(m, xv, vv, pv, fv, h, vel, force);
                for (std::size_t i = 0; i < nc; ++i) {
                    const double dx = xv[i] - sx[i], dv = vv[i] - sv[i], dp = pv[i] - sp[i];
                    s.x[i] += dx;
                    s.v[i] += dv;
                    s.p[i] += dp;
                    s.f[i] += fv[i];
                    s.xx[i] += dx * dx;
                    s.vv[i] += dv * dv;
                    for (std::size_t j = 0; j < nc; ++j) s.xp[i * nc + j] += dx * (pv[j] - sp[j]);
                }
                s.h += h - sh;
                s.hh += (h - sh) * (h - sh);
            }
        }
    }
    Sums tot(nc);
    for (const auto& s : partial) {
        for (std::size_t i = 0; i < nc; ++i) {
            tot.x[i] += s.x[i];
            tot.v[i] += s.v[i];
            tot.p[i] += s.p[i];
            tot.f[i] += s.f[i];
            tot.xx[i] += s.xx[i];
            tot.vv[i] += s.vv[i];
        }
        for (std::size_t k = 0; k < nc * nc; ++k) tot.xp[k] += s.xp[k];
        tot.h += s.h;
        tot.hh += s.hh;
    }

    const double mm = static_cast<double>(m_total);
    const double denom = m_total > 1 ? mm - 1.0 : 1.0;
    MomentRecord r;
    r.time = ens.time;
    r.count = m_total;
    r.mean_x.resize(nc);
    r.mean_v.resize(nc);
    r.var_x.resize(nc);
    r.var_v.resize(nc);
    r.mean_force.resize(nc);
    r.cov_xp.resize(nc * nc);
    for (std::size_t i = 0; i < nc; ++i) {
        const double mx = tot.x[i] / mm, mv = tot.v[i] / mm;
        r.mean_x[i] = sx[i] + mx;
        r.mean_v[i] = sv[i] + mv;
        r.var_x[i] = (tot.xx[i] - mm * mx * mx) / denom;
        r.var_v[i] = (tot.vv[i] - mm * mv * mv) / denom;
        r.mean_force[i] = tot.f[i] / mm;
    }
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
            const double mx = tot.x[i] / mm, mp = tot.p[j] / mm;
            r.cov_xp[i * nc + j] = (tot.xp[i * nc + j] - mm * mx * mp) / denom;
        }
    const double mh = tot.h / mm;
    r.mean_H = sh + mh;
    r.var_H = (tot.hh - mm * mh * mh) / denom;
    return r;
}

double sde_stability_bound(const FieldSpec& fields) {
    const double w = fields.max_frequency();
    return w > 0.0 ? 0.05 / w : std::numeric_limits<double>::infinity();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.consts.validate();
    if (config.record_every == 0) throw ValidationError("record_every", "must be >= 1");
    if (!(config.dt > 0.0)) throw ValidationError("dt", "must be > 0");
    double omega = config.fields.max_frequency();
    if (config.pair.kind == PairInteraction::Kind::Harmonic && config.particles > 1)
        omega = std::max(omega, std::sqrt(std::max(0.0, config.fields.max_frequency() * config.fields.max_frequency() +
                                                        2.0 * config.pair.strength / config.consts.mass)));
    if (!config.allow_unstable_dt && omega > 0.0 && config.dt > 0.05 / omega * (1.0 + 1e-12))
        throw StabilityError("dt=" + std::to_string(config.dt) + " exceeds the stability bound 0.05/omega_max=" +
                             std::to_string(0.05 / omega));

    ExperimentResult result;
    result.final_state = make_ensemble(config.consts, config.fields, config.trajectories, config.initial, config.seed,
                                       config.particles, config.pair);
    TrajectoryEnsemble& ens = result.final_state;
    const std::size_t m_total = ens.size();

    std::vector<std::size_t> record_steps;
    for (std::size_t s = 0; s <= config.steps; s += config.record_every) record_steps.push_back(s);
    if (record_steps.back() != config.steps) record_steps.push_back(config.steps);

    // OLS weights for the per-trajectory energy slope.
    const auto k_total = record_steps.size();
    std::vector<double> times(k_total);
    for (std::size_t k = 0; k < k_total; ++k) times[k] = static_cast<double>(record_steps[k]) * config.dt;
    double tbar = 0.0;
    for (double t : times) tbar += t;
    tbar /= static_cast<double>(k_total);
    double stt = 0.0;
    for (double t : times) stt += (t - tbar) * (t - tbar);
    std::vector<double> slope_acc(m_total, 0.0);

    auto record = [&](std::size_t k) {
        result.records.push_back(measure_moments(ens));
        if (stt > 0.0) {
            const double w = (times[k] - tbar) / stt;
#pragma omp parallel for schedule(static)
            for (std::size_t m = 0; m < m_total; ++m) slope_acc[m] += w * ens.energy(m);
        }
    };

    std::size_t next = 0;
    for (std::size_t s = 0; s <= config.steps; ++s) {
        if (next < k_total && record_steps[next] == s) record(next++);
        if (s == config.steps) break;
        try {
            step_ensemble_inplace(ens, config.dt, config.scheme);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (step " + std::to_string(s + 1) + ")");
        }
    }

    if (stt > 0.0) {
        double mean = 0.0;
        for (double v : slope_acc) mean += v;
        mean /= static_cast<double>(m_total);
        double var = 0.0;
        for (double v : slope_acc) var += (v - mean) * (v - mean);
        var /= m_total > 1 ? static_cast<double>(m_total - 1) : 1.0;
        result.energy_rate.slope = mean;
        result.energy_rate.stderr_slope = std::sqrt(var / static_cast<double>(m_total));
    }
    return result;
}

std::vector<EhrenfestPoint> ehrenfest_residual(const std::vector<MomentRecord>& series, const FieldSpec& /*fields*/,
                                               const PhysicalConstants& consts) {
    if (series.size() < 3) throw UsageError("ehrenfest residual needs at least 3 records");
    std::vector<EhrenfestPoint> out;
    for (std::size_t k = 1; k + 1 < series.size(); ++k) {
        const auto& prev = series[k - 1];
        const auto& next = series[k + 1];
        const double span = next.time - prev.time;
        if (!(span > 0.0)) throw UsageError("record times must increase");
        EhrenfestPoint pt;
        pt.time = series[k].time;
        pt.residual.resize(series[k].mean_v.size());
        for (std::size_t i = 0; i < pt.residual.size(); ++i)
            pt.residual[i] = consts.mass * (next.mean_v[i] - prev.mean_v[i]) / span - series[k].mean_force[i];
        out.push_back(std::move(pt));
    }
    return out;
}

HistogramResult histogram_phase_space(const TrajectoryEnsemble& ens, const Axis& x_axis, const Axis& p_axis,
                                      std::size_t coord) {
    if (ens.size() == 0) throw UsageError("cannot histogram an empty ensemble");
    const std::size_t nc = ens.coords();
    if (coord >= nc) throw UsageError("histogram coordinate out of range");
    HistogramResult res;
    res.grid = PhaseSpaceGrid(x_axis, p_axis, ens.time);
    std::vector<std::size_t> counts(x_axis.n * p_axis.n, 0);
    std::size_t clipped = 0;
    for (std::size_t m = 0; m < ens.size(); ++m) {
        const long i = x_axis.locate(ens.positions[m * nc + coord]);
        const long j = p_axis.locate(ens.momenta[m * nc + coord]);
        if (i < 0 || j < 0) {
            ++clipped;
            continue;
        }
        ++counts[static_cast<std::size_t>(i) * p_axis.n + static_cast<std::size_t>(j)];
    }
    const double norm = 1.0 / (static_cast<double>(ens.size()) * res.grid.cell_area());
    for (std::size_t c = 0; c < counts.size(); ++c) res.grid.density[c] = static_cast<double>(counts[c]) * norm;
    res.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(ens.size());
    return res;
}

void write_ensemble_snapshot(const std::string& path, const TrajectoryEnsemble& ens) {
    io::BinaryWriter w(path);
    w.u64(ens.size());
    w.u64(ens.coords());
    w.f64(ens.time);
    w.u64(ens.seed);
    w.f64s(ens.positions);
    w.f64s(ens.momenta);
    w.close();
}

EnsembleSnapshot read_ensemble_snapshot(const std::string& path) {
    io::BinaryReader r(path);
    EnsembleSnapshot s;
    s.trajectories = r.u64();
    s.coords = r.u64();
    s.time = r.f64();
    s.seed = r.u64();
    s.positions = r.f64s(s.trajectories * s.coords);
    s.momenta = r.f64s(s.trajectories * s.coords);
    return s;
}

void write_moments_csv(const std::string& path, const std::vector<MomentRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    if (records.empty()) return;
    const std::size_t nc = records.front().mean_x.size();
    out << "t";
    for (std::size_t i = 0; i < nc; ++i) out << ",mean_x" << i;
    for (std::size_t i = 0; i < nc; ++i) out << ",mean_v" << i;
    out << ",mean_H";
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) out << ",cov_x" << i << "_p" << j;
    for (std::size_t i = 0; i < nc; ++i) out << ",var_x" << i;
    for (std::size_t i = 0; i < nc; ++i) out << ",var_v" << i;
    out << ",var_H";
    for (std::size_t i = 0; i < nc; ++i) out << ",mean_force" << i;
    out << ",count\n";
    using io::format_double;
    for (const auto& r : records) {
        out << format_double(r.time);
        for (double v : r.mean_x) out << ',' << format_double(v);
        for (double v : r.mean_v) out << ',' << format_double(v);
        out << ',' << format_double(r.mean_H);
        for (double v : r.cov_xp) out << ',' << format_double(v);
        for (double v : r.var_x) out << ',' << format_double(v);
        for (double v : r.var_v) out << ',' << format_double(v);
        out << ',' << format_double(r.var_H);
        for (double v : r.mean_force) out << ',' << format_double(v);
        out << ',' << r.count << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace stochlab
