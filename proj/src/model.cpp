#include "stochlab/model.hpp"

#include "stochlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stochlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

// 1D interpolation weights for a point at fractional lattice coordinate u.
// Returns the first stencil index and fills weights.
std::size_t stencil_weights(double u, std::size_t n, int order, std::array<double, 4>& w, int& count) {
    if (order == 3 && n >= 4) {
        auto base = static_cast<long>(std::floor(u)) - 1;
        base = std::clamp<long>(base, 0, static_cast<long>(n) - 4);
        const double s = u - static_cast<double>(base);
        // Lagrange cubic through nodes 0,1,2,3.
        w[0] = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        w[1] = s * (s - 2.0) * (s - 3.0) / 2.0;
        w[2] = -s * (s - 1.0) * (s - 3.0) / 2.0;
        w[3] = s * (s - 1.0) * (s - 2.0) / 6.0;
        count = 4;
        return static_cast<std::size_t>(base);
    }
    auto base = static_cast<long>(std::floor(u));
    base = std::clamp<long>(base, 0, static_cast<long>(n) - 2);
    const double s = u - static_cast<double>(base);
    w[0] = 1.0 - s;
    w[1] = s;
    count = 2;
    return static_cast<std::size_t>(base);
}

}  // namespace

void PhysicalConstants::validate() const {
    if (!finite_positive(hbar)) throw ValidationError("hbar", "must be finite and > 0");
    if (!finite_positive(mass)) throw ValidationError("mass", "must be finite and > 0");
    if (!std::isfinite(charge)) throw ValidationError("charge", "must be finite");
    if (!finite_positive(light_speed)) throw ValidationError("light_speed", "must be finite and > 0");
    if (!std::isfinite(vacuum_power) || vacuum_power < 0.0)
        throw ValidationError("vacuum_power", "must be finite and >= 0");
}

FieldSpec::FieldSpec(int dim, Preset preset) : dim_(dim), preset_(std::move(preset)) {
    if (dim_ < 1 || dim_ > 3) throw ValidationError("dim", "spatial dimension must be 1, 2 or 3");
    std::visit(overloaded{
                   [&](const preset::UniformMagnetic&) {
                       if (dim_ < 2) throw ValidationError("field", "uniform magnetic field needs dim >= 2");
                   },
                   [&](const preset::PlaneWaveA& pw) {
                       if (pw.polarization_axis < 0 || pw.polarization_axis >= dim_ || pw.propagation_axis < 0 ||
                           pw.propagation_axis >= dim_)
                           throw ValidationError("field", "plane-wave axes out of range");
                   },
                   [&](const preset::GridTable& g) {
                       const auto d = static_cast<std::size_t>(dim_);
                       if (g.shape.size() != d || g.origin.size() != d || g.spacing.size() != d)
                           throw ValidationError("field", "grid table metadata must have dim entries");
                       std::size_t total = 1;
                       for (std::size_t a = 0; a < d; ++a) {
                           if (g.shape[a] < 2) throw ValidationError("field", "grid table needs >= 2 points per axis");
                           if (!finite_positive(g.spacing[a])) throw ValidationError("field", "grid spacing must be > 0");
                           total *= g.shape[a];
                       }
                       if (g.potential.size() != total) throw ValidationError("field", "grid table size mismatch");
                       if (!g.vector_potential.empty()) {
                           if (g.vector_potential.size() != d)
                               throw ValidationError("field", "grid vector potential needs dim components");
                           for (const auto& comp : g.vector_potential)
                               if (comp.size() != total) throw ValidationError("field", "grid table size mismatch");
                       }
                       if (g.interpolation_order != 1 && g.interpolation_order != 3)
                           throw ValidationError("field", "interpolation order must be 1 or 3");
                   },
                   [](const auto&) {},
               },
               preset_);
}

FieldSpec FieldSpec::harmonic(int dim, double omega) {
    preset::Harmonic h;
    h.omega = {0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) h.omega[static_cast<std::size_t>(a)] = omega;
    return FieldSpec(dim, h);
}

FieldKind FieldSpec::kind() const { return static_cast<FieldKind>(preset_.index()); }

std::string FieldSpec::kind_name() const { return field_preset_names()[preset_.index()]; }

const std::vector<std::string>& field_preset_names() {
    static const std::vector<std::string> names{"free",           "harmonic",        "uniform_electric",
                                                "uniform_magnetic", "uniform_vector_potential", "plane_wave_a",
                                                "grid_table"};
    return names;
}

bool FieldSpec::has_vector_potential() const {
    const bool offset = offset_[0] != 0.0 || offset_[1] != 0.0 || offset_[2] != 0.0;
    return offset || std::visit(overloaded{
                                    [](const preset::UniformMagnetic&) { return true; },
                                    [](const preset::UniformVectorPotential& u) {
                                        return u.potential[0] != 0.0 || u.potential[1] != 0.0 ||
                                               u.potential[2] != 0.0;
                                    },
                                    [](const preset::PlaneWaveA&) { return true; },
                                    [](const preset::GridTable& g) { return !g.vector_potential.empty(); },
                                    [](const auto&) { return false; },
                                },
                                preset_);
}

bool FieldSpec::is_time_dependent() const { return std::holds_alternative<preset::PlaneWaveA>(preset_); }

FieldSpec FieldSpec::with_vector_offset(const Vec3& offset) const {
    FieldSpec copy = *this;
    for (std::size_t a = 0; a < 3; ++a) copy.offset_[a] += offset[a];
    return copy;
}

double FieldSpec::max_frequency() const {
    if (const auto* h = std::get_if<preset::Harmonic>(&preset_)) {
        double w = 0.0;
        for (int a = 0; a < dim_; ++a) w = std::max(w, std::abs(h->omega[static_cast<std::size_t>(a)]));
        return w;
    }
    return 0.0;
}

double FieldSpec::table_value(const std::vector<double>& values, const Vec3& x) const {
    const auto& g = std::get<preset::GridTable>(preset_);
    const auto d = static_cast<std::size_t>(dim_);
    std::array<std::array<double, 4>, 3> w{};
    std::array<std::size_t, 3> base{};
    std::array<int, 3> count{1, 1, 1};
    for (std::size_t a = 0; a < d; ++a) {
        const double u = (x[a] - g.origin[a]) / g.spacing[a];
        const double upper = static_cast<double>(g.shape[a] - 1);
        if (!(u >= -1e-12 && u <= upper + 1e-12))
            throw DomainError("grid table evaluated outside its domain on axis " + std::to_string(a));
        base[a] = stencil_weights(std::clamp(u, 0.0, upper), g.shape[a], g.interpolation_order, w[a], count[a]);
    }
    for (std::size_t a = d; a < 3; ++a) w[a][0] = 1.0;

    double sum = 0.0;
    for (int i = 0; i < count[0]; ++i)
        for (int j = 0; j < count[1]; ++j)
            for (int k = 0; k < count[2]; ++k) {
                std::size_t idx = base[0] + static_cast<std::size_t>(i);
                if (d > 1) idx = idx * g.shape[1] + base[1] + static_cast<std::size_t>(j);
                if (d > 2) idx = idx * g.shape[2] + base[2] + static_cast<std::size_t>(k);
                sum += w[0][static_cast<std::size_t>(i)] * w[1][static_cast<std::size_t>(j)] *
                       w[2][static_cast<std::size_t>(k)] * values[idx];
            }
    return sum;
}

Vec3 FieldSpec::table_gradient(const std::vector<double>& values, const Vec3& x) const {
    const auto& g = std::get<preset::GridTable>(preset_);
    Vec3 grad{};
    for (std::size_t a = 0; a < static_cast<std::size_t>(dim_); ++a) {
        const double h = g.spacing[a];
        const double lo = g.origin[a];
        const double hi = g.origin[a] + h * static_cast<double>(g.shape[a] - 1);
        if (x[a] - h < lo - 1e-12 * h || x[a] + h > hi + 1e-12 * h)
            throw DomainError("grid table derivative stencil leaves the domain on axis " + std::to_string(a));
        Vec3 xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        grad[a] = (table_value(values, xp) - table_value(values, xm)) / (2.0 * h);
    }
    return grad;
}

double FieldSpec::scalar_potential(const Vec3& x, double /*t*/, const PhysicalConstants& c) const {
    const auto d = static_cast<std::size_t>(dim_);
    return std::visit(overloaded{
                          [&](const preset::Harmonic& h) {
                              double v = 0.0;
                              for (std::size_t a = 0; a < d; ++a) v += h.omega[a] * h.omega[a] * x[a] * x[a];
                              return 0.5 * c.mass * v;
                          },
                          [&](const preset::UniformElectric& e) {
                              double v = 0.0;
                              for (std::size_t a = 0; a < d; ++a) v += e.field[a] * x[a];
                              return -c.charge * v;
                          },
                          [&](const preset::GridTable& g) { return table_value(g.potential, x); },
                          [](const auto&) { return 0.0; },
                      },
                      preset_);
}

Vec3 FieldSpec::vector_potential(const Vec3& x, double t) const {
    const auto d = static_cast<std::size_t>(dim_);
    Vec3 a = std::visit(overloaded{
                            [&](const preset::UniformMagnetic& m) {
                                Vec3 r{};
                                if (d == 2) {
                                    r[0] = -0.5 * m.field[2] * x[1];
                                    r[1] = 0.5 * m.field[2] * x[0];
                                } else {
                                    r[0] = 0.5 * (m.field[1] * x[2] - m.field[2] * x[1]);
                                    r[1] = 0.5 * (m.field[2] * x[0] - m.field[0] * x[2]);
                                    r[2] = 0.5 * (m.field[0] * x[1] - m.field[1] * x[0]);
                                }
                                return r;
                            },
                            [&](const preset::UniformVectorPotential& u) { return u.potential; },
                            [&](const preset::PlaneWaveA& pw) {
                                Vec3 r{};
                                const auto dir = static_cast<std::size_t>(pw.propagation_axis);
                                r[static_cast<std::size_t>(pw.polarization_axis)] =
                                    pw.amplitude * std::cos(pw.wavenumber * x[dir] - pw.frequency * t);
                                return r;
                            },
                            [&](const preset::GridTable& g) {
                                Vec3 r{};
                                for (std::size_t j = 0; j < g.vector_potential.size(); ++j)
                                    r[j] = table_value(g.vector_potential[j], x);
                                return r;
                            },
                            [](const auto&) { return Vec3{}; },
                        },
                        preset_);
    for (std::size_t j = 0; j < d; ++j) a[j] += offset_[j];
    for (std::size_t j = d; j < 3; ++j) a[j] = 0.0;
    return a;
}

ForceBundle FieldSpec::derivatives(const Vec3& x, double t, const PhysicalConstants& c) const {
    const auto d = static_cast<std::size_t>(dim_);
    ForceBundle f;
    std::visit(overloaded{
                   [&](const preset::Harmonic& h) {
                       for (std::size_t a = 0; a < d; ++a) f.grad_V[a] = c.mass * h.omega[a] * h.omega[a] * x[a];
                   },
                   [&](const preset::UniformElectric& e) {
                       for (std::size_t a = 0; a < d; ++a) f.grad_V[a] = -c.charge * e.field[a];
                   },
                   [&](const preset::UniformMagnetic& m) {
                       if (d == 2) {
                           f.grad_A[0][1] = -0.5 * m.field[2];
                           f.grad_A[1][0] = 0.5 * m.field[2];
                       } else {
                           f.grad_A[0][2] = 0.5 * m.field[1];
                           f.grad_A[0][1] = -0.5 * m.field[2];
                           f.grad_A[1][0] = 0.5 * m.field[2];
                           f.grad_A[1][2] = -0.5 * m.field[0];
                           f.grad_A[2][1] = 0.5 * m.field[0];
                           f.grad_A[2][0] = -0.5 * m.field[1];
                       }
                   },
                   [&](const preset::PlaneWaveA& pw) {
                       const auto pol = static_cast<std::size_t>(pw.polarization_axis);
                       const auto dir = static_cast<std::size_t>(pw.propagation_axis);
                       const double phase = pw.wavenumber * x[dir] - pw.frequency * t;
                       f.grad_A[pol][dir] = -pw.amplitude * pw.wavenumber * std::sin(phase);
                       f.dA_dt[pol] = pw.amplitude * pw.frequency * std::sin(phase);
                   },
                   [&](const preset::GridTable& g) {
                       f.grad_V = table_gradient(g.potential, x);
                       for (std::size_t j = 0; j < g.vector_potential.size(); ++j)
                           f.grad_A[j] = table_gradient(g.vector_potential[j], x);
                   },
                   [](const auto&) {},
               },
               preset_);
    return f;
}

double EffectivePotential::value(const Vec3& x, double t) const {
    const Vec3 a = fields_.vector_potential(x, t);
    const double a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const double k = consts_.charge * consts_.charge / (2.0 * consts_.mass * consts_.light_speed * consts_.light_speed);
    return fields_.scalar_potential(x, t, consts_) + k * a2;
}

Vec3 EffectivePotential::gradient(const Vec3& x, double t) const {
    const Vec3 a = fields_.vector_potential(x, t);
    const ForceBundle f = fields_.derivatives(x, t, consts_);
    const double k = consts_.charge * consts_.charge / (consts_.mass * consts_.light_speed * consts_.light_speed);
    Vec3 g = f.grad_V;
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t j = 0; j < 3; ++j) g[l] += k * a[j] * f.grad_A[j][l];
    return g;
}

double eval_hamiltonian(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, const Vec3& p,
                        double t) {
    const Vec3 a = fields.vector_potential(x, t);
    const double ec = consts.coupling();
    double kin = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(fields.dim()); ++j) {
        const double pi = p[j] - ec * a[j];
        kin += pi * pi;
    }
    return kin / (2.0 * consts.mass) + fields.scalar_potential(x, t, consts);
}

ForceBundle eval_force_fields(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, double t) {
    return fields.derivatives(x, t, consts);
}

PhaseFlow eval_phase_flow(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, const Vec3& p,
                          double t) {
    const auto d = static_cast<std::size_t>(fields.dim());
    const double ec = consts.coupling();
    PhaseFlow flow;
    Vec3 kin{};
    if (fields.has_vector_potential()) {
        const Vec3 a = fields.vector_potential(x, t);
        for (std::size_t j = 0; j < d; ++j) kin[j] = p[j] - ec * a[j];
    } else {
        kin = p;
    }
    const ForceBundle f = fields.derivatives(x, t, consts);
    for (std::size_t j = 0; j < d; ++j) {
        flow.velocity[j] = kin[j] / consts.mass;
        // -dH/dx_j = (1/mu) (p_l - e/c A_l) e/c dA_l/dx_j - dV/dx_j
        double lorentz = 0.0;
        for (std::size_t l = 0; l < d; ++l) lorentz += kin[l] * f.grad_A[l][j];
        flow.force[j] = ec * lorentz / consts.mass - f.grad_V[j];
    }
    return flow;
}

}  // namespace stochlab
