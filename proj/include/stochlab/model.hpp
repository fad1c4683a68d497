#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace stochlab {

// Spatial vectors are stored in three slots; only the first `dim` are used.
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;
    double charge = 1.0;
    double light_speed = 1.0;
    double vacuum_power = 0.0;

    // Throws ValidationError naming the offending field.
    void validate() const;
    double coupling() const { return charge / light_speed; }  // e/c
};

namespace preset {

struct Free {};

// V = 1/2 mu sum_a omega_a^2 x_a^2
struct Harmonic {
    Vec3 omega{1.0, 1.0, 1.0};
};

// V = -e E.x
struct UniformElectric {
    Vec3 field{0.0, 0.0, 0.0};
};

// Symmetric gauge A = 1/2 B x r. In two dimensions only B[2] is used.
struct UniformMagnetic {
    Vec3 field{0.0, 0.0, 1.0};
};

// Constant vector potential: pure gauge, B = 0.
struct UniformVectorPotential {
    Vec3 potential{0.0, 0.0, 0.0};
};

// A_pol = amplitude cos(k x_dir - frequency t)
struct PlaneWaveA {
    double amplitude = 0.1;
    double wavenumber = 1.0;
    double frequency = 1.0;
    int polarization_axis = 0;
    int propagation_axis = 0;
};

// Tabulated V (and optionally A) on a uniform lattice.
struct GridTable {
    std::vector<std::size_t> shape;    // points per axis, size == dim
    std::vector<double> origin;        // coordinate of index 0 per axis
    std::vector<double> spacing;       // lattice step per axis
    std::vector<double> potential;     // row-major, last axis fastest
    std::vector<std::vector<double>> vector_potential;  // empty or dim tables
    int interpolation_order = 1;       // 1 (multilinear) or 3 (cubic)
};

}  // namespace preset

enum class FieldKind { Free, Harmonic, UniformElectric, UniformMagnetic, UniformVectorPotential, PlaneWaveA, GridTable };

struct ForceBundle {
    Vec3 grad_V{};        // dV/dx_l
    Mat3 grad_A{};        // grad_A[j][l] = dA_j/dx_l
    Vec3 dA_dt{};
};

class FieldSpec {
public:
    using Preset = std::variant<preset::Free, preset::Harmonic, preset::UniformElectric, preset::UniformMagnetic,
                                preset::UniformVectorPotential, preset::PlaneWaveA, preset::GridTable>;

    FieldSpec() = default;
    FieldSpec(int dim, Preset preset);

    static FieldSpec free(int dim) { return FieldSpec(dim, preset::Free{}); }
    static FieldSpec harmonic(int dim, double omega);

    int dim() const { return dim_; }
    FieldKind kind() const;
    std::string kind_name() const;
    const Preset& preset() const { return preset_; }

    // True when A vanishes identically (offset included).
    bool has_vector_potential() const;
    bool is_time_dependent() const;

    // Returns a copy whose vector potential is shifted by a constant.
    FieldSpec with_vector_offset(const Vec3& offset) const;

    double scalar_potential(const Vec3& x, double t, const PhysicalConstants& c) const;
    Vec3 vector_potential(const Vec3& x, double t) const;
    ForceBundle derivatives(const Vec3& x, double t, const PhysicalConstants& c) const;

    // Largest oscillator frequency, 0 for non-harmonic presets.
    double max_frequency() const;

private:
    double table_value(const std::vector<double>& values, const Vec3& x) const;
    Vec3 table_gradient(const std::vector<double>& values, const Vec3& x) const;

    int dim_ = 1;
    Preset preset_ = preset::Free{};
    Vec3 offset_{};
};

// U = V + e^2/(2 mu c^2) A.A
class EffectivePotential {
public:
    EffectivePotential(const PhysicalConstants& consts, const FieldSpec& fields) : consts_(consts), fields_(fields) {}
    double value(const Vec3& x, double t) const;
    Vec3 gradient(const Vec3& x, double t) const;

private:
    PhysicalConstants consts_;
    FieldSpec fields_;
};

// (1/2mu)|p - (e/c)A|^2 + V
double eval_hamiltonian(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, const Vec3& p,
                        double t);

ForceBundle eval_force_fields(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, double t);

// Velocity (p - (e/c)A)/mu and force -grad_x H at a phase-space point.
struct PhaseFlow {
    Vec3 velocity{};
    Vec3 force{};
};
PhaseFlow eval_phase_flow(const PhysicalConstants& consts, const FieldSpec& fields, const Vec3& x, const Vec3& p,
                          double t);

// Names accepted by make_field_preset.
const std::vector<std::string>& field_preset_names();

}  // namespace stochlab
