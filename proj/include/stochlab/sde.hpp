#pragma once

#include "stochlab/model.hpp"
#include "stochlab/phase_grid.hpp"
#include "stochlab/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stochlab {

// Mutual interaction V(x_a - x_b) summed over unordered particle pairs.
struct PairInteraction {
    enum class Kind { None, Harmonic, SoftCoulomb };
    Kind kind = Kind::None;
    double strength = 0.0;   // kappa for Harmonic (V = kappa r^2 / 2), k for SoftCoulomb (V = k / sqrt(r^2 + eps^2))
    double softening = 1.0;  // eps

    double value(const Vec3& r) const;
    Vec3 gradient(const Vec3& r) const;  // dV/dr
};

// M synchronous sample paths of N particles in `dim` dimensions.
// Coordinate layout per trajectory: particle-major, axis-minor (N*dim values).
struct TrajectoryEnsemble {
    int dim = 1;
    int particles = 1;
    std::vector<double> positions;
    std::vector<double> momenta;
    double time = 0.0;
    std::uint64_t seed = 0;
    PhysicalConstants consts;
    FieldSpec fields;
    PairInteraction pair;
    std::vector<NormalStream> streams;  // one per trajectory

    std::size_t size() const { return streams.size(); }
    std::size_t coords() const { return static_cast<std::size_t>(dim * particles); }

    // Total H of trajectory m (kinetic + external + pair).
    double energy(std::size_t m) const;
};

// Independent Gaussian initial cloud, identical for every particle.
struct GaussianCloud {
    Vec3 x0{};
    Vec3 p0{};
    Vec3 sigma_x{1.0, 1.0, 1.0};
    Vec3 sigma_p{0.5, 0.5, 0.5};
    // Optional per-particle offset of the position mean (particle-major).
    std::vector<Vec3> particle_offsets;
};

TrajectoryEnsemble make_ensemble(const PhysicalConstants& consts, const FieldSpec& fields, std::size_t trajectories,
                                 const GaussianCloud& cloud, std::uint64_t seed, int particles = 1,
                                 PairInteraction pair = {});

enum class SdeScheme {
    EulerMaruyama,   // reference scheme
    SymplecticSplit  // kick-drift-kick for the drift, noise added with the closing kick; requires A = 0
};

// Advances every trajectory by dt in place. Throws NumericalError naming the
// first trajectory that becomes non-finite.
void step_ensemble_inplace(TrajectoryEnsemble& ens, double dt, SdeScheme scheme = SdeScheme::EulerMaruyama);

TrajectoryEnsemble step_ensemble(TrajectoryEnsemble ens, double dt, SdeScheme scheme = SdeScheme::EulerMaruyama);

struct MomentRecord {
    double time = 0.0;
    std::vector<double> mean_x;      // per coordinate
    std::vector<double> mean_v;      // <v> = <p - (e/c)A>/mu
    double mean_H = 0.0;
    std::vector<double> cov_xp;      // cov(x_a, p_b), row-major coords x coords
    std::size_t count = 0;
    std::vector<double> var_x;
    std::vector<double> var_v;
    double var_H = 0.0;
    std::vector<double> mean_force;  // <-grad_x H - (e/c) dA/dt>: predicted mu d<v>/dt
};

MomentRecord measure_moments(const TrajectoryEnsemble& ens);

struct EnergyRateFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
};

struct ExperimentConfig {
    PhysicalConstants consts;
    FieldSpec fields = FieldSpec::free(1);
    GaussianCloud initial;
    int particles = 1;
    PairInteraction pair;
    std::size_t trajectories = 1000;
    double dt = 0.01;
    std::size_t steps = 100;
    std::size_t record_every = 10;
    SdeScheme scheme = SdeScheme::EulerMaruyama;
    std::uint64_t seed = 1;
    bool allow_unstable_dt = false;
};

struct ExperimentResult {
    std::vector<MomentRecord> records;
    // Ensemble-mean OLS slope of H over the record times; the standard error
    // comes from the spread of per-trajectory slopes, which are independent.
    EnergyRateFit energy_rate;
    TrajectoryEnsemble final_state;
};

// dt <= 0.05 / omega_max for oscillator presets.
double sde_stability_bound(const FieldSpec& fields);

ExperimentResult run_experiment(const ExperimentConfig& config);

struct EhrenfestPoint {
    double time = 0.0;
    std::vector<double> residual;  // mu d<v>/dt - <force>
};

std::vector<EhrenfestPoint> ehrenfest_residual(const std::vector<MomentRecord>& series, const FieldSpec& fields,
                                               const PhysicalConstants& consts);

struct HistogramResult {
    PhaseSpaceGrid grid;
    double clipped_fraction = 0.0;
};

// Density histogram of coordinate `coord` of every trajectory.
HistogramResult histogram_phase_space(const TrajectoryEnsemble& ens, const Axis& x_axis, const Axis& p_axis,
                                      std::size_t coord = 0);

// Header: u64 M, u64 coords, f64 time, u64 seed; body: M*coords f64 positions then momenta.
void write_ensemble_snapshot(const std::string& path, const TrajectoryEnsemble& ens);

struct EnsembleSnapshot {
    std::size_t trajectories = 0;
    std::size_t coords = 0;
    double time = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> positions;
    std::vector<double> momenta;
};
EnsembleSnapshot read_ensemble_snapshot(const std::string& path);

// Column order: t, mean_x..., mean_v..., mean_H, cov..., var_x..., var_v..., var_H, mean_force..., count
void write_moments_csv(const std::string& path, const std::vector<MomentRecord>& records);

}  // namespace stochlab
