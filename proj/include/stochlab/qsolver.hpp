#pragma once

#include "stochlab/model.hpp"
#include "stochlab/spectral.hpp"
#include "stochlab/wavefunction.hpp"

#include <string>
#include <vector>

namespace stochlab {

// External fields sampled on a wavefunction grid. Every particle feels the
// same FieldSpec at its own position; `coupled_A[a]` is (e/c) A along grid
// axis a evaluated at the owning particle's coordinates.
struct GridFieldSamples {
    RealField potential;
    std::vector<RealField> coupled_A;                  // empty when A = 0
    std::vector<RealField> grad_U;                     // filled on request
    std::vector<std::vector<RealField>> grad_coupled_A; // [a][b] = d(coupled_A[a])/dx_b; empty when A = 0
    bool has_A = false;
};

GridFieldSamples sample_grid_fields(const GridSpec& grid, int particles, int dim, const PhysicalConstants& consts,
                                    const FieldSpec& fields, double t, bool with_derivatives);

enum class PsiScheme {
    Spectral,       // Strang split-step, periodic box, A = 0 only
    CrankNicolson   // Peierls-phase stencil, Dirichlet box, ADI sweeps when there is more than one axis
};

struct QsolverOptions {
    double norm_drift_threshold = 1e-8;  // per step
};

struct PsiStepReport {
    double norm_before = 0.0;
    double norm_after = 0.0;
};

PsiStepReport evolve_psi_inplace(WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                                 PsiScheme scheme, const QsolverOptions& options = {});

WaveFunction evolve_psi(WaveFunction psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                        PsiScheme scheme, const QsolverOptions& options = {});

enum class EnergyMode {
    Spectral,  // FFT momentum operator
    Stencil    // the quadratic form of the Crank-Nicolson Hamiltonian
};

// <psi| (1/2mu) sum_a (p_a - (e/c)A_a)^2 + V |psi>
double hamiltonian_expectation(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields,
                               EnergyMode mode = EnergyMode::Spectral);

// M psi with spectral derivatives.
ComplexField apply_hamiltonian(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields);

std::vector<double> position_mean(const WaveFunction& psi);
std::vector<double> momentum_mean(const WaveFunction& psi, double hbar);  // <-i hbar d/dx>, spectral

// Both sides of the commutator identity per grid axis:
// lhs = <psi|[M, pi_j]|psi>,
// rhs = i hbar <dU/dx_j> - (hbar^2 / 2mu) sum_l int d((e/c)A_l)/dx_j (psi* d_l psi - psi d_l psi*).
struct CommutatorResult {
    std::vector<cplx> lhs;
    std::vector<cplx> rhs;
    std::vector<cplx> residual;
};
CommutatorResult commutator_check(const WaveFunction& psi, const PhysicalConstants& consts, const FieldSpec& fields);

struct PsiRecord {
    double time = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    std::vector<double> mean_x;
    std::vector<double> mean_p;
};

struct PsiRun {
    WaveFunction psi;
    std::vector<PsiRecord> records;
};

PsiRun evolve_psi_steps(WaveFunction psi, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                        std::size_t steps, std::size_t record_every, PsiScheme scheme,
                        const QsolverOptions& options = {});

// Columns: t, norm, energy, mean_x..., mean_p...
void write_psi_records_csv(const std::string& path, const std::vector<PsiRecord>& records);

}  // namespace stochlab
