#pragma once

#include "stochlab/model.hpp"
#include "stochlab/phase_grid.hpp"
#include "stochlab/sde.hpp"
#include "stochlab/spectral.hpp"
#include "stochlab/wavefunction.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace stochlab {

// phi(x, y) = sum_p Phi(x, p) exp(-i p y / hbar) dp on an (x, y) lattice.
struct AdjointField {
    Axis x_axis;
    std::vector<double> y;  // sample points
    ComplexField values;    // [i * y.size() + k]
};

// Throws DomainError when the y lattice aliases: the momentum support must
// satisfy max|p| * dy / hbar <= pi and the y extent must stay inside one
// period 2 pi hbar / dp of the discrete transform.
AdjointField adjoint_transform(const PhaseSpaceGrid& grid, const PhysicalConstants& consts,
                               const std::vector<double>& y);

using MultiIndex = std::array<int, 3>;

inline int total_degree(const MultiIndex& m) { return m[0] + m[1] + m[2]; }

// phi_lmn(x) = (-i/hbar)^(l+m+n) / (l! m! n!) int p1^l p2^m p3^n Phi d^3p on a spatial grid.
struct CoefficientTable {
    GridSpec grid;      // one to three spatial axes
    int order = 4;      // maximum total degree retained
    double time = 0.0;
    std::map<MultiIndex, ComplexField> coeffs;

    bool has(const MultiIndex& m) const { return coeffs.count(m) != 0; }
    const ComplexField& at(const MultiIndex& m) const;
};

// Every multi-index with total degree <= order over `axes` axes.
std::vector<MultiIndex> indices_up_to(int order, std::size_t axes);

// From a one-dimensional phase-space grid; the spatial lattice is the cell
// centres of the x axis.
CoefficientTable taylor_coeffs(const PhaseSpaceGrid& grid, const PhysicalConstants& consts, int order);

struct EnsembleCoeffOptions {
    int order = 2;
    // Largest acceptable relative standard error of the global moment
    // int p^n Phi, measured against E|p^n|. Exceeding it throws NumericalError.
    double max_relative_noise = 0.05;
};

// From sample paths binned on `grid` (cell-centred bins; nodes are the bin
// centres). Uses coordinates of particle 0.
CoefficientTable taylor_coeffs(const TrajectoryEnsemble& ens, const GridSpec& grid, const PhysicalConstants& consts,
                               const EnsembleCoeffOptions& options = {});

// Analytic product Gaussian Phi = N(x; x0, Sx) N(p; p0, Sp) with diagonal
// covariances, evaluated on the nodes of `grid`.
struct GaussianPhaseDensity {
    std::vector<double> x0, sigma_x, p0, sigma_p;  // per spatial axis
};
CoefficientTable taylor_coeffs(const GaussianPhaseDensity& density, const GridSpec& grid,
                               const PhysicalConstants& consts, int order);

// Time derivatives of every coefficient with degree <= order - 1 according to
// the recursion: the hbar/(i mu) raising terms, the -(1/i hbar) dU lowering
// terms, the four e/(mu c) vector-potential blocks including div(A phi_n), and
// the -mu P / hbar^2 lowering-by-two vacuum terms.
CoefficientTable recursion_rhs(const CoefficientTable& table, const PhysicalConstants& consts, const FieldSpec& fields,
                               double t, DerivativeMode mode = DerivativeMode::Spectral);

// J = (psi grad psi* - psi* grad psi) / 2, one component per grid axis.
std::vector<ComplexField> current_from_psi(const WaveFunction& psi, DerivativeMode mode = DerivativeMode::Spectral);

// T_jl = (psi* d_jl psi + psi d_jl psi* - d_j psi* d_l psi - d_j psi d_l psi*) / 4,
// stored for j <= l at index j * axes + l and mirrored.
struct TensorField {
    std::size_t axes = 0;
    std::vector<ComplexField> components;  // axes * axes entries
    const ComplexField& at(std::size_t j, std::size_t l) const { return components[j * axes + l]; }
};
TensorField tensor_from_psi(const WaveFunction& psi, DerivativeMode mode = DerivativeMode::Spectral);

// Residuals of the two P-independent equations at the middle of three
// equally spaced snapshots:
//   d|psi|^2/dt - (hbar/(i mu)) div J - (e/(mu c)) div(A |psi|^2)
//   dJ_b/dt - (hbar/(i mu)) d_a T_ab + (1/(i hbar)) d_b U |psi|^2
//           - (e/(mu c)) (d_b A_a) J_a - (e/(mu c)) d_a(A_a J_b)
struct ConsistencyReport {
    double time = 0.0;
    double density_residual = 0.0;   // L2 norm over the grid
    double current_residual = 0.0;   // L2 norm, all components
    double density_scale = 0.0;      // L2 norm of d|psi|^2/dt
    double current_scale = 0.0;      // L2 norm of dJ/dt
};
ConsistencyReport consistency_check_P_independent(const WaveFunction& before, const WaveFunction& middle,
                                                  const WaveFunction& after, const PhysicalConstants& consts,
                                                  const FieldSpec& fields,
                                                  DerivativeMode mode = DerivativeMode::FourthOrder);

// Directory with phi_<l>_<m>_<n>.bin (complex pairs) and manifest.json.
void export_table(const std::string& directory, const CoefficientTable& table);

}  // namespace stochlab
