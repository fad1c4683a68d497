#pragma once

#include "stochlab/algebra.hpp"
#include "stochlab/model.hpp"
#include "stochlab/phase_grid.hpp"
#include "stochlab/sde.hpp"
#include "stochlab/spectral.hpp"
#include "stochlab/wavefunction.hpp"

namespace stochlab {

struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Letters are treated as commuting numbers; coordinate of letter (alpha, i)
// is alpha*dim + i.
Estimate classical_expectation(const TrajectoryEnsemble& ens, const NumericPolynomial& observable);
// One-dimensional grid: only letters (0, 0) are allowed. Midpoint quadrature.
double classical_expectation(const PhaseSpaceGrid& grid, const NumericPolynomial& observable);

// <psi| poly |psi> for a normal-ordered polynomial: momenta act spectrally,
// then positions multiply. Momentum letters are -i hbar d/dx.
cplx quantum_expectation(const WaveFunction& psi, const NumericPolynomial& op, double hbar);
cplx quantum_expectation(const WaveFunction& psi, const OperatorPolynomial& op, double hbar);

// Classical squared angular momentum from the correlation tensor:
// -hbar^2 sum int (x_j x_j T_kk - x_j x_k T_jk). Single particle, three dimensions.
double L2_classical(const WaveFunction& psi, const PhysicalConstants& consts,
                    DerivativeMode mode = DerivativeMode::Spectral);

enum class AngularSum {
    PerParticle,  // sum_alpha L_alpha^2
    Total         // (sum_alpha L_alpha)^2
};

// Same construction for any particles x dim layout.
double angular_classical(const WaveFunction& psi, const PhysicalConstants& consts, AngularSum sum,
                         DerivativeMode mode = DerivativeMode::Spectral);

// L_ab = x_a p_b - x_b p_a of one particle.
OperatorPolynomial angular_momentum_component(int a, int b, int particle = 0);
// 1/2 sum_ab L_ab^2 of one particle in `dim` dimensions.
OperatorPolynomial angular_momentum_squared(int dim, int particle = 0);
OperatorPolynomial total_angular_momentum_squared(int particles, int dim);

// sym(x_i x_j p_l p_k) by brute-force permutation averaging.
OperatorPolynomial chi4_symmetric(int i, int j, int k, int l);
// Hand-written contraction formula for the same operator.
OperatorPolynomial chi4_closed_form(int i, int j, int k, int l);
cplx chi4_symmetric_expectation(const WaveFunction& psi, double hbar, int i, int j, int k, int l);

// sum_alpha sum_kl (sym(x_ak x_ak p_al p_al) - sym(x_ak x_al p_al p_ak)).
OperatorPolynomial L2_symmetric_operator(int particles, int dim);
// Symmetrised (sum_alpha L_alpha)^2.
OperatorPolynomial L2_symmetric_total_operator(int particles, int dim);

}  // namespace stochlab
