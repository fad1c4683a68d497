#pragma once

#include "stochlab/adjoint.hpp"
#include "stochlab/algebra.hpp"
#include "stochlab/observables.hpp"
#include "stochlab/sde.hpp"
#include "stochlab/wavefunction.hpp"

namespace stochlab {

// Grid representations are limited to particles * dim <= 4.
inline constexpr int kMaxManyBodyAxes = 4;

// One Euler-Maruyama step of an N-particle ensemble: every particle and
// component draws its own increment; pair forces come from ens.pair.
void mb_sde_step(TrajectoryEnsemble& ens, double dt);

// T over the (alpha i),(beta j) grid axes; see tensor_from_psi.
TensorField mb_tensor_from_psi(const WaveFunction& psi, DerivativeMode mode = DerivativeMode::Spectral);

// Classical squared angular momentum of all particles from the tensor,
// per-particle sum by default.
double mb_L2_classical(const WaveFunction& psi, const PhysicalConstants& consts, AngularSum sum = AngularSum::PerParticle,
                       DerivativeMode mode = DerivativeMode::Spectral);

// sym(x_{alpha i} x_{beta j} p_{gamma l} p_{delta k}) by permutation averaging.
OperatorPolynomial mb_chi4_symmetric(int alpha, int beta, int gamma, int delta, int i, int j, int k, int l);

// Contraction formula with the particle Kronecker deltas attached to the
// matching axis deltas.
OperatorPolynomial mb_chi4_closed_form(int alpha, int beta, int gamma, int delta, int i, int j, int k, int l);

// N (hbar^2 / 2) D (D - 1) / 2 as an exact rational coefficient of hbar^2.
Rational zero_point_constant(int particles, int dim);

}  // namespace stochlab
