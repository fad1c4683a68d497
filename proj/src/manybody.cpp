#include "stochlab/manybody.hpp"

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

void check_mb_layout(const WaveFunction& psi) {
    if (psi.particles * psi.dim > kMaxManyBodyAxes)
        throw UsageError("many-body grids are limited to particles * dim <= " + std::to_string(kMaxManyBodyAxes));
}

}  // namespace

void mb_sde_step(TrajectoryEnsemble& ens, double dt) { step_ensemble_inplace(ens, dt, SdeScheme::EulerMaruyama); }

TensorField mb_tensor_from_psi(const WaveFunction& psi, DerivativeMode mode) {
    check_mb_layout(psi);
    return tensor_from_psi(psi, mode);
}

double mb_L2_classical(const WaveFunction& psi, const PhysicalConstants& consts, AngularSum sum, DerivativeMode mode) {
    check_mb_layout(psi);
    return angular_classical(psi, consts, sum, mode);
}

OperatorPolynomial mb_chi4_symmetric(int alpha, int beta, int gamma, int delta, int i, int j, int k, int l) {
    return symmetrize_word({X(i, alpha), X(j, beta), P(l, gamma), P(k, delta)});
}

OperatorPolynomial mb_chi4_closed_form(int alpha, int beta, int gamma, int delta, int i, int j, int k, int l) {
    // Each x-p contraction carries hbar / (2i) and needs both the particle and
    // the axis labels to agree.
    auto d = [](int a, int b, int c, int e) { return (a == b && c == e) ? 1 : 0; };
    const ExactComplex half_over_i(Rational(0), Rational(-1, 2));
    OperatorPolynomial r;
    r.add(ExactComplex(1), 0, {X(i, alpha), X(j, beta), P(l, gamma), P(k, delta)});
    if (d(beta, gamma, j, l)) r.add(half_over_i, 1, {X(i, alpha), P(k, delta)});
    if (d(alpha, gamma, i, l)) r.add(half_over_i, 1, {X(j, beta), P(k, delta)});
    if (d(beta, delta, j, k)) r.add(half_over_i, 1, {X(i, alpha), P(l, gamma)});
    if (d(alpha, delta, i, k)) r.add(half_over_i, 1, {X(j, beta), P(l, gamma)});
    const int dd = d(alpha, gamma, i, l) * d(beta, delta, j, k) + d(alpha, delta, i, k) * d(beta, gamma, j, l);
    if (dd) r.add(OperatorPolynomial::constant(ExactComplex(Rational(-dd, 4)), 2));
    return r;
}

Rational zero_point_constant(int particles, int dim) { return Rational(particles * dim * (dim - 1), 4); }

}  // namespace stochlab
