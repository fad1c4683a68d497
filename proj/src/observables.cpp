#include "stochlab/observables.hpp"

#include "stochlab/errors.hpp"

#include <cmath>
#include <map>

namespace stochlab {

namespace {

std::size_t coord_of(const Letter& l, int particles, int dim) {
    if (l.particle < 0 || l.particle >= particles || l.axis < 0 || l.axis >= dim)
        throw UsageError("letter " + letter_text(l) + " outside the " + std::to_string(particles) + "x" +
                         std::to_string(dim) + " layout");
    return static_cast<std::size_t>(l.particle * dim + l.axis);
}

double classical_value(const NumericPolynomial& poly, const double* x, const double* p, int particles, int dim) {
    double total = 0.0;
    for (const auto& t : poly) {
        double v = t.coefficient.real();
        for (const auto& l : t.word) v *= (l.kind == Letter::Kind::X ? x : p)[coord_of(l, particles, dim)];
        total += v;
    }
    return total;
}

// Weight W_ab of T_ab in the classical angular sum, at the point `coords`.
double angular_weight(std::size_t a, std::size_t b, const std::vector<double>& x, int dim, AngularSum sum) {
    const std::size_t D = static_cast<std::size_t>(dim);
    const std::size_t alpha = a / D, k = a % D, beta = b / D, l = b % D;
    if (sum == AngularSum::PerParticle && alpha != beta) return 0.0;
    double w = 0.0;
    if (k == l)
        for (std::size_t j = 0; j < D; ++j) w += x[alpha * D + j] * x[beta * D + j];
    w -= x[alpha * D + l] * x[beta * D + k];
    return w;
}

}  // namespace

Estimate classical_expectation(const TrajectoryEnsemble& ens, const NumericPolynomial& observable) {
    const std::size_t m = ens.size();
    if (m == 0) throw UsageError("empty ensemble");
    const std::size_t c = ens.coords();
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const double v = classical_value(observable, &ens.positions[t * c], &ens.momenta[t * c], ens.particles, ens.dim);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(m);
    const double var = m > 1 ? std::max(0.0, (sum2 - sum * mean) / static_cast<double>(m - 1)) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(m))};
}

double classical_expectation(const PhaseSpaceGrid& grid, const NumericPolynomial& observable) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.x_axis.n; ++i) {
        const double x = grid.x_axis.center(i);
        for (std::size_t j = 0; j < grid.p_axis.n; ++j) {
            const double p = grid.p_axis.center(j);
            total += classical_value(observable, &x, &p, 1, 1) * grid.at(i, j);
        }
    }
    return total * grid.cell_area();
}

cplx quantum_expectation(const WaveFunction& psi, const NumericPolynomial& op, double hbar) {
    const GridSpec& grid = psi.grid;
    const std::size_t axes = grid.axes();
    // Group terms by their momentum part so each group needs one transform.
    std::map<std::vector<int>, std::vector<const NumericTerm*>> groups;
    for (const auto& t : op) {
        std::vector<int> powers(axes, 0);
        bool seen_p = false;
        for (const auto& l : t.word) {
            if (l.kind == Letter::Kind::P) {
                seen_p = true;
                ++powers[coord_of(l, psi.particles, psi.dim)];
            } else {
                if (seen_p) throw UsageError("quantum_expectation needs a normal-ordered polynomial");
                coord_of(l, psi.particles, psi.dim);
            }
        }
        groups[powers].push_back(&t);
    }
    cplx total = 0.0;
    const std::size_t size = psi.amplitude.size();
    std::vector<std::vector<double>> coords(axes);
    for (std::size_t a = 0; a < axes; ++a) {
        coords[a].resize(grid.n[a]);
        for (std::size_t i = 0; i < grid.n[a]; ++i) coords[a][i] = grid.coordinate(a, i);
    }
    for (const auto& [powers, terms] : groups) {
        const ComplexField phi = apply_momentum_powers(grid, psi.amplitude, powers, hbar);
        for (const NumericTerm* t : terms) {
            cplx acc = 0.0;
            std::vector<std::size_t> xs;
            for (const auto& l : t->word)
                if (l.kind == Letter::Kind::X) xs.push_back(coord_of(l, psi.particles, psi.dim));
            std::vector<std::size_t> idx(axes, 0);
            for (std::size_t flat = 0; flat < size; ++flat) {
                double w = 1.0;
                for (std::size_t a : xs) w *= coords[a][idx[a]];
                acc += std::conj(psi.amplitude[flat]) * w * phi[flat];
                for (std::size_t a = axes; a-- > 0;) {
                    if (++idx[a] < grid.n[a]) break;
                    idx[a] = 0;
                }
            }
            total += t->coefficient * acc * grid.cell_volume();
        }
    }
    return total;
}

cplx quantum_expectation(const WaveFunction& psi, const OperatorPolynomial& op, double hbar) {
    return quantum_expectation(psi, to_numeric(op, hbar), hbar);
}

double angular_classical(const WaveFunction& psi, const PhysicalConstants& consts, AngularSum sum,
                         DerivativeMode mode) {
    const GridSpec& grid = psi.grid;
    const std::size_t axes = grid.axes();
    const std::size_t size = psi.amplitude.size();
    std::vector<ComplexField> grad(axes);
    for (std::size_t a = 0; a < axes; ++a) grad[a] = derivative(grid, psi.amplitude, a, 1, mode);

    std::vector<double> x(axes);
    double total = 0.0;
    for (std::size_t a = 0; a < axes; ++a)
        for (std::size_t b = a; b < axes; ++b) {
            if (sum == AngularSum::PerParticle && a / psi.dim != b / psi.dim) continue;
            const ComplexField hess = mixed_derivative(grid, psi.amplitude, a, b, mode);
            double acc = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                for (std::size_t c = 0; c < axes; ++c) x[c] = grid.coordinate_of(i, c);
                const double w = angular_weight(a, b, x, psi.dim, sum);
                if (w == 0.0) continue;
                // T_ab = Re(psi* d_ab psi)/2 - Re(d_a psi* d_b psi)/2
                const double t = 0.5 * (std::conj(psi.amplitude[i]) * hess[i]).real() -
                                 0.5 * (std::conj(grad[a][i]) * grad[b][i]).real();
                acc += w * t;
            }
            total += (a == b ? 1.0 : 2.0) * acc;
        }
    return -consts.hbar * consts.hbar * total * grid.cell_volume();
}

double L2_classical(const WaveFunction& psi, const PhysicalConstants& consts, DerivativeMode mode) {
    if (psi.dim != 3 || psi.particles != 1) throw UsageError("L2_classical needs a single particle in three dimensions");
    return angular_classical(psi, consts, AngularSum::PerParticle, mode);
}

OperatorPolynomial angular_momentum_component(int a, int b, int particle) {
    OperatorPolynomial r;
    r.add(ExactComplex(1), 0, {X(a, particle), P(b, particle)});
    r.add(ExactComplex(-1), 0, {X(b, particle), P(a, particle)});
    return r;
}

OperatorPolynomial angular_momentum_squared(int dim, int particle) {
    OperatorPolynomial r;
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) {
            const auto l = angular_momentum_component(a, b, particle);
            r.add(l * l);
        }
    return r;
}

OperatorPolynomial total_angular_momentum_squared(int particles, int dim) {
    OperatorPolynomial r;
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) {
            OperatorPolynomial l;
            for (int alpha = 0; alpha < particles; ++alpha) l.add(angular_momentum_component(a, b, alpha));
            r.add(l * l);
        }
    return r;
}

OperatorPolynomial chi4_symmetric(int i, int j, int k, int l) { return symmetrize_word({X(i), X(j), P(l), P(k)}); }

OperatorPolynomial chi4_closed_form(int i, int j, int k, int l) {
    auto delta = [](int a, int b) { return a == b ? 1 : 0; };
    const ExactComplex half_over_i(Rational(0), Rational(-1, 2));  // 1/(2i)
    OperatorPolynomial r;
    r.add(ExactComplex(1), 0, {X(i), X(j), P(l), P(k)});
    for (int s = 0; s < delta(j, l); ++s) r.add(half_over_i, 1, {X(i), P(k)});
    for (int s = 0; s < delta(i, l); ++s) r.add(half_over_i, 1, {X(j), P(k)});
    for (int s = 0; s < delta(j, k); ++s) r.add(half_over_i, 1, {X(i), P(l)});
    for (int s = 0; s < delta(i, k); ++s) r.add(half_over_i, 1, {X(j), P(l)});
    const int dd = delta(i, l) * delta(j, k) + delta(i, k) * delta(j, l);
    if (dd) r.add(OperatorPolynomial::constant(ExactComplex(Rational(-dd, 4)), 2));
    return r;
}

cplx chi4_symmetric_expectation(const WaveFunction& psi, double hbar, int i, int j, int k, int l) {
    return quantum_expectation(psi, chi4_closed_form(i, j, k, l), hbar);
}

OperatorPolynomial L2_symmetric_operator(int particles, int dim) {
    if (particles < 1 || dim < 1) throw UsageError("particles and dim must be positive");
    OperatorPolynomial r;
    for (int alpha = 0; alpha < particles; ++alpha)
        for (int k = 0; k < dim; ++k)
            for (int l = 0; l < dim; ++l) {
                r.add(symmetrize_word({X(k, alpha), X(k, alpha), P(l, alpha), P(l, alpha)}));
                r.add(symmetrize_word({X(k, alpha), X(l, alpha), P(l, alpha), P(k, alpha)}), ExactComplex(-1));
            }
    return r;
}

OperatorPolynomial L2_symmetric_total_operator(int particles, int dim) {
    if (particles < 1 || dim < 1) throw UsageError("particles and dim must be positive");
    OperatorPolynomial r;
    for (int alpha = 0; alpha < particles; ++alpha)
        for (int beta = 0; beta < particles; ++beta)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) {
                    r.add(symmetrize_word({X(k, alpha), X(k, beta), P(l, alpha), P(l, beta)}));
                    r.add(symmetrize_word({X(k, alpha), X(l, beta), P(l, alpha), P(k, beta)}), ExactComplex(-1));
                }
    return r;
}

}  // namespace stochlab
