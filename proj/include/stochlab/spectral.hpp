#pragma once

#include "stochlab/wavefunction.hpp"

#include <vector>

namespace stochlab {

enum class DerivativeMode {
    Spectral,     // periodic FFT differentiation
    FourthOrder   // central differences, zero outside the box
};

// Angular wavenumbers per axis in FFT order.
std::vector<double> wavenumbers(const GridSpec& grid, std::size_t axis);

// Multiplies the Fourier transform of f by prod_a (hbar k_a)^powers[a], which
// applies prod_a p_a^powers[a] with p = -i hbar d/dx. Odd powers zero the
// Nyquist mode.
ComplexField apply_momentum_powers(const GridSpec& grid, const ComplexField& f, const std::vector<int>& powers,
                                   double hbar);

// d^order f / dx_axis^order with order 1 or 2.
ComplexField derivative(const GridSpec& grid, const ComplexField& f, std::size_t axis, int order, DerivativeMode mode);

// d^2 f / dx_a dx_b (a may equal b).
ComplexField mixed_derivative(const GridSpec& grid, const ComplexField& f, std::size_t a, std::size_t b,
                              DerivativeMode mode);

// In-place multidimensional FFT (unnormalised forward, 1/N-normalised backward).
void fft_forward(const GridSpec& grid, ComplexField& f);
void fft_backward(const GridSpec& grid, ComplexField& f);

}  // namespace stochlab
