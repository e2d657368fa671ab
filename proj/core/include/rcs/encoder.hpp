#pragma once

// Measurement state across sliding windows: one full encode for the first
// window, then rank-tau updates using the rotated sensing columns. Also the
// coefficient recursions for a window expressed in an orthonormal or Fourier
// basis.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcs/numkernel.hpp"
#include "rcs/random.hpp"
#include "rcs/sensing.hpp"

namespace rcs {

/// Additive N(0, sigma^2 I) measurement noise. Each window draws a fresh
/// vector from an engine keyed on (seed, window index), so any encoder that
/// visits window i sees the same w(i).
struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  bool noiseless() const noexcept { return sigma == 0.0; }
};

/// w(i) for an m-dimensional measurement. All zeros when sigma == 0.
Vector noise_draw(const NoiseModel& noise, std::size_t m, std::uint64_t window_index);

struct EncoderState {
  Vector y;  ///< A(i) x(i) + w(i)
  std::uint64_t window_index = 0;
  PermutationOffset offset{1};
  NoiseModel noise;
  std::size_t tau = 1;
  Vector last_noise;  ///< w(i), kept so the next step can add w(i+1) - w(i)
};

/// y(0) = A(0) x(0) + w(0). Cost O(mn).
EncoderState encode_first(const SensingMatrix& A, std::span<const double> x0,
                          const NoiseModel& noise, std::size_t tau = 1);

/// Slides the window by tau: y += sum_t (entering[t] - leaving[t]) * a_t(i),
/// rotates the offset by tau, then adds the noise increment. Cost O(m tau).
void encode_step(EncoderState& state, const SensingMatrix& A, std::span<const double> leaving,
                 std::span<const double> entering);

/// Full product with the materialized rotation plus w(window_index). The
/// baseline that re-encodes every window from scratch.
Vector encode_direct(const SensingMatrix& A, const PermutationOffset& off,
                     std::span<const double> x, const NoiseModel& noise,
                     std::uint64_t window_index = 0);

/// Coefficients of the next window in basis Psi (x = Psi alpha) from the
/// current coefficients. Psi must be orthonormal. O(n^2).
Vector ortho_coeff_step(std::span<const double> alpha_prev, const Matrix& Psi, double x_new,
                        double x_old);

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Unitary DFT coefficients of the next window from those of the current one:
/// a diagonal twiddle plus a rank-1 correction. O(n).
ComplexVector fourier_coeff_step(std::span<const Complex> alpha_prev, double x_new, double x_old);

/// alpha_k = n^{-1/2} sum_j x_j e^{-2 pi i jk/n}, the reference the Fourier
/// recursion tracks. O(n^2).
ComplexVector unitary_dft(std::span<const double> x);

}  // namespace rcs
