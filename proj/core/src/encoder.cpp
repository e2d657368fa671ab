#include "rcs/encoder.hpp"

#include <cmath>
#include <numbers>

#include "rcs/errors.hpp"

namespace rcs {

Vector noise_draw(const NoiseModel& noise, std::size_t m, std::uint64_t window_index) {
  Vector w(m, 0.0);
  if (noise.noiseless()) return w;
  if (!(noise.sigma > 0.0)) throw ConfigError("noise: sigma must be >= 0");
  Rng rng = make_rng(noise.seed, {0x9015e, window_index});
  std::normal_distribution<double> normal(0.0, noise.sigma);
  for (auto& v : w) v = normal(rng);
  return w;
}

EncoderState encode_first(const SensingMatrix& A, std::span<const double> x0,
                          const NoiseModel& noise, std::size_t tau) {
  if (x0.size() != A.cols()) throw DimensionError("encode_first: x0.size() != n");
  if (tau < 1 || tau > A.cols()) throw ConfigError("encode_first: need 1 <= tau <= n");
  EncoderState s;
  s.y = matvec(A.base, x0);
  s.offset = PermutationOffset(A.cols());
  s.noise = noise;
  s.tau = tau;
  s.last_noise = noise_draw(noise, A.rows(), 0);
  if (!noise.noiseless()) axpy(1.0, s.last_noise, s.y);
  return s;
}

void encode_step(EncoderState& state, const SensingMatrix& A, std::span<const double> leaving,
                 std::span<const double> entering) {
  if (leaving.size() != state.tau || entering.size() != state.tau)
    throw DimensionError("encode_step: expected tau leaving and tau entering values");
  if (state.y.size() != A.rows() || state.offset.period() != A.cols())
    throw DimensionError("encode_step: state does not match the sensing matrix");

  const std::size_t m = A.rows();
  for (std::size_t t = 0; t < state.tau; ++t) {
    const double innovation = entering[t] - leaving[t];
    if (innovation == 0.0) continue;
    const std::size_t c = state.offset.base_column(t);
    for (std::size_t r = 0; r < m; ++r) state.y[r] += innovation * A.base(r, c);
  }
  OpCounter::add(m * state.tau);

  state.offset = rotate(state.offset, state.tau);
  ++state.window_index;

  if (!state.noise.noiseless()) {
    Vector w = noise_draw(state.noise, m, state.window_index);
    for (std::size_t r = 0; r < m; ++r) state.y[r] += w[r] - state.last_noise[r];
    state.last_noise = std::move(w);
  }
}

Vector encode_direct(const SensingMatrix& A, const PermutationOffset& off,
                     std::span<const double> x, const NoiseModel& noise,
                     std::uint64_t window_index) {
  if (x.size() != A.cols()) throw DimensionError("encode_direct: x.size() != n");
  Vector y = matvec(materialize(A, off), x);
  if (!noise.noiseless()) axpy(1.0, noise_draw(noise, A.rows(), window_index), y);
  return y;
}

Vector ortho_coeff_step(std::span<const double> alpha_prev, const Matrix& Psi, double x_new,
                        double x_old) {
  const std::size_t n = alpha_prev.size();
  if (Psi.rows() != n || Psi.cols() != n) throw DimensionError("ortho_coeff_step: Psi not n x n");
  if (orthonormality_defect(Psi) > 1e-8)
    throw DegenerateMatrixError("ortho_coeff_step: Psi is not orthonormal");

  // x(i) = Psi alpha(i); shift up by one (Pi = P^T) and replace the last
  // entry; Gamma = Psi^T maps back. The rank-1 term uses Gamma's last column.
  const Vector x = matvec(Psi, alpha_prev);
  Vector shifted(n);
  for (std::size_t k = 0; k + 1 < n; ++k) shifted[k] = x[k + 1];
  shifted[n - 1] = x[0];
  Vector alpha = matvec_transposed(Psi, shifted);
  const double innovation = x_new - x_old;
  for (std::size_t k = 0; k < n; ++k) alpha[k] += Psi(n - 1, k) * innovation;
  OpCounter::add(n);
  return alpha;
}

ComplexVector fourier_coeff_step(std::span<const Complex> alpha_prev, double x_new, double x_old) {
  const std::size_t n = alpha_prev.size();
  if (n == 0) throw DimensionError("fourier_coeff_step: empty coefficient vector");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double innovation = (x_new - x_old) * inv_sqrt_n;
  const double theta = 2.0 * std::numbers::pi / static_cast<double>(n);

  // F Pi = Omega F with Omega = diag(e^{+2 pi i k/n}); F e_{n-1} has entries
  // e^{+2 pi i k/n}/sqrt(n), so both terms share the same twiddle.
  ComplexVector alpha(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex twiddle = std::polar(1.0, theta * static_cast<double>(k));
    alpha[k] = twiddle * (alpha_prev[k] + innovation);
  }
  OpCounter::add(n);
  return alpha;
}

ComplexVector unitary_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  const double theta = -2.0 * std::numbers::pi / static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j)
      s += x[j] * std::polar(1.0, theta * static_cast<double>((j * k) % n));
    out[k] = s * scale;
  }
  return out;
}

}  // namespace rcs
