#pragma once

// Random sensing ensembles, the cyclic column rotation A(i) = A(0) P^i, and
// coherence diagnostics.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rcs/numkernel.hpp"

namespace rcs {

enum class Ensemble : std::uint32_t { gaussian = 0, bernoulli = 1, achlioptas = 2 };

std::string_view to_string(Ensemble e);
/// Accepts "gaussian", "bernoulli", "achlioptas". Throws ConfigError otherwise.
Ensemble parse_ensemble(std::string_view name);

struct SensingMatrix {
  Matrix base;  ///< A(0), m x n with m < n
  Ensemble kind = Ensemble::gaussian;
  std::uint64_t seed = 0;

  std::size_t rows() const noexcept { return base.rows(); }
  std::size_t cols() const noexcept { return base.cols(); }
};

/// Rotation state of A(i) = A(0) P^i. Logical column j of the rotated matrix is
/// base column (j + value) mod period.
class PermutationOffset {
 public:
  explicit PermutationOffset(std::size_t period, std::size_t value = 0);

  std::size_t value() const noexcept { return value_; }
  std::size_t period() const noexcept { return period_; }
  /// Base column backing logical column j.
  std::size_t base_column(std::size_t j) const noexcept {
    const std::size_t k = j + value_;
    return k >= period_ ? k - period_ : k;
  }

  friend bool operator==(const PermutationOffset&, const PermutationOffset&) = default;

 private:
  std::size_t period_;
  std::size_t value_;
};

/// N(0, 1/m) entries.
SensingMatrix gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed);
/// +-1/sqrt(m) with equal probability.
SensingMatrix gen_bernoulli(std::size_t m, std::size_t n, std::uint64_t seed);
/// {1, 0, -1} with probabilities {1/6, 2/3, 1/6}.
SensingMatrix gen_achlioptas(std::size_t m, std::size_t n, std::uint64_t seed);
SensingMatrix generate(Ensemble kind, std::size_t m, std::size_t n, std::uint64_t seed);

/// Advances the rotation by `steps` columns, O(1).
PermutationOffset rotate(PermutationOffset off, std::size_t steps);

/// Logical column j of A(0) P^offset.
Vector column(const SensingMatrix& A, const PermutationOffset& off, std::size_t j);

/// The cyclic permutation P: P(k, k-1) = 1 for k >= 1 and P(0, n-1) = 1.
Matrix permutation_matrix(std::size_t n);
/// Explicit A(0) P^offset, built by column gathering.
Matrix materialize(const SensingMatrix& A, const PermutationOffset& off);

/// Largest normalized inner product between two distinct columns.
/// Throws DegenerateMatrixError on a zero column.
double mutual_coherence(const Matrix& A);
double mutual_coherence(const SensingMatrix& A, const PermutationOffset& off);

/// sqrt(n) * max |<phi_k, psi_j>| for two orthonormal n x n bases (columns).
/// Throws DegenerateMatrixError if either input is not orthonormal.
double basis_coherence(const Matrix& Phi, const Matrix& Psi);

/// Max |Q^T Q - I|.
double orthonormality_defect(const Matrix& Q);

/// Binary container: magic "RCSM", u32 version, u64 m, u64 n, u32 kind,
/// u64 seed, then m*n little-endian doubles in row-major order.
void save_matrix(std::ostream& out, const SensingMatrix& A);
SensingMatrix load_matrix(std::istream& in);
void save_matrix(const std::string& path, const SensingMatrix& A);
SensingMatrix load_matrix(const std::string& path);

}  // namespace rcs
