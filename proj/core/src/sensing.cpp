#include "rcs/sensing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rcs/errors.hpp"
#include "rcs/random.hpp"

namespace rcs {

namespace {

void check_shape(std::size_t m, std::size_t n) {
  if (m < 1 || m >= n) throw ConfigError("sensing matrix: need 1 <= m < n");
}

template <class Draw>
SensingMatrix fill(Ensemble kind, std::size_t m, std::size_t n, std::uint64_t seed, Draw draw) {
  check_shape(m, n);
  SensingMatrix A{Matrix(m, n), kind, seed};
  Rng rng = make_rng(seed, {0xA0, static_cast<std::uint64_t>(kind)});
  for (double& v : A.base.data()) v = draw(rng);
  return A;
}

constexpr char kMagic[4] = {'R', 'C', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "matrix container assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("matrix container: truncated input");
  return v;
}

}  // namespace

std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::bernoulli: return "bernoulli";
    case Ensemble::achlioptas: return "achlioptas";
  }
  return "unknown";
}

Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return Ensemble::gaussian;
  if (name == "bernoulli") return Ensemble::bernoulli;
  if (name == "achlioptas") return Ensemble::achlioptas;
  throw ConfigError("unknown ensemble '" + std::string(name) + "'");
}

PermutationOffset::PermutationOffset(std::size_t period, std::size_t value)
    : period_(period), value_(period ? value % period : 0) {
  if (period == 0) throw ConfigError("PermutationOffset: period must be >= 1");
}

SensingMatrix gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  return fill(Ensemble::gaussian, m, n, seed, [&](Rng& r) { return normal(r); });
}

SensingMatrix gen_bernoulli(std::size_t m, std::size_t n, std::uint64_t seed) {
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  std::bernoulli_distribution coin(0.5);
  return fill(Ensemble::bernoulli, m, n, seed, [&](Rng& r) { return coin(r) ? s : -s; });
}

SensingMatrix gen_achlioptas(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::uniform_int_distribution<int> die(0, 5);
  return fill(Ensemble::achlioptas, m, n, seed, [&](Rng& r) {
    const int face = die(r);
    return face == 0 ? 1.0 : face == 1 ? -1.0 : 0.0;
  });
}

SensingMatrix generate(Ensemble kind, std::size_t m, std::size_t n, std::uint64_t seed) {
  switch (kind) {
    case Ensemble::gaussian: return gen_gaussian(m, n, seed);
    case Ensemble::bernoulli: return gen_bernoulli(m, n, seed);
    case Ensemble::achlioptas: return gen_achlioptas(m, n, seed);
  }
  throw ConfigError("generate: unknown ensemble");
}

PermutationOffset rotate(PermutationOffset off, std::size_t steps) {
  return PermutationOffset(off.period(), off.value() + steps % off.period());
}

Vector column(const SensingMatrix& A, const PermutationOffset& off, std::size_t j) {
  if (j >= A.cols()) throw BoundsError("column: index out of range");
  if (off.period() != A.cols()) throw DimensionError("column: offset period != n");
  return A.base.column(off.base_column(j));
}

Matrix permutation_matrix(std::size_t n) {
  Matrix P(n, n);
  P(0, n - 1) = 1.0;
  for (std::size_t k = 1; k < n; ++k) P(k, k - 1) = 1.0;
  return P;
}

Matrix materialize(const SensingMatrix& A, const PermutationOffset& off) {
  if (off.period() != A.cols()) throw DimensionError("materialize: offset period != n");
  Matrix out(A.rows(), A.cols());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t j = 0; j < A.cols(); ++j) out(r, j) = A.base(r, off.base_column(j));
  return out;
}

double mutual_coherence(const Matrix& A) {
  const std::size_t n = A.cols();
  const Matrix T = A.transposed();  // columns of A become contiguous rows
  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    norms[j] = norm2(T.row(j));
    if (norms[j] == 0.0) throw DegenerateMatrixError("mutual_coherence: zero column");
  }
  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      mu = std::max(mu, std::abs(dot(T.row(i), T.row(j))) / (norms[i] * norms[j]));
  return std::min(mu, 1.0);
}

double mutual_coherence(const SensingMatrix& A, const PermutationOffset& off) {
  return mutual_coherence(materialize(A, off));
}

double orthonormality_defect(const Matrix& Q) {
  const Matrix G = matmul(Q.transposed(), Q);
  double d = 0.0;
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t j = 0; j < G.cols(); ++j)
      d = std::max(d, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

double basis_coherence(const Matrix& Phi, const Matrix& Psi) {
  const std::size_t n = Phi.rows();
  if (Phi.cols() != n || Psi.rows() != n || Psi.cols() != n)
    throw DimensionError("basis_coherence: both bases must be n x n");
  if (orthonormality_defect(Phi) > 1e-8 || orthonormality_defect(Psi) > 1e-8)
    throw DegenerateMatrixError("basis_coherence: input is not orthonormal");
  const Matrix C = matmul(Phi.transposed(), Psi);
  return std::sqrt(static_cast<double>(n)) * C.max_abs();
}

void save_matrix(std::ostream& out, const SensingMatrix& A) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, A.rows());
  put<std::uint64_t>(out, A.cols());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(A.kind));
  put<std::uint64_t>(out, A.seed);
  const auto data = A.base.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("matrix container: write failed");
}

SensingMatrix load_matrix(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("matrix container: bad magic");
  if (get<std::uint32_t>(in) != kVersion) throw IoError("matrix container: unsupported version");
  const auto m = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto kind = get<std::uint32_t>(in);
  const auto seed = get<std::uint64_t>(in);
  if (kind > 2) throw IoError("matrix container: unknown ensemble tag");
  if (m == 0 || n == 0 || m > (1ULL << 32) || n > (1ULL << 32))
    throw IoError("matrix container: implausible shape");
  SensingMatrix A{Matrix(m, n), static_cast<Ensemble>(kind), seed};
  auto data = A.base.data();
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw IoError("matrix container: truncated payload");
  return A;
}

void save_matrix(const std::string& path, const SensingMatrix& A) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_matrix(out, A);
}

SensingMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_matrix(in);
}

}  // namespace rcs
