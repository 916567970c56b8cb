#pragma once

#include <cstdint>
#include <vector>

#include "semr/errors.hpp"

namespace semr {

/** Dense row-major square matrix. Dimensions stay small (d <= 16), so no
 *  attempt is made at blocking or vectorisation beyond what the compiler does. */
struct Matrix {
  int dim = 0;
  std::vector<double> a;  // row-major, dim*dim entries

  Matrix() = default;
  explicit Matrix(int d) : dim(d), a(static_cast<size_t>(d) * d, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * dim + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * dim + j]; }

  static Matrix identity(int d);
  static Matrix diagonal(const std::vector<double>& diag);
};

bool operator==(const Matrix& x, const Matrix& y);

Matrix matmul(const Matrix& x, const Matrix& y);
Matrix transpose(const Matrix& x);
Matrix scale(const Matrix& x, double s);
Matrix add(const Matrix& x, const Matrix& y);
std::vector<double> matvec(const Matrix& x, const std::vector<double>& v);

double trace(const Matrix& x);
double frobenius_norm(const Matrix& x);

/** Largest absolute eigenvalue, for symmetric input. Exact closed forms for
 *  dim 1 and 2; power iteration to relative tolerance 1e-9 above that. */
double spectral_norm(const Matrix& x);

/** Symmetric positive semidefinite matrix. Construction checks symmetry to
 *  relative tolerance 1e-12 (against the largest absolute entry); definiteness
 *  itself is only established when a Cholesky factor is requested. */
class PsdMatrix {
 public:
  static PsdMatrix from_matrix(Matrix m);  // throws NotPsdError on asymmetry
  static PsdMatrix identity(int d);
  static PsdMatrix diagonal(const std::vector<double>& diag);

  const Matrix& matrix() const { return m_; }
  int dim() const { return m_.dim; }

 private:
  explicit PsdMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/** Lower-triangular Cholesky factor L with A = L L^T.
 *
 *  Pivots below -1e-10 raise NotPsdError; pivots in [-1e-10, 0] are treated as
 *  exact zeros (the corresponding column of L is zeroed), so positive
 *  SEMI-definite inputs factor without error. */
Matrix cholesky(const PsdMatrix& a);

/** Inverse via the Cholesky factor. Throws SingularMatrixError if any pivot
 *  was clamped to zero. */
Matrix psd_inverse(const PsdMatrix& a);

/** Counter-based splittable RNG. A (root_seed, stream_id) pair names a stream;
 *  output value j of a stream is a fixed function of (root_seed, stream_id, j),
 *  so streams can be handed to workers in any order without coupling.
 *  Generation is splitmix64-style: a strong 64-bit mix of key + j*golden. */
class RngStream {
 public:
  RngStream(uint64_t root_seed, uint64_t stream_id);

  uint64_t next_u64();
  /** Uniform on (0,1), both endpoints excluded (53-bit mantissa midpoints). */
  double next_double();
  /** Standard normal via Box-Muller (cosine branch). Consumes exactly two
   *  uniforms per call; nothing is cached across calls. */
  double next_normal();

  uint64_t root_seed() const { return root_; }
  uint64_t stream_id() const { return stream_; }

 private:
  uint64_t root_;
  uint64_t stream_;
  uint64_t key_;
  uint64_t counter_ = 0;
};

/** Streaming mean and scatter matrix (Welford, multivariate). The scatter is
 *  the running sum of outer(delta, delta') updates and equals (count-1) times
 *  the unbiased sample covariance. */
class StreamingCovariance {
 public:
  explicit StreamingCovariance(int dim);

  void update(const std::vector<double>& x);

  long long count() const { return count_; }
  int dim() const { return dim_; }
  const std::vector<double>& mean() const { return mean_; }
  const Matrix& scatter() const { return scatter_; }
  double scatter_trace() const { return trace(scatter_); }

  /** Sample covariance with 1/count normalisation, or zero if count == 0. */
  Matrix covariance_over_t() const;
  /** Unbiased sample covariance with 1/(count-1), or zero if count <= 1. */
  Matrix covariance_over_t_minus_1() const;

 private:
  int dim_;
  long long count_ = 0;
  std::vector<double> mean_;
  Matrix scatter_;
  std::vector<double> delta_;  // scratch
};

/** One draw from N(mean, L L^T) given the Cholesky factor L. */
std::vector<double> mvn_sample(const std::vector<double>& mean, const Matrix& chol,
                               RngStream& rng);

/** Allocation-free variant for hot loops; z is scratch of size dim. */
void mvn_sample_into(const std::vector<double>& mean, const Matrix& chol, RngStream& rng,
                     std::vector<double>& z, std::vector<double>& out);

}  // namespace semr
