#include "semr/numkit.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace semr {

Matrix Matrix::identity(int d) {
  Matrix m(d);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<double>& diag) {
  Matrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim; ++i) m(i, i) = diag[i];
  return m;
}

bool operator==(const Matrix& x, const Matrix& y) {
  return x.dim == y.dim && x.a == y.a;
}

Matrix matmul(const Matrix& x, const Matrix& y) {
  if (x.dim != y.dim) throw DimensionError("matmul: dimension mismatch");
  const int d = x.dim;
  Matrix r(d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (int j = 0; j < d; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

Matrix transpose(const Matrix& x) {
  Matrix r(x.dim);
  for (int i = 0; i < x.dim; ++i)
    for (int j = 0; j < x.dim; ++j) r(j, i) = x(i, j);
  return r;
}

Matrix scale(const Matrix& x, double s) {
  Matrix r = x;
  for (double& v : r.a) v *= s;
  return r;
}

Matrix add(const Matrix& x, const Matrix& y) {
  if (x.dim != y.dim) throw DimensionError("add: dimension mismatch");
  Matrix r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

std::vector<double> matvec(const Matrix& x, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != x.dim) throw DimensionError("matvec: dimension mismatch");
  std::vector<double> r(x.dim, 0.0);
  for (int i = 0; i < x.dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < x.dim; ++j) s += x(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

double trace(const Matrix& x) {
  double s = 0.0;
  for (int i = 0; i < x.dim; ++i) s += x(i, i);
  return s;
}

double frobenius_norm(const Matrix& x) {
  double s = 0.0;
  for (double v : x.a) s += v * v;
  return std::sqrt(s);
}

double spectral_norm(const Matrix& x) {
  const int d = x.dim;
  if (d == 0) return 0.0;
  if (d == 1) return std::fabs(x(0, 0));
  if (d == 2) {
    // Symmetric 2x2: eigenvalues (t/2) +- sqrt((t/2)^2 - det)
    const double half_tr = 0.5 * (x(0, 0) + x(1, 1));
    const double det = x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
    const double disc = std::sqrt(std::fmax(half_tr * half_tr - det, 0.0));
    return std::fmax(std::fabs(half_tr + disc), std::fabs(half_tr - disc));
  }

  // Power iteration with a fixed, mildly asymmetric start vector.
  std::vector<double> v(d);
  for (int i = 0; i < d; ++i) v[i] = 1.0 + 1e-3 * i;
  double nv = 0.0;
  for (double e : v) nv += e * e;
  nv = std::sqrt(nv);
  for (double& e : v) e /= nv;

  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> w = matvec(x, v);
    double nw = 0.0;
    for (double e : w) nw += e * e;
    nw = std::sqrt(nw);
    if (nw == 0.0) return 0.0;
    for (double& e : w) e /= nw;
    // Rayleigh quotient of the normalised iterate
    std::vector<double> xw = matvec(x, w);
    double rq = 0.0;
    for (int i = 0; i < d; ++i) rq += w[i] * xw[i];
    if (std::fabs(rq - lambda) <= 1e-9 * std::fmax(std::fabs(rq), 1e-300)) {
      return std::fabs(rq);
    }
    lambda = rq;
    v = std::move(w);
  }
  return std::fabs(lambda);
}

PsdMatrix PsdMatrix::from_matrix(Matrix m) {
  double scale = 0.0;
  for (double v : m.a) scale = std::fmax(scale, std::fabs(v));
  for (int i = 0; i < m.dim; ++i)
    for (int j = i + 1; j < m.dim; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-12 * scale)
        throw NotPsdError("matrix is not symmetric");
  return PsdMatrix(std::move(m));
}

PsdMatrix PsdMatrix::identity(int d) { return PsdMatrix(Matrix::identity(d)); }

PsdMatrix PsdMatrix::diagonal(const std::vector<double>& diag) {
  return PsdMatrix(Matrix::diagonal(diag));
}

Matrix cholesky(const PsdMatrix& a) {
  const Matrix& m = a.matrix();
  const int d = m.dim;
  Matrix l(d);
  for (int j = 0; j < d; ++j) {
    double s = m(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (s < -1e-10) throw NotPsdError("negative Cholesky pivot");
    l(j, j) = s > 0.0 ? std::sqrt(s) : 0.0;  // pivots in [-1e-10, 0] clamp to 0
    for (int i = j + 1; i < d; ++i) {
      double t = m(i, j);
      for (int k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = l(j, j) > 0.0 ? t / l(j, j) : 0.0;
    }
  }
  return l;
}

Matrix psd_inverse(const PsdMatrix& a) {
  const Matrix l = cholesky(a);
  const int d = l.dim;
  for (int j = 0; j < d; ++j)
    if (l(j, j) == 0.0) throw SingularMatrixError("matrix is singular");

  // Solve L L^T X = I column by column.
  Matrix inv(d);
  std::vector<double> y(d);
  for (int c = 0; c < d; ++c) {
    for (int i = 0; i < d; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (int i = d - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < d; ++k) s -= l(k, i) * inv(k, c);
      inv(i, c) = s / l(i, i);
    }
  }
  return inv;
}

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream::RngStream(uint64_t root_seed, uint64_t stream_id)
    : root_(root_seed), stream_(stream_id) {
  key_ = mix64(mix64(root_seed + kGolden) ^ (stream_id * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull));
}

uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_double() {
  // 53 random bits, offset to the bin midpoint: never 0, never 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u1 = next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

StreamingCovariance::StreamingCovariance(int dim)
    : dim_(dim), mean_(dim, 0.0), scatter_(dim), delta_(dim, 0.0) {}

void StreamingCovariance::update(const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != dim_)
    throw DimensionError("StreamingCovariance: dimension mismatch");
  ++count_;
  const double w = static_cast<double>(count_ - 1) / static_cast<double>(count_);
  for (int i = 0; i < dim_; ++i) delta_[i] = x[i] - mean_[i];
  for (int i = 0; i < dim_; ++i) mean_[i] += delta_[i] / static_cast<double>(count_);
  // scatter += w * outer(delta, delta); symmetric update keeps the matrix
  // exactly symmetric in floating point.
  for (int i = 0; i < dim_; ++i) {
    const double wi = w * delta_[i];
    for (int j = 0; j < dim_; ++j) scatter_(i, j) += wi * delta_[j];
  }
}

Matrix StreamingCovariance::covariance_over_t() const {
  if (count_ == 0) return Matrix(dim_);
  return scale(scatter_, 1.0 / static_cast<double>(count_));
}

Matrix StreamingCovariance::covariance_over_t_minus_1() const {
  if (count_ <= 1) return Matrix(dim_);
  return scale(scatter_, 1.0 / static_cast<double>(count_ - 1));
}

std::vector<double> mvn_sample(const std::vector<double>& mean, const Matrix& chol,
                               RngStream& rng) {
  std::vector<double> z(mean.size()), out(mean.size());
  mvn_sample_into(mean, chol, rng, z, out);
  return out;
}

void mvn_sample_into(const std::vector<double>& mean, const Matrix& chol, RngStream& rng,
                     std::vector<double>& z, std::vector<double>& out) {
  const int d = chol.dim;
  for (int i = 0; i < d; ++i) z[i] = rng.next_normal();
  for (int i = 0; i < d; ++i) {
    double s = mean[i];
    for (int j = 0; j <= i; ++j) s += chol(i, j) * z[j];
    out[i] = s;
  }
}

}  // namespace semr
