#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "semr/numkit.hpp"

using namespace semr;

namespace {

Matrix make(int d, std::initializer_list<double> vals) {
  Matrix m(d);
  int i = 0;
  for (double v : vals) m.a[i++] = v;
  return m;
}

}  // namespace

TEST_CASE("matrix constructors and basic reductions") {
  Matrix id = Matrix::identity(3);
  CHECK(id(0, 0) == 1.0);
  CHECK(id(0, 1) == 0.0);
  CHECK(trace(id) == 3.0);

  Matrix d = Matrix::diagonal({3.0, 4.0});
  CHECK(trace(d) == 7.0);
  CHECK(frobenius_norm(d) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("matmul, transpose, matvec agree with hand calculation") {
  Matrix a = make(2, {1, 2, 3, 4});
  Matrix b = make(2, {5, 6, 7, 8});
  Matrix ab = matmul(a, b);
  CHECK(ab(0, 0) == 19.0);
  CHECK(ab(0, 1) == 22.0);
  CHECK(ab(1, 0) == 43.0);
  CHECK(ab(1, 1) == 50.0);

  Matrix at = transpose(a);
  CHECK(at(0, 1) == 3.0);
  CHECK(at(1, 0) == 2.0);

  std::vector<double> v = matvec(a, {1.0, -1.0});
  CHECK(v[0] == -1.0);
  CHECK(v[1] == -1.0);

  Matrix s = add(scale(a, 2.0), b);
  CHECK(s(1, 1) == 16.0);
}

TEST_CASE("spectral norm closed form and power iteration") {
  // 2x2 closed form: eigenvalues of [[2,1],[1,2]] are 1 and 3.
  CHECK(spectral_norm(make(2, {2, 1, 1, 2})) == doctest::Approx(3.0).epsilon(1e-12));
  // 3x3 goes through power iteration.
  Matrix d3 = Matrix::diagonal({1.0, 2.0, 5.0});
  CHECK(spectral_norm(d3) == doctest::Approx(5.0).epsilon(1e-8));
  // Symmetric with known top eigenvalue: [[4,1,0],[1,4,1],[0,1,4]] has
  // eigenvalues 4 and 4 +- sqrt(2).
  Matrix t = make(3, {4, 1, 0, 1, 4, 1, 0, 1, 4});
  CHECK(spectral_norm(t) == doctest::Approx(4.0 + std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("cholesky factor of a textbook matrix") {
  PsdMatrix a = PsdMatrix::from_matrix(make(2, {4, 2, 2, 3}));
  Matrix l = cholesky(a);
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("cholesky round trip on a random gram matrix") {
  RngStream rng(99, 0);
  Matrix g(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = rng.next_normal();
  Matrix spd = matmul(transpose(g), g);
  // Symmetrise exactly: a_ij and a_ji come from the same products but are
  // summed in different orders.
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < i; ++j) spd(i, j) = spd(j, i) = 0.5 * (spd(i, j) + spd(j, i));
  Matrix l = cholesky(PsdMatrix::from_matrix(spd));
  Matrix back = matmul(l, transpose(l));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(back(i, j) == doctest::Approx(spd(i, j)).epsilon(1e-9));
}

TEST_CASE("cholesky rejects indefinite input, accepts semidefinite") {
  CHECK_THROWS_AS(cholesky(PsdMatrix::from_matrix(make(2, {1, 2, 2, 1}))), NotPsdError);
  CHECK_THROWS_AS(PsdMatrix::from_matrix(make(2, {1, 2, 3, 1})), NotPsdError);  // asymmetric

  // Rank-one: [[1,1],[1,1]] = L L^T with L = [[1,0],[1,0]].
  PsdMatrix semi = PsdMatrix::from_matrix(make(2, {1, 1, 1, 1}));
  Matrix l = cholesky(semi);
  CHECK(l(0, 0) == 1.0);
  CHECK(l(1, 0) == 1.0);
  CHECK(l(1, 1) == 0.0);
  CHECK_THROWS_AS(psd_inverse(semi), SingularMatrixError);
}

TEST_CASE("psd_inverse against the adjugate formula") {
  PsdMatrix a = PsdMatrix::from_matrix(make(2, {4, 2, 2, 3}));
  Matrix inv = psd_inverse(a);  // det = 8
  CHECK(inv(0, 0) == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
  CHECK(inv(0, 1) == doctest::Approx(-2.0 / 8.0).epsilon(1e-12));
  CHECK(inv(1, 0) == doctest::Approx(-2.0 / 8.0).epsilon(1e-12));
  CHECK(inv(1, 1) == doctest::Approx(4.0 / 8.0).epsilon(1e-12));

  Matrix ii = psd_inverse(PsdMatrix::identity(4));
  CHECK(ii == Matrix::identity(4));
}

TEST_CASE("rng streams are deterministic and decoupled") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool all_equal = true, some_differ_stream = false, some_differ_root = false;
  for (int i = 0; i < 64; ++i) {
    uint64_t va = a.next_u64();
    if (va != b.next_u64()) all_equal = false;
    if (va != c.next_u64()) some_differ_stream = true;
    if (va != d.next_u64()) some_differ_root = true;
  }
  CHECK(all_equal);
  CHECK(some_differ_stream);
  CHECK(some_differ_root);
}

TEST_CASE("rng uniforms stay strictly inside (0,1)") {
  RngStream rng(1, 0);
  double mn = 1.0, mx = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    mn = std::min(mn, u);
    mx = std::max(mx, u);
    sum += u;
  }
  CHECK(mn > 0.0);
  CHECK(mx < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("rng normals have the right first four moments") {
  RngStream rng(2026, 3);
  const int n = 2000000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.next_normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.003);          // se ~ 0.0007
  CHECK(std::abs(var - 1.0) < 0.005);     // se ~ 0.001
  CHECK(std::abs(s3 / n) < 0.01);         // skewness, se ~ 0.0017
  CHECK(std::abs(s4 / n - 3.0) < 0.02);   // kurtosis, se ~ 0.0035
}

TEST_CASE("next_normal consumes exactly two raw draws") {
  RngStream a(5, 5), b(5, 5);
  a.next_normal();
  b.next_u64();
  b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams are uncorrelated in the crudest sense") {
  RngStream a(7, 0), b(7, 1);
  const int n = 100000;
  double sab = 0;
  for (int i = 0; i < n; ++i) sab += a.next_normal() * b.next_normal();
  CHECK(std::abs(sab / n) < 0.015);  // se of the cross moment ~ 0.003
}

TEST_CASE("streaming covariance on a two point sample") {
  StreamingCovariance sc(1);
  sc.update({0.0});
  sc.update({2.0});
  CHECK(sc.count() == 2);
  CHECK(sc.mean()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sc.scatter_trace() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sc.covariance_over_t()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sc.covariance_over_t_minus_1()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("streaming covariance edge counts") {
  StreamingCovariance sc(2);
  CHECK(sc.covariance_over_t()(0, 0) == 0.0);
  CHECK(sc.covariance_over_t_minus_1()(1, 1) == 0.0);
  sc.update({3.0, -1.0});
  CHECK(sc.covariance_over_t()(0, 0) == 0.0);           // single point, zero spread
  CHECK(sc.covariance_over_t_minus_1()(0, 0) == 0.0);   // undefined, reported as zero
  CHECK(sc.mean()[0] == 3.0);
}

TEST_CASE("streaming covariance matches the two pass oracle") {
  RngStream rng(314, 1);
  StreamingCovariance sc(3);
  std::vector<std::vector<double>> xs;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(3);
    for (double& v : x) v = 0.7 * rng.next_normal() + 0.3;
    x[2] = 0.5 * x[0] + rng.next_normal();  // induce correlation
    sc.update(x);
    xs.push_back(x);
  }
  auto mean = oracles::batch_mean(xs);
  Matrix scat = oracles::batch_scatter(xs);
  for (int i = 0; i < 3; ++i)
    CHECK(sc.mean()[i] == doctest::Approx(mean[i]).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(sc.scatter()(i, j) == doctest::Approx(scat(i, j)).epsilon(1e-9));
}

TEST_CASE("mvn sampler reproduces mean and covariance") {
  Matrix sigma = make(2, {4, 2, 2, 3});
  Matrix l = cholesky(PsdMatrix::from_matrix(sigma));
  std::vector<double> theta = {1.0, -2.0};
  RngStream rng(11, 4);
  StreamingCovariance sc(2);
  std::vector<double> z(2), x(2);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    mvn_sample_into(theta, l, rng, z, x);
    sc.update(x);
  }
  CHECK(sc.mean()[0] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sc.mean()[1] == doctest::Approx(-2.0).epsilon(0.01));
  Matrix cov = sc.covariance_over_t_minus_1();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(cov(i, j) - sigma(i, j)) < 0.08);
}

TEST_CASE("mvn sampling is reproducible and matches the allocating variant") {
  Matrix l = cholesky(PsdMatrix::diagonal({1.0, 9.0}));
  RngStream r1(8, 2), r2(8, 2);
  std::vector<double> z(2), x(2);
  for (int i = 0; i < 10; ++i) {
    mvn_sample_into({0.0, 0.0}, l, r1, z, x);
    std::vector<double> y = mvn_sample({0.0, 0.0}, l, r2);
    CHECK(x[0] == y[0]);
    CHECK(x[1] == y[1]);
  }
}
