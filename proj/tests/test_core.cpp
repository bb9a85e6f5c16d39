#include <doctest.h>

#include <cmath>

#include "lpcoreset/core.hpp"
#include "lpcoreset/rng.hpp"

using namespace lpcs;

namespace {

DenseMatrix random_matrix(Index n, Index d, std::uint64_t seed) {
  return gaussian_matrix(n, d, seed);
}

SubspaceQuery axis_query(Index d, Index axis) {
  SubspaceQuery q;
  q.basis = Mat::Zero(d, 1);
  q.basis(axis, 0) = 1.0;
  q.k = 1;
  return q;
}

}  // namespace

TEST_CASE("pq_norm on unit rows") {
  DenseMatrix m = DenseMatrix::from(Mat::Identity(2, 2));
  CHECK(pq_norm(m, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("pq_norm single 3-4-5 row at p=2") {
  Mat row(1, 2);
  row << 3.0, 4.0;
  CHECK(pq_norm(DenseMatrix::from(row), 2.0) ==
        doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("pq_norm matches a direct elementwise oracle") {
  DenseMatrix m = random_matrix(10, 4, 11);
  double expected = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (Index j = 0; j < m.cols(); ++j) sq += m.data(i, j) * m.data(i, j);
    expected += std::pow(std::sqrt(sq), 1.5);
  }
  CHECK(pq_norm(m, 1.5) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pq_norm at p=2 equals squared Frobenius, weighted or not") {
  DenseMatrix m = random_matrix(30, 6, 12);
  CHECK(pq_norm(m, 2.0) ==
        doctest::Approx(m.data.squaredNorm()).epsilon(1e-12));
  Rng rng(5);
  for (Index i = 0; i < m.rows(); ++i) m.row_weights[i] = 0.5 + rng.uniform();
  CHECK(pq_norm(m, 2.0) ==
        doctest::Approx(m.weighted().squaredNorm()).epsilon(1e-12));
}

TEST_CASE("pq_norm is zero exactly when all rows are zero") {
  DenseMatrix zero = DenseMatrix::from(Mat::Zero(4, 3));
  CHECK(pq_norm(zero, 1.5) == 0.0);
  zero.data(2, 1) = 1e-30;
  CHECK(pq_norm(zero, 1.5) > 0.0);
}

TEST_CASE("pq_norm rejects bad input") {
  DenseMatrix m = random_matrix(3, 3, 1);
  CHECK_THROWS_AS(pq_norm(m, 0.5), std::invalid_argument);
  m.data(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(pq_norm(m, 2.0), std::invalid_argument);
}

TEST_CASE("residual against a coordinate axis") {
  DenseMatrix m = DenseMatrix::from(Mat::Identity(2, 2));
  DenseMatrix r = residual(m, axis_query(2, 0));
  CHECK(r.data(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.data(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.data(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.data(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("residual against the full space vanishes") {
  DenseMatrix m = random_matrix(8, 4, 3);
  SubspaceQuery q;
  q.basis = Mat::Identity(4, 4);
  q.k = 4;
  CHECK(residual(m, q).data.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("residual satisfies the Pythagorean identity") {
  DenseMatrix m = random_matrix(20, 6, 4);
  SubspaceQuery q;
  q.basis = orthonormalize(gaussian_matrix(6, 2, 9).data);
  q.k = 2;
  const double res = residual(m, q).data.squaredNorm();
  const double proj = (m.data * q.basis).squaredNorm();
  CHECK(res + proj == doctest::Approx(m.data.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("residual contracts pq_norm and is idempotent") {
  DenseMatrix m = random_matrix(15, 5, 6);
  SubspaceQuery q;
  q.basis = orthonormalize(gaussian_matrix(5, 2, 10).data);
  q.k = 2;
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    DenseMatrix r = residual(m, q);
    CHECK(pq_norm(r, p) <= pq_norm(m, p) * (1.0 + 1e-12));
    DenseMatrix rr = residual(r, q);
    CHECK((rr.data - r.data).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("residual keeps weights and origin, rejects bad shapes") {
  DenseMatrix m = random_matrix(6, 4, 7);
  m.row_weights[2] = 3.0;
  m.origin[4] = 17;
  DenseMatrix r = residual(m, axis_query(4, 1));
  CHECK(r.row_weights[2] == 3.0);
  CHECK(r.origin[4] == 17);
  CHECK_THROWS_AS(residual(m, axis_query(3, 0)), std::invalid_argument);
}

TEST_CASE("svd_truncate of a diagonal matrix") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2.0, 1.0, 1.0;
  auto [svd, tail] = svd_truncate(DenseMatrix::from(d), 1);
  CHECK(tail == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(svd.s[0] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("svd_truncate snaps exact low rank to a zero tail") {
  DenseMatrix lowrank = random_matrix(12, 3, 8);
  Mat wide = lowrank.data * gaussian_matrix(3, 7, 9).data;  // rank 3 in R^7
  auto [svd, tail] = svd_truncate(DenseMatrix::from(wide), 3);
  CHECK(tail <= 1e-18 * wide.squaredNorm());
  CHECK(svd.rank == 3);
}

TEST_CASE("svd_truncate tail matches reconstruct-and-subtract") {
  DenseMatrix m = random_matrix(20, 6, 10);
  auto [svd, tail] = svd_truncate(m, 3);
  Mat approx = svd.u * svd.s.asDiagonal() * svd.v.transpose();
  double expected = 0.0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double diff = m.data(i, j) - approx(i, j);
      expected += diff * diff;
    }
  CHECK(tail == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("svd_truncate tails are monotone in k and validate k") {
  DenseMatrix m = random_matrix(15, 6, 13);
  double prev = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= 6; ++k) {
    const double tail = svd_truncate(m, k).second;
    CHECK(tail <= prev * (1.0 + 1e-12));
    prev = tail;
  }
  CHECK_THROWS_AS(svd_truncate(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(svd_truncate(m, 7), std::invalid_argument);
}

TEST_CASE("svd_truncate folds row weights before decomposing") {
  DenseMatrix m = random_matrix(10, 4, 14);
  Rng rng(3);
  for (Index i = 0; i < m.rows(); ++i) m.row_weights[i] = 0.5 + rng.uniform();
  DenseMatrix scaled = DenseMatrix::from(m.weighted());
  CHECK(svd_truncate(m, 2).second ==
        doctest::Approx(svd_truncate(scaled, 2).second).epsilon(1e-10));
}

TEST_CASE("svd factors are orthonormal") {
  DenseMatrix m = random_matrix(25, 7, 15);
  SvdResult svd = thin_svd(m);
  Mat utu = svd.u.transpose() * svd.u - Mat::Identity(svd.rank, svd.rank);
  Mat vtv = svd.v.transpose() * svd.v - Mat::Identity(svd.rank, svd.rank);
  CHECK(utu.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(vtv.cwiseAbs().maxCoeff() < 1e-10);
  for (Index j = 1; j < svd.s.size(); ++j) CHECK(svd.s[j - 1] >= svd.s[j]);
}

TEST_CASE("gaussian_matrix is deterministic per seed") {
  DenseMatrix a = gaussian_matrix(5, 4, 42);
  DenseMatrix b = gaussian_matrix(5, 4, 42);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  DenseMatrix c = gaussian_matrix(5, 4, 43);
  CHECK((a.data - c.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gaussian_matrix smallest case and moments") {
  DenseMatrix one = gaussian_matrix(1, 1, 5);
  CHECK(std::isfinite(one.data(0, 0)));

  DenseMatrix big = gaussian_matrix(100000, 1, 99);
  const double mean = big.data.col(0).mean();
  const double var =
      (big.data.col(0).array() - mean).square().sum() / (big.rows() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}
