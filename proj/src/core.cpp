#include "lpcoreset/core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lpcoreset/rng.hpp"

namespace lpcs {

DenseMatrix DenseMatrix::from(Mat m) {
  DenseMatrix out;
  out.data = std::move(m);
  out.row_weights = Vec::Ones(out.data.rows());
  out.origin.resize(out.data.rows());
  std::iota(out.origin.begin(), out.origin.end(), 0);
  return out;
}

Mat DenseMatrix::weighted() const {
  return row_weights.asDiagonal() * data;
}

void DenseMatrix::validate() const {
  if (data.rows() < 1 || data.cols() < 1)
    throw std::invalid_argument("DenseMatrix: empty matrix");
  if (!data.allFinite())
    throw std::invalid_argument("DenseMatrix: non-finite entries");
  if (row_weights.size() != data.rows() ||
      static_cast<Index>(origin.size()) != data.rows())
    throw std::invalid_argument("DenseMatrix: weight/origin length mismatch");
  if (!(row_weights.array() > 0.0).all() || !row_weights.allFinite())
    throw std::invalid_argument("DenseMatrix: weights must be positive");
}

void SubspaceQuery::validate() const {
  if (k < 1 || basis.cols() != k || basis.rows() < k)
    throw std::invalid_argument("SubspaceQuery: bad shape");
  Mat gram = basis.transpose() * basis;
  gram -= Mat::Identity(k, k);
  if (gram.cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("SubspaceQuery: basis not orthonormal");
}

double pq_norm(const DenseMatrix& m, double p) {
  if (p < 1.0) throw std::invalid_argument("pq_norm: p must be >= 1");
  if (!m.data.allFinite() || !m.row_weights.allFinite())
    throw std::invalid_argument("pq_norm: non-finite input");
  double total = 0.0;
  for (Index i = 0; i < m.rows(); ++i)
    total += std::pow(m.row_weights[i] * m.data.row(i).norm(), p);
  return total;
}

DenseMatrix residual(const DenseMatrix& m, const SubspaceQuery& f) {
  if (f.basis.rows() != m.cols())
    throw std::invalid_argument("residual: dimension mismatch");
  DenseMatrix out = m;
  out.data.noalias() -= (m.data * f.basis) * f.basis.transpose();
  return out;
}

namespace {

SvdResult truncate_svd(const Eigen::BDCSVD<Mat>& svd, Index keep) {
  SvdResult out;
  const Vec& s = svd.singularValues();
  Index rank = 0;
  const double cutoff = s.size() > 0 ? kRankCutoff * s[0] : 0.0;
  while (rank < s.size() && s[rank] > cutoff && s[rank] > 0.0) ++rank;
  const Index r = std::min(rank, keep);
  out.u = svd.matrixU().leftCols(r);
  out.s = s.head(r);
  out.v = svd.matrixV().leftCols(r);
  out.rank = rank;
  return out;
}

}  // namespace

SvdResult thin_svd(const DenseMatrix& m) {
  m.validate();
  Eigen::BDCSVD<Mat> svd(m.weighted(),
                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out = truncate_svd(svd, svd.singularValues().size());
  out.u = out.u.leftCols(out.rank);
  out.s = out.s.head(out.rank);
  out.v = out.v.leftCols(out.rank);
  return out;
}

std::pair<SvdResult, double> svd_truncate(const DenseMatrix& m, Index k) {
  m.validate();
  if (k < 1 || k > std::min(m.rows(), m.cols()))
    throw std::invalid_argument("svd_truncate: k out of range");
  Eigen::BDCSVD<Mat> svd(m.weighted(),
                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out = truncate_svd(svd, k);
  double tail = 0.0;
  if (out.rank <= k) {
    tail = 0.0;  // numerical rank within k: snap to an exact zero tail
  } else {
    const Vec& s = svd.singularValues();
    for (Index j = s.size() - 1; j >= k; --j) tail += s[j] * s[j];
  }
  return {std::move(out), tail};
}

DenseMatrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("gaussian_matrix: bad shape");
  Mat m(rows, cols);
  Rng rng(seed);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return DenseMatrix::from(std::move(m));
}

Mat orthonormalize(const Mat& basis) {
  Eigen::HouseholderQR<Mat> qr(basis);
  Mat q = qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
  Mat r = qr.matrixQR().topRows(basis.cols()).triangularView<Eigen::Upper>();
  const double scale = r.cwiseAbs().maxCoeff();
  for (Index j = 0; j < basis.cols(); ++j) {
    if (std::abs(r(j, j)) <= kRankCutoff * scale)
      throw std::invalid_argument("orthonormalize: rank-deficient basis");
  }
  return q;
}

}  // namespace lpcs
