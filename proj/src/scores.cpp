#include "lpcoreset/scores.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "lpcoreset/rng.hpp"

namespace lpcs {

ScoreVector leverage_scores(const DenseMatrix& m) {
  SvdResult svd = thin_svd(m);
  ScoreVector out;
  out.kind = ScoreKind::Leverage;
  out.values = svd.u.array().square().rowwise().sum().matrix();
  out.values = out.values.cwiseMin(1.0).cwiseMax(0.0);
  return out;
}

double ridge_lambda(const DenseMatrix& m, Index k) {
  return svd_truncate(m, k).second / static_cast<double>(k);
}

ScoreVector ridge_leverage_scores(const DenseMatrix& m, double lambda,
                                  Index sketch_rows, std::uint64_t sketch_seed) {
  if (lambda < 0.0)
    throw std::invalid_argument("ridge_leverage_scores: lambda < 0");
  if (lambda == 0.0) {
    ScoreVector out = leverage_scores(m);
    out.kind = ScoreKind::RidgeLeverage;
    out.param = 0.0;
    return out;
  }
  m.validate();
  const Mat weighted = m.weighted();
  Mat gram(m.cols(), m.cols());
  if (sketch_rows > 0 && sketch_rows < m.rows()) {
    // Gaussian row sketch of the weighted matrix before forming the Gram.
    Mat g = gaussian_matrix(sketch_rows, m.rows(), sketch_seed).data /
            std::sqrt(static_cast<double>(sketch_rows));
    Mat sk = g * weighted;
    gram.noalias() = sk.transpose() * sk;
  } else {
    gram.noalias() = weighted.transpose() * weighted;
  }
  gram.diagonal().array() += lambda;

  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ridge_leverage_scores: factorization failed");
  // tau_i = || L^{-1} a_i ||^2 via one triangular solve per row.
  Mat solved = llt.matrixL().solve(weighted.transpose());
  ScoreVector out;
  out.kind = ScoreKind::RidgeLeverage;
  out.param = lambda;
  out.values = solved.array().square().colwise().sum().transpose().matrix();
  out.values = out.values.cwiseMin(1.0).cwiseMax(0.0);
  return out;
}

ScoreVector lewis_weights(const DenseMatrix& m, double p, double tol,
                          int max_iter) {
  if (p < 1.0 || p >= 4.0)
    throw std::invalid_argument("lewis_weights: p must be in [1, 4)");
  if (tol <= 0.0) throw std::invalid_argument("lewis_weights: tol <= 0");
  SvdResult svd = thin_svd(m);
  if (svd.rank < 1)
    throw std::invalid_argument("lewis_weights: zero matrix");
  // Project onto the row space: Lewis weights are invariant under invertible
  // right-multiplication, and the projected matrix has full column rank.
  const Mat b = m.weighted() * svd.v;
  const Index n = b.rows();
  const Index r = b.cols();

  Vec row_sq = b.array().square().rowwise().sum().matrix();
  Vec w = Vec::Constant(n, static_cast<double>(r) / static_cast<double>(n));
  for (Index i = 0; i < n; ++i)
    if (row_sq[i] == 0.0) w[i] = 0.0;

  const double scale_exp = 0.5 * (1.0 - 2.0 / p);
  bool damped = false;
  double prev_delta = std::numeric_limits<double>::infinity();
  int worse_streak = 0;

  for (int it = 0; it < max_iter; ++it) {
    Mat scaled = b;
    for (Index i = 0; i < n; ++i) {
      const double f = w[i] > 0.0 ? std::pow(w[i], scale_exp) : 0.0;
      scaled.row(i) *= f;
    }
    Mat gram = scaled.transpose() * scaled;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success)
      throw LewisConvergenceError("lewis_weights: singular Gram", w);
    Mat solved = llt.matrixL().solve(b.transpose());
    Vec quad = solved.array().square().colwise().sum().transpose().matrix();

    Vec next(n);
    double delta = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double upd = row_sq[i] == 0.0
                             ? 0.0
                             : std::pow(std::max(quad[i], 0.0), 0.5 * p);
      delta = std::max(delta, std::abs(upd - w[i]));
      next[i] = damped && w[i] > 0.0 ? std::sqrt(w[i] * upd) : upd;
    }
    if (delta < tol) {
      ScoreVector out;
      out.kind = ScoreKind::LewisWeights;
      out.param = p;
      out.values = std::move(w);
      return out;
    }
    worse_streak = delta > prev_delta ? worse_streak + 1 : 0;
    if (worse_streak >= 2) damped = true;
    prev_delta = delta;
    w = std::move(next);
  }
  throw LewisConvergenceError("lewis_weights: no convergence within max_iter",
                              w);
}

}  // namespace lpcs
