#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace lpcs {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Singular values below kRankCutoff * sigma_max count as zero everywhere
// a pseudo-inverse or numerical rank is needed.
inline constexpr double kRankCutoff = 1e-12;

// Rank decisions made on Gram-matrix eigenvalues can only resolve singular
// value ratios down to roughly sqrt(machine eps); eigenvalues below this
// fraction of the largest count as zero on that route.
inline constexpr double kGramEvCutoff = 1e-11;

/// Dense row-major matrix with per-row weights and row provenance.
///
/// A row with weight w behaves exactly like the scaled row w*a: norms,
/// decompositions and scores fold the weight in before computing, and the
/// weight is never stored inside a factorization. `origin[i]` maps row i
/// back to the row of the dataset it was derived from, so that sampled or
/// split rows stay traceable.
struct DenseMatrix {
  Mat data;
  Vec row_weights;
  std::vector<std::int64_t> origin;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }

  /// Wraps a plain matrix with unit weights and identity provenance.
  static DenseMatrix from(Mat m);

  /// Rows scaled by their weights (a copy; the stored rows stay unscaled).
  Mat weighted() const;

  /// Throws std::invalid_argument on non-finite entries, non-positive
  /// weights, or mismatched weight/origin lengths.
  void validate() const;
};

/// Rank-k query subspace given by a column-orthonormal basis.
struct SubspaceQuery {
  Mat basis;  // d x k
  Index k = 0;

  void validate() const;  // orthonormality to 1e-10
};

struct SvdResult {
  Mat u;      // n x r
  Vec s;      // r, nonincreasing
  Mat v;      // d x r
  Index rank = 0;
};

/// Returns sum_i (w_i * ||row_i||_2)^p, i.e. the p-th power of the weighted
/// (p,2)-norm. Requires p >= 1 and finite entries.
double pq_norm(const DenseMatrix& m, double p);

/// Projects every row onto the orthogonal complement of the query subspace:
/// data <- data (I - V V^T). Weights and origin carry over unchanged.
DenseMatrix residual(const DenseMatrix& m, const SubspaceQuery& f);

/// Thin SVD of the weighted matrix, truncated at numerical rank.
SvdResult thin_svd(const DenseMatrix& m);

/// Rank-k truncated SVD plus the tail energy sum_{j>k} sigma_j^2.
/// The factors are cut at min(k, numerical rank); the tail sums the full
/// remaining spectrum. Tail energy snaps to exactly 0 when the numerical
/// rank is at most k.
std::pair<SvdResult, double> svd_truncate(const DenseMatrix& m, Index k);

/// i.i.d. standard normal matrix, deterministic per seed.
DenseMatrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

/// Orthonormalizes the columns of a d x k matrix (thin QR). Throws if the
/// input is numerically rank deficient.
Mat orthonormalize(const Mat& basis);

}  // namespace lpcs
