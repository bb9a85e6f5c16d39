#pragma once

#include <stdexcept>
#include <string>

#include "lpcoreset/core.hpp"

namespace lpcs {

enum class ScoreKind { Leverage, RidgeLeverage, LewisWeights, Probability };

/// Per-row nonnegative scores aligned with a matrix's rows. `param` carries
/// the regularization lambda for RidgeLeverage and the exponent p for
/// LewisWeights; it is unused otherwise.
struct ScoreVector {
  Vec values;
  ScoreKind kind = ScoreKind::Leverage;
  double param = 0.0;

  Index size() const { return values.size(); }
};

/// Thrown when the Lewis weight fixed-point iteration fails to reach the
/// requested tolerance; carries the last iterate for inspection.
class LewisConvergenceError : public std::runtime_error {
 public:
  LewisConvergenceError(const std::string& what, Vec last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  Vec last_iterate;
};

/// Classical leverage scores tau_i = a_i^T (A^T A)^+ a_i of the weighted
/// matrix, computed through a thin SVD. Values lie in [0,1] and sum to the
/// numerical rank.
ScoreVector leverage_scores(const DenseMatrix& m);

/// Regularization lambda = (rank-k tail energy) / k. Exactly zero when the
/// numerical rank is at most k.
double ridge_lambda(const DenseMatrix& m, Index k);

/// Ridge leverage scores tau_i = a_i^T (A^T A + lambda I)^{-1} a_i of the
/// weighted matrix. lambda = 0 falls back to the pseudo-inverse leverage
/// route. With lambda = ridge_lambda(m, k) the scores sum to at most 2k.
///
/// sketch_rows > 0 replaces the exact Gram by the Gram of a Gaussian row
/// sketch of that many rows (scores stay correct up to the sketch
/// distortion; the default is exact).
ScoreVector ridge_leverage_scores(const DenseMatrix& m, double lambda,
                                  Index sketch_rows = 0,
                                  std::uint64_t sketch_seed = 0);

/// lp Lewis weights for p in [1, 4): the fixed point of
///   w_i <- (a_i^T (A^T W^{1-2/p} A)^{-1} a_i)^{p/2}.
/// Rank-deficient inputs are first projected onto their row space. Plain
/// fixed-point iteration from the uniform start; a damped (geometric mean)
/// update kicks in only if the iteration oscillates.
ScoreVector lewis_weights(const DenseMatrix& m, double p, double tol = 1e-8,
                          int max_iter = 200);

}  // namespace lpcs
