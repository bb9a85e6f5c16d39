#pragma once

#include <functional>
#include <optional>

#include "lpcoreset/pipeline.hpp"

namespace lpcs {

/// Row-arrival coreset state. Every arrival gets an immediate, irrevocable
/// keep/discard decision: the score is computed against the Gram matrix and
/// regularization estimate of the rows seen strictly before it, then the
/// Gram is updated. Decisions are keyed by (seed, arrival index) so a replay
/// of the same stream reproduces the coreset bit for bit.
class OnlineState {
 public:
  OnlineState(Index dim, SamplerConfig cfg);

  /// Processes one arriving row (already weighted if the source carries
  /// weights). Returns the score tau~ used for the decision.
  double update(const Eigen::Ref<const Vec>& row);

  Index rows_seen() const { return rows_seen_; }
  double lambda_est() const { return lambda_; }
  double floor_q() const { return floor_q_; }
  const Mat& gram() const { return gram_; }
  const std::vector<double>& online_scores() const { return scores_; }
  const WeightedCoreset& kept() const { return kept_; }

  /// Running estimate of ||A||_2 * max_prefix ||A_(i)^+||_2 over the rows
  /// seen so far.
  double kappa_estimate() const;

  /// Kept rows as a coreset with metadata filled in.
  WeightedCoreset finish() const;

 private:
  void refresh_lambda();

  SamplerConfig cfg_;
  Index dim_;
  Index k_eff_;
  double alpha_;
  double floor_q_;
  double size_mult_;  // n^{p/2-1} for p > 2, else 1

  Mat gram_;
  Eigen::SelfAdjointEigenSolver<Mat> eig_;  // of gram_ before the next arrival
  double lambda_ = 0.0;
  double trace_ = 0.0;
  double trace_at_lambda_ = 0.0;
  Index rows_seen_ = 0;

  double max_pinv_sq_ = 0.0;  // max over prefixes of 1/min nonzero eigenvalue
  double max_eig_ = 0.0;

  WeightedCoreset kept_;
  std::vector<double> scores_;
};

/// kappa = ||A||_2 * max over prefixes i of ||A_(i)^+||_2, computed from the
/// exact prefix Gram spectra. All-zero prefixes contribute nothing.
double online_condition_number(const DenseMatrix& m);

using RowSource = std::function<std::optional<Vec>()>;

/// Single-pass streaming coreset: an online pass feeds a binary
/// merge-and-reduce tree. Kept rows buffer until the buffer bound is hit,
/// then the block is reduced and merged up the tree with a tightened
/// per-level accuracy. Output indices are original stream positions.
WeightedCoreset stream_coreset(const RowSource& next_row, Index dim,
                               SamplerConfig cfg);

/// Streams the weighted rows of a matrix in order.
WeightedCoreset stream_coreset(const DenseMatrix& m, SamplerConfig cfg);

/// Online pass only (no merge-and-reduce), streaming the weighted rows.
WeightedCoreset online_coreset(const DenseMatrix& m, SamplerConfig cfg);

}  // namespace lpcs
