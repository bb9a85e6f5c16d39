#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpcoreset/scores.hpp"

namespace lpcs {

/// Thrown when a construction cannot make progress (e.g. every retry of a
/// sampling round came back empty).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  double p = 2.0;
  Index k = 1;
  double eps = 0.5;
  double delta = 0.1;
  double alpha_scale = 1.0;  // multiplier on the per-round oversampling alpha
  std::uint64_t seed = 0;
  int max_rounds = 0;      // 0 = ceil(log2 log2 n) + 2
  Index target_size = 0;   // 0 = 10 * k^max(1,p/2) * eps^-max(4/p,p)
  double target_c = 10.0;  // constant in the default target size

  // eps/(r*log(n/(eps*delta)))^p per-round schedule instead of eps/r.
  bool polylog_round_eps = false;
  // Scale a round's keep probabilities up whenever the expected kept count
  // would fall below 0.75 * target_size: shrinking past the stop size buys
  // nothing and costs accuracy.
  bool floor_to_target = true;
  // For p<2, use rank of the bicriteria subspace as the regularization rank
  // instead of ceil(k*log(n/delta)).
  bool bicriteria_rank_as_keff = false;

  // Row-arrival settings. n_hint is the expected stream length; floor_c
  // controls the probability floor min(1, floor_c/n_hint) that stands in
  // for flattening when p < 2 (0 = auto).
  Index n_hint = 0;
  double floor_c = 0.0;

  void validate() const;
};

struct CoresetMeta {
  SamplerConfig cfg;
  int rounds = 0;
  std::vector<Index> per_round_sizes;
  std::vector<double> lambda_per_round;
  std::string mode = "offline";
  Index dataset_rows = 0;
  std::string dataset_hash;  // optional; set by the CLI
};

/// Weighted row subset. `indices[i]` is an original-dataset row (duplicates
/// are allowed when flattening split a row) and `scales[i]` is the
/// accumulated multiplier, so the materialized coreset row is exactly
/// scales[i] * original_row(indices[i]).
struct WeightedCoreset {
  std::vector<std::int64_t> indices;
  std::vector<double> scales;
  CoresetMeta meta;

  Index size() const { return static_cast<Index>(indices.size()); }
};

Index default_target_size(double p, Index k, double eps, double c = 10.0);
int default_max_rounds(Index n);
double round_alpha(Index n, double round_eps, double delta, double alpha_scale);

/// Desk-scale alpha_scale presets, calibrated so that one round at
/// n ~ 2000, eps = 0.5 lands near the default target size. The literal
/// formula with alpha_scale = 1 keeps essentially every row at this scale.
double practical_alpha_scale(double p);

/// Converts ridge leverage scores into keep probabilities
///   q_i = min(1, m * tau_i^{p/2} / alpha),  m = n^{p/2-1} if p > 2 else 1.
ScoreVector sampling_probabilities(const ScoreVector& scores, double p,
                                   Index n, double alpha);

/// Keeps each row independently with probability q_i at scale
/// row_weight / q_i^{1/p}; rows with q_i = 1 keep their weight exactly.
/// Decisions are keyed by (seed, origin row, copy ordinal) so replay is
/// order- and thread-independent.
WeightedCoreset lp_sample(const DenseMatrix& m, const ScoreVector& probs,
                          double p, std::uint64_t seed);

struct RoundResult {
  WeightedCoreset kept;
  DenseMatrix sampled;
  double lambda = 0.0;
  double alpha = 0.0;
  bool degenerate = false;  // sampled size >= input size: no reduction
};

/// One round of root ridge leverage score sampling: computes
/// lambda = ridge_lambda(m, k_eff), the ridge scores, the oversampling
/// parameter alpha, the keep probabilities, and samples. Returns the kept
/// fragment plus the sampled matrix (origin and accumulated weights carried
/// through) for the next round.
RoundResult one_round(const DenseMatrix& m, const SamplerConfig& cfg,
                      Index k_eff, double round_eps, int round_index,
                      std::uint64_t salt = 0);

/// Rebuilds the coreset rows against the original dataset: row i of the
/// result is original.data.row(indices[i]) with weight scales[i].
DenseMatrix materialize(const WeightedCoreset& c, const DenseMatrix& original);

}  // namespace lpcs
