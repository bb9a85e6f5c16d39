#pragma once

#include <cstdint>
#include <vector>

#include "lpcoreset/sampling.hpp"

namespace lpcs {

enum class QueryTag { Random, SvdAligned, RowSpan, Adversarial };

struct TaggedQuery {
  SubspaceQuery query;
  QueryTag tag = QueryTag::Random;
};

/// Precomputed evaluator for residual costs sum_i (w_i ||a_i (I-VV^T)||)^p.
/// Matches pq_norm(residual(m, f), p) up to roundoff but avoids forming the
/// residual matrix per query.
class CostEvaluator {
 public:
  explicit CostEvaluator(const DenseMatrix& m);
  double cost(const SubspaceQuery& f, double p) const;
  Index rows() const { return data_.rows(); }

 private:
  Mat data_;
  Vec weight_sq_;
  Vec row_sqnorm_;
};

/// Mixed query suite: 40% random Gaussian frames, 20% singular-vector
/// aligned (top-k, bottom-k, and rotations between them), 20% spans of
/// random row subsets, 20% adversarial. The adversarial share hill-climbs
/// the distortion of `coreset` starting from the worst other member
/// (5 restarts x 50 accepted-if-better Gaussian perturbation steps); it
/// requires a coreset and exponent p, and is redistributed to random
/// queries when coreset == nullptr.
std::vector<TaggedQuery> query_suite(const DenseMatrix& m, Index k,
                                     Index count, std::uint64_t seed,
                                     const WeightedCoreset* coreset = nullptr,
                                     double p = 2.0);

struct DistortionReport {
  std::vector<double> ratios;   // per query; NaN when excluded
  std::vector<QueryTag> tags;
  double max_abs_dev = 0.0;     // max |ratio - 1| over included queries
  double eps = 0.0;
  bool pass = false;
  Index excluded = 0;           // queries with true cost below threshold
  Index zero_cost_failures = 0; // excluded queries with non-tiny estimates
};

/// Compares coreset cost to true cost per query. Queries whose true cost is
/// at most 1e-14 * pq_norm(m, p) are excluded from the ratio statistics and
/// instead checked for near-zero estimates.
DistortionReport distortion(const DenseMatrix& m, const WeightedCoreset& c,
                            const std::vector<TaggedQuery>& queries, double p,
                            double eps_target);

struct AffineTrial {
  double scale = 0.0;      // ||Ax||_p for the trial
  double true_cost = 0.0;  // ||Ax + b||_p^p
  double est_cost = 0.0;   // ||S(Ax + b)||_p^p
};

struct AffineReport {
  std::vector<AffineTrial> trials;
  double r_to_p = 0.0;  // R^p (0 in pure multiplicative mode)

  /// max over trials of (|est - true| - eps_add * R^p) / true.
  double mult_error(double eps_add) const;
};

/// Empirical affine-embedding check: draws directions, sweeps magnitudes
/// 2^i * R across a dyadic ladder, and records |S(Ax+b)|_p^p against
/// |Ax+b|_p^p. b = 0 runs in pure multiplicative mode.
AffineReport affine_embedding_check(const DenseMatrix& m, const Vec& b,
                                    const WeightedCoreset& c, double p,
                                    double r_bound, int trials,
                                    std::uint64_t seed);

/// E|g|^p for a standard Gaussian: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gaussian_p_moment(double p);

struct DvoretzkyReport {
  double max_dev = 0.0;  // max over trials of |ratio - 1|
  double moment = 0.0;   // the normalizing constant c_p
};

/// For random unit x and fresh Gaussian G in R^{n x k}, checks how tightly
/// ||Gx||_p^p / (c_p n) concentrates around 1.
DvoretzkyReport dvoretzky_check(Index n, Index k, double p, int trials,
                                std::uint64_t seed);

struct CollapseReport {
  double fail_rate = 0.0;
  int trials = 0;
  double delta = 0.0;
};

/// Frequency with which the two-sided bound
///   delta ||Xg||_p^p <= c_hi ||X||_{p,2}^p  and
///   ||X||_{p,2}^p <= (c_lo / delta^p) ||Xg||_p^p
/// holds for Gaussian g; the failure rate should stay near delta.
CollapseReport gaussian_collapse_check(const DenseMatrix& m, double p,
                                       double delta, int trials,
                                       std::uint64_t seed, double c_lo = 1.0,
                                       double c_hi = 1.0);

/// Small-instance optimum oracle: returns the lowest found value of
/// sum_i (w_i ||a_i (I-P_F)||)^p over rank-k subspaces. For k = 1 and
/// d <= 3 a dense unit-sphere grid (1e-3 radians) plus local polish;
/// otherwise iteratively reweighted PCA descent from an SVD start plus
/// `starts` random starts, keeping only improving steps.
double brute_force_opt(const DenseMatrix& m, double p, Index k,
                       int starts = 50, std::uint64_t seed = 7);

struct DominationReport {
  bool holds = true;
  double worst_margin = 0.0;   // min over (i,F) of tau_i * den / num
  Index checked = 0;
};

/// Checks tau_i^lambda >= (1/48) ||a_i (I-P_F)||^2 / ||A (I-P_F)||_F^2 for
/// every row over a suite of random rank-k queries, with
/// lambda = ridge_lambda(m, k). worst_margin reports the smallest observed
/// ratio of score to sensitivity (>= 1/48 when the bound holds).
DominationReport sensitivity_domination_check(const DenseMatrix& m, Index k,
                                              Index num_queries,
                                              std::uint64_t seed);

}  // namespace lpcs
