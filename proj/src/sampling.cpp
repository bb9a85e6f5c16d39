#include "lpcoreset/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lpcoreset/rng.hpp"

namespace lpcs {

void SamplerConfig::validate() const {
  if (p < 1.0) throw std::invalid_argument("SamplerConfig: p must be >= 1");
  if (k < 1) throw std::invalid_argument("SamplerConfig: k must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("SamplerConfig: eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("SamplerConfig: delta must lie in (0,1)");
  if (alpha_scale <= 0.0)
    throw std::invalid_argument("SamplerConfig: alpha_scale must be > 0");
  if (target_size < 0 || max_rounds < 0 || n_hint < 0 || floor_c < 0.0)
    throw std::invalid_argument("SamplerConfig: negative parameter");
}

Index default_target_size(double p, Index k, double eps, double c) {
  const double kpow = std::pow(static_cast<double>(k), std::max(1.0, p / 2.0));
  const double epow = std::pow(eps, -std::max(4.0 / p, p));
  return static_cast<Index>(std::ceil(c * kpow * epow));
}

int default_max_rounds(Index n) {
  const double loglog =
      std::log2(std::max(2.0, std::log2(std::max<double>(4.0, n))));
  return static_cast<int>(std::ceil(loglog)) + 2;
}

double round_alpha(Index n, double round_eps, double delta,
                   double alpha_scale) {
  const double ln_n = std::log(std::max<double>(2, n));
  return alpha_scale * round_eps * round_eps /
         (ln_n * ln_n * ln_n + std::log(1.0 / delta));
}

double practical_alpha_scale(double p) {
  // Calibrated against the default synthetic suite (n ~ 2000, eps = 0.5) so
  // one sampling round lands near the default target size. The literal
  // formula at alpha_scale = 1 keeps essentially every row at this scale.
  if (p < 1.25) return 4.5e4;
  if (p < 2.25) return 1.6e4;
  return 3.0e3;
}

ScoreVector sampling_probabilities(const ScoreVector& scores, double p,
                                   Index n, double alpha) {
  if (alpha <= 0.0)
    throw std::invalid_argument("sampling_probabilities: alpha must be > 0");
  if (scores.kind != ScoreKind::RidgeLeverage)
    throw std::invalid_argument(
        "sampling_probabilities: expects ridge leverage scores");
  const double mult =
      p > 2.0 ? std::pow(static_cast<double>(n), p / 2.0 - 1.0) : 1.0;
  ScoreVector out;
  out.kind = ScoreKind::Probability;
  out.values.resize(scores.size());
  for (Index i = 0; i < scores.size(); ++i) {
    const double tau = std::max(scores.values[i], 0.0);
    out.values[i] = std::min(1.0, mult * std::pow(tau, p / 2.0) / alpha);
  }
  return out;
}

namespace {

struct KeptRow {
  Index position;
  double weight;
};

std::vector<KeptRow> sample_rows(const DenseMatrix& m, const ScoreVector& probs,
                                 double p, std::uint64_t seed) {
  if (probs.kind != ScoreKind::Probability)
    throw std::invalid_argument("lp_sample: expects probabilities");
  if (probs.size() != m.rows())
    throw std::invalid_argument("lp_sample: length mismatch");
  std::vector<KeptRow> kept;
  std::unordered_map<std::int64_t, std::uint64_t> copies;
  for (Index i = 0; i < m.rows(); ++i) {
    const double q = probs.values[i];
    const std::uint64_t ordinal = copies[m.origin[i]]++;
    const double u = row_uniform(seed, static_cast<std::uint64_t>(m.origin[i]),
                                 ordinal);
    if (u < q) {
      const double scale = q >= 1.0 ? 1.0 : std::pow(q, -1.0 / p);
      kept.push_back({i, m.row_weights[i] * scale});
    }
  }
  return kept;
}

}  // namespace

WeightedCoreset lp_sample(const DenseMatrix& m, const ScoreVector& probs,
                          double p, std::uint64_t seed) {
  WeightedCoreset out;
  for (const KeptRow& row : sample_rows(m, probs, p, seed)) {
    out.indices.push_back(m.origin[row.position]);
    out.scales.push_back(row.weight);
  }
  out.meta.cfg.p = p;
  out.meta.cfg.seed = seed;
  return out;
}

RoundResult one_round(const DenseMatrix& m, const SamplerConfig& cfg,
                      Index k_eff, double round_eps, int round_index,
                      std::uint64_t salt) {
  RoundResult rr;
  const Index n = m.rows();
  const Index kk = std::max<Index>(1, std::min(k_eff, std::min(n, m.cols())));
  rr.lambda = ridge_lambda(m, kk);
  const ScoreVector scores = ridge_leverage_scores(m, rr.lambda);
  rr.alpha = round_alpha(n, round_eps, cfg.delta, cfg.alpha_scale);
  ScoreVector probs = sampling_probabilities(scores, cfg.p, n, rr.alpha);
  if (cfg.floor_to_target && cfg.target_size > 0) {
    const double floor_count = 0.75 * static_cast<double>(cfg.target_size);
    const double expected = probs.values.sum();
    if (expected > 0.0 && expected < floor_count) {
      const double boost = floor_count / expected;
      for (Index i = 0; i < probs.size(); ++i)
        probs.values[i] = std::min(1.0, probs.values[i] * boost);
    }
  }

  const std::uint64_t seed = hash_combine(
      hash_combine(cfg.seed, static_cast<std::uint64_t>(round_index)), salt);
  const auto kept = sample_rows(m, probs, cfg.p, seed);

  rr.sampled.data.resize(static_cast<Index>(kept.size()), m.cols());
  rr.sampled.row_weights.resize(static_cast<Index>(kept.size()));
  rr.sampled.origin.resize(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    rr.sampled.data.row(static_cast<Index>(j)) = m.data.row(kept[j].position);
    rr.sampled.row_weights[static_cast<Index>(j)] = kept[j].weight;
    rr.sampled.origin[j] = m.origin[kept[j].position];
    rr.kept.indices.push_back(m.origin[kept[j].position]);
    rr.kept.scales.push_back(kept[j].weight);
  }
  rr.kept.meta.cfg = cfg;
  rr.degenerate = static_cast<Index>(kept.size()) >= n;
  return rr;
}

DenseMatrix materialize(const WeightedCoreset& c, const DenseMatrix& original) {
  DenseMatrix out;
  const Index n = c.size();
  if (n == 0) throw std::invalid_argument("materialize: empty coreset");
  out.data.resize(n, original.cols());
  out.row_weights.resize(n);
  out.origin.resize(n);
  for (Index i = 0; i < n; ++i) {
    const std::int64_t idx = c.indices[i];
    if (idx < 0 || idx >= original.rows())
      throw std::invalid_argument("materialize: index out of range");
    if (!(c.scales[i] > 0.0))
      throw std::invalid_argument("materialize: non-positive scale");
    out.data.row(i) = original.data.row(idx);
    out.row_weights[i] = c.scales[i];
    out.origin[i] = idx;
  }
  return out;
}

}  // namespace lpcs
