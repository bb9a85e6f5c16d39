#include "lpcoreset/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "lpcoreset/rng.hpp"

namespace lpcs {

namespace {

Index resolve_k_eff(const DenseMatrix& m, const SamplerConfig& cfg,
                    Index bicriteria_rank) {
  if (cfg.p >= 2.0) return cfg.k;
  if (cfg.bicriteria_rank_as_keff && bicriteria_rank > 0)
    return bicriteria_rank;
  const double logs = std::log(
      std::max(2.0, static_cast<double>(m.rows()) / cfg.delta));
  const Index k_prime = static_cast<Index>(
      std::ceil(static_cast<double>(cfg.k) * logs));
  return std::min(std::min(m.rows(), m.cols()), std::max(cfg.k, k_prime));
}

double resolve_round_eps(const SamplerConfig& cfg, Index n, int rounds) {
  if (!cfg.polylog_round_eps) return cfg.eps / std::max(1, rounds);
  const double logterm = std::log(
      std::max(2.0, static_cast<double>(n) / (cfg.eps * cfg.delta)));
  return cfg.eps / std::pow(std::max(1, rounds) * logterm, cfg.p);
}

WeightedCoreset all_rows_coreset(const DenseMatrix& m) {
  WeightedCoreset c;
  c.indices.assign(m.origin.begin(), m.origin.end());
  c.scales.assign(m.row_weights.data(), m.row_weights.data() + m.rows());
  return c;
}

}  // namespace

WeightedCoreset build_strong_coreset(const DenseMatrix& m, SamplerConfig cfg) {
  cfg.validate();
  m.validate();
  if (cfg.target_size == 0)
    cfg.target_size = default_target_size(cfg.p, cfg.k, cfg.eps, cfg.target_c);
  if (cfg.max_rounds == 0) cfg.max_rounds = default_max_rounds(m.rows());

  CoresetMeta meta;
  meta.cfg = cfg;
  meta.mode = "offline";
  meta.dataset_rows = m.rows();

  if (m.rows() <= cfg.target_size) {
    WeightedCoreset c = all_rows_coreset(m);
    c.meta = meta;
    return c;
  }

  DenseMatrix working = m;
  Index bicriteria_rank = 0;
  if (cfg.p < 2.0) {
    const BicriteriaResult bic = bicriteria_subspace(
        m, cfg.p, cfg.k, cfg.delta, hash_combine(cfg.seed, 0xb1cull));
    working = flatten(working, bic.subspace, cfg.p);
    bicriteria_rank = bic.subspace.k;
  }
  const Index k_eff = resolve_k_eff(working, cfg, bicriteria_rank);
  const double round_eps = resolve_round_eps(cfg, m.rows(), cfg.max_rounds);

  for (int round = 0; round < cfg.max_rounds; ++round) {
    if (working.rows() <= cfg.target_size) break;
    RoundResult rr;
    bool got_rows = false;
    for (std::uint64_t salt = 0; salt <= 3; ++salt) {
      rr = one_round(working, cfg, k_eff, round_eps, round, salt);
      if (rr.kept.size() > 0) {
        got_rows = true;
        break;
      }
    }
    if (!got_rows)
      throw ConstructionError(
          "build_strong_coreset: sampling round kept no rows after retries");
    if (rr.degenerate) break;  // no reduction this round: stop recursing
    working = std::move(rr.sampled);
    meta.rounds += 1;
    meta.per_round_sizes.push_back(working.rows());
    meta.lambda_per_round.push_back(rr.lambda);
  }

  WeightedCoreset c = all_rows_coreset(working);
  c.meta = std::move(meta);
  return c;
}

WeightedCoreset merge(const WeightedCoreset& c1, const WeightedCoreset& c2) {
  if (c1.size() == 0) {
    WeightedCoreset out = c2;
    return out;
  }
  if (c2.size() == 0) {
    WeightedCoreset out = c1;
    return out;
  }
  if (c1.meta.cfg.p != c2.meta.cfg.p)
    throw std::invalid_argument("merge: mismatched p");
  if (c1.meta.dataset_rows != c2.meta.dataset_rows ||
      (!c1.meta.dataset_hash.empty() && !c2.meta.dataset_hash.empty() &&
       c1.meta.dataset_hash != c2.meta.dataset_hash))
    throw std::invalid_argument("merge: coresets from different datasets");
  WeightedCoreset out = c1;
  out.indices.insert(out.indices.end(), c2.indices.begin(), c2.indices.end());
  out.scales.insert(out.scales.end(), c2.scales.begin(), c2.scales.end());
  return out;
}

WeightedCoreset reduce(const DenseMatrix& original, const WeightedCoreset& c,
                       SamplerConfig cfg) {
  cfg.validate();
  if (cfg.target_size == 0)
    cfg.target_size = default_target_size(cfg.p, cfg.k, cfg.eps, cfg.target_c);
  if (c.size() <= cfg.target_size) return c;
  const DenseMatrix mat = materialize(c, original);
  WeightedCoreset out = build_strong_coreset(mat, cfg);
  out.meta.dataset_rows = c.meta.dataset_rows;
  out.meta.dataset_hash = c.meta.dataset_hash;
  out.meta.mode = c.meta.mode;
  return out;
}

}  // namespace lpcs
