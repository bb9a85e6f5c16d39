#include "lpcoreset/online.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lpcoreset/rng.hpp"

namespace lpcs {

namespace {

Index online_k_eff(const SamplerConfig& cfg, Index dim, Index n_est) {
  if (cfg.p >= 2.0) return std::min(cfg.k, dim);
  const double logs =
      std::log(std::max(2.0, static_cast<double>(n_est) / cfg.delta));
  const Index k_prime =
      static_cast<Index>(std::ceil(static_cast<double>(cfg.k) * logs));
  return std::min(dim, std::max(cfg.k, k_prime));
}

}  // namespace

OnlineState::OnlineState(Index dim, SamplerConfig cfg)
    : cfg_(std::move(cfg)), dim_(dim) {
  cfg_.validate();
  if (dim_ < 1) throw std::invalid_argument("OnlineState: dim < 1");
  const Index n_est = cfg_.n_hint > 0 ? cfg_.n_hint : 1024;
  k_eff_ = online_k_eff(cfg_, dim_, n_est);
  const int rounds = cfg_.max_rounds > 0 ? cfg_.max_rounds
                                         : default_max_rounds(n_est);
  alpha_ = round_alpha(n_est, cfg_.eps / rounds, cfg_.delta, cfg_.alpha_scale);
  size_mult_ = cfg_.p > 2.0
                   ? std::pow(static_cast<double>(n_est), cfg_.p / 2.0 - 1.0)
                   : 1.0;
  // Probability floor standing in for flattening in the row-arrival setting.
  double floor_c = cfg_.floor_c;
  if (floor_c == 0.0 && cfg_.p < 2.0)
    floor_c = 10.0 * static_cast<double>(cfg_.k) / cfg_.eps;
  floor_q_ = cfg_.p < 2.0
                 ? std::min(1.0, floor_c / static_cast<double>(n_est))
                 : 0.0;
  gram_ = Mat::Zero(dim_, dim_);
  kept_.meta.cfg = cfg_;
  kept_.meta.mode = "online";
}

double OnlineState::update(const Eigen::Ref<const Vec>& row) {
  if (row.size() != dim_)
    throw std::invalid_argument("OnlineState: row dimension mismatch");

  double tau = 1.0;
  if (rows_seen_ > 0) {
    // Score against rows strictly before this one.
    const Vec& evs = eig_.eigenvalues();
    const Vec proj = eig_.eigenvectors().transpose() * row;
    const double emax = std::max(evs[dim_ - 1], 0.0);
    const double cut = kGramEvCutoff * emax;
    if (lambda_ > 0.0) {
      tau = 0.0;
      for (Index j = 0; j < dim_; ++j)
        tau += proj[j] * proj[j] / (std::max(evs[j], 0.0) + lambda_);
    } else {
      double in_range = 0.0;
      tau = 0.0;
      for (Index j = 0; j < dim_; ++j) {
        if (evs[j] > cut) {
          tau += proj[j] * proj[j] / evs[j];
          in_range += proj[j] * proj[j];
        }
      }
      const double rn = row.squaredNorm();
      if (rn > 0.0 && rn - in_range > 1e-12 * rn) tau = 1.0;  // new direction
      if (rn == 0.0) tau = 0.0;
    }
    tau = std::min(1.0, std::max(0.0, tau));
  }
  scores_.push_back(tau);

  // Full-score rows (new directions and the very first row) are kept surely:
  // nothing later can stand in for them.
  double q = tau >= 1.0
                 ? 1.0
                 : std::min(1.0, size_mult_ * std::pow(tau, cfg_.p / 2.0) /
                                     alpha_);
  q = std::max(q, floor_q_);
  const std::uint64_t seed0 = hash_combine(cfg_.seed, 0x0a11ull);
  const double u =
      row_uniform(seed0, static_cast<std::uint64_t>(rows_seen_), 0);
  if (u < q) {
    kept_.indices.push_back(rows_seen_);
    kept_.scales.push_back(q >= 1.0 ? 1.0 : std::pow(q, -1.0 / cfg_.p));
  }

  gram_.noalias() += row * row.transpose();
  trace_ += row.squaredNorm();
  rows_seen_ += 1;
  eig_.compute(gram_);
  const Vec& evs = eig_.eigenvalues();
  const double emax = std::max(evs[dim_ - 1], 0.0);
  max_eig_ = std::max(max_eig_, emax);
  if (emax > 0.0) {
    const double cut = kGramEvCutoff * emax;
    double min_pos = emax;
    for (Index j = 0; j < dim_; ++j)
      if (evs[j] > cut) {
        min_pos = evs[j];
        break;
      }
    max_pinv_sq_ = std::max(max_pinv_sq_, 1.0 / min_pos);
  }
  if (rows_seen_ % dim_ == 0 || trace_ >= 2.0 * trace_at_lambda_)
    refresh_lambda();
  return tau;
}

void OnlineState::refresh_lambda() {
  const Vec& evs = eig_.eigenvalues();  // ascending
  const double emax = std::max(evs[dim_ - 1], 0.0);
  const double cut = kGramEvCutoff * emax;
  double tail = 0.0;
  Index rank = 0;
  for (Index j = 0; j < dim_; ++j)
    if (evs[j] > cut) ++rank;
  if (rank > k_eff_) {
    for (Index j = 0; j < dim_ - k_eff_; ++j) tail += std::max(evs[j], 0.0);
  }
  lambda_ = tail / static_cast<double>(k_eff_);
  trace_at_lambda_ = trace_;
}

double OnlineState::kappa_estimate() const {
  if (max_pinv_sq_ <= 0.0) return 0.0;
  return std::sqrt(max_eig_ * max_pinv_sq_);
}

WeightedCoreset OnlineState::finish() const {
  WeightedCoreset out = kept_;
  out.meta.cfg = cfg_;
  out.meta.mode = "online";
  out.meta.dataset_rows = rows_seen_;
  return out;
}

double online_condition_number(const DenseMatrix& m) {
  m.validate();
  const Mat rows = m.weighted();
  const Index d = m.cols();
  Mat gram = Mat::Zero(d, d);
  Eigen::SelfAdjointEigenSolver<Mat> eig;
  double max_pinv_sq = 0.0;
  double final_emax = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    gram.noalias() += rows.row(i).transpose() * rows.row(i);
    eig.compute(gram, Eigen::EigenvaluesOnly);
    const Vec& evs = eig.eigenvalues();
    const double emax = std::max(evs[d - 1], 0.0);
    final_emax = emax;
    if (emax <= 0.0) continue;  // all-zero prefix
    const double cut = kGramEvCutoff * emax;
    double min_pos = emax;
    for (Index j = 0; j < d; ++j)
      if (evs[j] > cut) {
        min_pos = evs[j];
        break;
      }
    max_pinv_sq = std::max(max_pinv_sq, 1.0 / min_pos);
  }
  if (max_pinv_sq <= 0.0) return 0.0;
  return std::sqrt(final_emax * max_pinv_sq);
}

namespace {

struct StreamEntry {
  std::int64_t pos;
  double scale;
  Vec row;
};

class MergeReduceTree {
 public:
  MergeReduceTree(Index dim, const SamplerConfig& cfg, Index target)
      : dim_(dim), cfg_(cfg), target_(target),
        buffer_(std::max<Index>(2 * target, 128)) {}

  void add(StreamEntry entry) {
    pending_.push_back(std::move(entry));
    if (static_cast<Index>(pending_.size()) >= buffer_) {
      std::vector<StreamEntry> block = reduce_entries(std::move(pending_), 0);
      pending_.clear();
      push(std::move(block), 0);
    }
  }

  std::vector<StreamEntry> finish() {
    std::vector<StreamEntry> out;
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
      out.insert(out.end(), it->begin(), it->end());
      it->clear();
    }
    out.insert(out.end(), pending_.begin(), pending_.end());
    // Consolidate the fold, but never touch a stream that fit the buffer.
    if (static_cast<Index>(out.size()) > buffer_)
      out = reduce_entries(std::move(out), levels_.size());
    return out;
  }

  int reduces() const { return reduces_; }
  const std::vector<Index>& sizes() const { return reduce_sizes_; }

 private:
  void push(std::vector<StreamEntry> block, std::size_t level) {
    if (level >= levels_.size()) levels_.resize(level + 1);
    if (levels_[level].empty()) {
      levels_[level] = std::move(block);
      return;
    }
    std::vector<StreamEntry> merged = std::move(levels_[level]);
    levels_[level].clear();
    merged.insert(merged.end(), block.begin(), block.end());
    push(reduce_entries(std::move(merged), level + 1), level + 1);
  }

  std::vector<StreamEntry> reduce_entries(std::vector<StreamEntry> entries,
                                          std::size_t level) {
    if (static_cast<Index>(entries.size()) <= target_) return entries;
    DenseMatrix block;
    const Index n = static_cast<Index>(entries.size());
    block.data.resize(n, dim_);
    block.row_weights.resize(n);
    block.origin.resize(n);
    std::unordered_map<std::int64_t, Index> row_of;
    for (Index i = 0; i < n; ++i) {
      block.data.row(i) = entries[i].row;
      block.row_weights[i] = entries[i].scale;
      block.origin[i] = entries[i].pos;
      row_of.emplace(entries[i].pos, i);
    }
    SamplerConfig local = cfg_;
    // Tighten the accuracy with the logarithm of the tree depth.
    local.eps =
        cfg_.eps / std::max(1.0, std::ceil(std::log2(
                                     static_cast<double>(level) + 2.0)));
    local.target_size = target_;
    local.seed = hash_combine(hash_combine(cfg_.seed, 0x3e9ull),
                              static_cast<std::uint64_t>(reduces_));
    WeightedCoreset reduced = build_strong_coreset(block, local);
    reduces_ += 1;
    reduce_sizes_.push_back(reduced.size());

    std::vector<StreamEntry> out;
    out.reserve(reduced.indices.size());
    for (std::size_t j = 0; j < reduced.indices.size(); ++j) {
      const Index src = row_of.at(reduced.indices[j]);
      out.push_back({reduced.indices[j], reduced.scales[j], entries[src].row});
    }
    return out;
  }

  Index dim_;
  SamplerConfig cfg_;
  Index target_;
  Index buffer_;
  std::vector<StreamEntry> pending_;
  std::vector<std::vector<StreamEntry>> levels_;
  int reduces_ = 0;
  std::vector<Index> reduce_sizes_;
};

}  // namespace

WeightedCoreset stream_coreset(const RowSource& next_row, Index dim,
                               SamplerConfig cfg) {
  cfg.validate();
  if (cfg.target_size == 0)
    cfg.target_size = default_target_size(cfg.p, cfg.k, cfg.eps, cfg.target_c);
  OnlineState state(dim, cfg);
  MergeReduceTree tree(dim, cfg, cfg.target_size);

  Index last_emitted = 0;
  while (auto row = next_row()) {
    state.update(*row);
    const WeightedCoreset& kept = state.kept();
    while (last_emitted < kept.size()) {
      // The arrived row was just decided; kept rows enter the tree in order.
      tree.add({kept.indices[last_emitted], kept.scales[last_emitted], *row});
      ++last_emitted;
    }
  }

  WeightedCoreset out;
  out.meta.cfg = cfg;
  out.meta.mode = "stream";
  out.meta.dataset_rows = state.rows_seen();
  for (const StreamEntry& e : tree.finish()) {
    out.indices.push_back(e.pos);
    out.scales.push_back(e.scale);
  }
  out.meta.rounds = tree.reduces();
  out.meta.per_round_sizes = tree.sizes();
  return out;
}

namespace {

WeightedCoreset rescale_to_dataset(WeightedCoreset c, const DenseMatrix& m) {
  // Streamed rows are the weighted instance rows; rebase the scales onto the
  // stored (unweighted) dataset rows.
  for (std::size_t i = 0; i < c.indices.size(); ++i)
    c.scales[i] *= m.row_weights[c.indices[i]];
  return c;
}

}  // namespace

WeightedCoreset stream_coreset(const DenseMatrix& m, SamplerConfig cfg) {
  m.validate();
  Index next = 0;
  const Mat rows = m.weighted();
  RowSource source = [&]() -> std::optional<Vec> {
    if (next >= m.rows()) return std::nullopt;
    return Vec(rows.row(next++));
  };
  return rescale_to_dataset(stream_coreset(source, m.cols(), std::move(cfg)),
                            m);
}

WeightedCoreset online_coreset(const DenseMatrix& m, SamplerConfig cfg) {
  m.validate();
  OnlineState state(m.cols(), std::move(cfg));
  const Mat rows = m.weighted();
  for (Index i = 0; i < m.rows(); ++i) state.update(rows.row(i));
  return rescale_to_dataset(state.finish(), m);
}

}  // namespace lpcs
