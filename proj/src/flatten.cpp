#include "lpcoreset/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lpcoreset/rng.hpp"
#include "lpcoreset/scores.hpp"

namespace lpcs {

DenseMatrix sparse_embedding(Index d, Index t, Index s, std::uint64_t seed) {
  if (t < 1 || d < 1 || s < 1 || s > t)
    throw std::invalid_argument("sparse_embedding: need 1 <= s <= t");
  Mat g = Mat::Zero(t, d);
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  std::vector<Index> rows(t);
  for (Index j = 0; j < d; ++j) {
    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(j)));
    // Partial Fisher-Yates: s distinct row positions per column.
    for (Index i = 0; i < t; ++i) rows[i] = i;
    for (Index i = 0; i < s; ++i) {
      const Index pick =
          i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(t - i)));
      std::swap(rows[i], rows[pick]);
      const double sign = (rng.next() & 1) ? 1.0 : -1.0;
      g(rows[i], j) = sign * value;
    }
  }
  return DenseMatrix::from(std::move(g));
}

namespace {

Index bicriteria_sketch_dim(Index n, Index d, Index k, double delta) {
  const double logs = std::log(std::max(2.0, static_cast<double>(n) / delta));
  const Index t = static_cast<Index>(
      std::ceil(static_cast<double>(k) * logs));
  return std::min(d, std::max(k + 1, t));
}

}  // namespace

BicriteriaResult bicriteria_subspace(const DenseMatrix& m, double p, Index k,
                                     double delta, std::uint64_t seed) {
  if (p < 1.0 || p > 2.0)
    throw std::invalid_argument("bicriteria_subspace: p must lie in [1,2]");
  if (k < 1) throw std::invalid_argument("bicriteria_subspace: k < 1");
  m.validate();
  const Index n = m.rows();
  const Index d = m.cols();

  BicriteriaResult out;
  out.sketch_dim = bicriteria_sketch_dim(n, d, k, delta);
  const double logs = std::log(std::max(2.0, static_cast<double>(n) / delta));
  out.sketch_sparsity =
      std::min(out.sketch_dim, std::max<Index>(1, static_cast<Index>(std::ceil(logs))));

  const DenseMatrix embed =
      sparse_embedding(d, out.sketch_dim, out.sketch_sparsity,
                       hash_combine(seed, 0x5ecull));
  DenseMatrix sketched;
  sketched.data = m.weighted() * embed.data.transpose();
  sketched.row_weights = Vec::Ones(n);
  sketched.origin = m.origin;

  const ScoreVector lewis = lewis_weights(sketched, p, 1e-6, 300);
  const double total = lewis.values.sum();
  if (!(total > 0.0))
    throw std::runtime_error("bicriteria_subspace: degenerate Lewis weights");

  // Sample with replacement proportionally to the Lewis weights, dedup.
  const double draws_target =
      4.0 * static_cast<double>(out.sketch_dim) *
      std::log(std::max(2.0, static_cast<double>(out.sketch_dim) / delta));
  const Index draws = std::min(
      n, std::max<Index>(k, static_cast<Index>(std::ceil(draws_target))));
  Vec cumulative(n);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    acc += lewis.values[i];
    cumulative[i] = acc;
  }
  Rng rng(hash_combine(seed, 0x5a3ull));
  std::set<Index> picked;
  for (Index j = 0; j < draws; ++j) {
    const double u = rng.uniform() * total;
    const Index pos = static_cast<Index>(
        std::lower_bound(cumulative.data(), cumulative.data() + n, u) -
        cumulative.data());
    picked.insert(std::min(pos, n - 1));
  }

  out.sampled_rows.assign(picked.begin(), picked.end());
  Mat sampled(static_cast<Index>(picked.size()), d);
  Index r = 0;
  for (Index idx : picked) sampled.row(r++) = m.data.row(idx);

  Eigen::BDCSVD<Mat> svd(sampled, Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  Index rank = 0;
  const double cutoff = s.size() > 0 ? kRankCutoff * s[0] : 0.0;
  while (rank < s.size() && s[rank] > cutoff && s[rank] > 0.0) ++rank;
  if (rank < 1)
    throw std::runtime_error("bicriteria_subspace: sampled rows all zero");
  out.subspace.basis = svd.matrixV().leftCols(rank);
  out.subspace.k = rank;

  // Cost certificate. Residual components below per-row numerical
  // resolution count as zero, so exact-rank inputs certify an exact 0.
  const DenseMatrix res = residual(m, out.subspace);
  double cost = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double rnorm = res.data.row(i).norm();
    if (rnorm <= 1e-12 * m.data.row(i).norm()) continue;
    cost += std::pow(m.row_weights[i] * rnorm, p);
  }
  out.residual_cost = cost;
  return out;
}

DenseMatrix flatten(const DenseMatrix& m, const SubspaceQuery& f, double p) {
  if (p < 1.0) throw std::invalid_argument("flatten: p must be >= 1");
  const DenseMatrix res = residual(m, f);
  const Index n = m.rows();

  Vec cost(n);
  double total = 0.0;
  bool any_real = false;
  for (Index i = 0; i < n; ++i) {
    const double rnorm = res.data.row(i).norm();
    cost[i] = std::pow(m.row_weights[i] * rnorm, p);
    total += cost[i];
    if (rnorm > 1e-12 * m.data.row(i).norm()) any_real = true;
  }
  // Zero residual cost (up to per-row numerical resolution) leaves the split
  // thresholds undefined; nothing to do.
  if (!(total > 0.0) || !any_real) return m;

  const double threshold = 2.0 * total / static_cast<double>(n);
  std::vector<Index> copies(n, 1);
  Index n_out = 0;
  for (Index i = 0; i < n; ++i) {
    if (cost[i] >= threshold) {
      copies[i] = static_cast<Index>(
          std::ceil(static_cast<double>(n) * cost[i] / (2.0 * total)));
      copies[i] = std::max<Index>(1, copies[i]);
    }
    n_out += copies[i];
  }

  DenseMatrix out;
  out.data.resize(n_out, m.cols());
  out.row_weights.resize(n_out);
  out.origin.resize(n_out);
  Index r = 0;
  for (Index i = 0; i < n; ++i) {
    const double w = copies[i] == 1
                         ? m.row_weights[i]
                         : m.row_weights[i] /
                               std::pow(static_cast<double>(copies[i]), 1.0 / p);
    for (Index c = 0; c < copies[i]; ++c) {
      out.data.row(r) = m.data.row(i);
      out.row_weights[r] = w;
      out.origin[r] = m.origin[i];
      ++r;
    }
  }
  return out;
}

}  // namespace lpcs
