#include "lpcoreset/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpcoreset/rng.hpp"
#include "lpcoreset/scores.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lpcs {

CostEvaluator::CostEvaluator(const DenseMatrix& m) {
  m.validate();
  data_ = m.data;
  weight_sq_ = m.row_weights.array().square().matrix();
  row_sqnorm_ = data_.array().square().rowwise().sum().matrix();
}

double CostEvaluator::cost(const SubspaceQuery& f, double p) const {
  const Mat proj = data_ * f.basis;
  double total = 0.0;
  for (Index i = 0; i < data_.rows(); ++i) {
    const double res2 =
        std::max(row_sqnorm_[i] - proj.row(i).squaredNorm(), 0.0);
    total += std::pow(weight_sq_[i] * res2, 0.5 * p);
  }
  return total;
}

namespace {

// Builds an orthonormal d x k frame from candidate columns, completing with
// Gaussian draws when the candidates do not span k directions.
Mat complete_frame(const Mat& candidates, Index d, Index k, Rng& rng) {
  std::vector<Vec> cols;
  cols.reserve(k);
  auto try_add = [&](Vec v) {
    const double original = v.norm();
    if (!(original > 0.0)) return;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& c : cols) v -= c.dot(v) * c;
    const double nrm = v.norm();
    if (nrm > 1e-8 * original) cols.push_back(v / nrm);
  };
  for (Index j = 0; j < candidates.cols() && static_cast<Index>(cols.size()) < k;
       ++j)
    try_add(candidates.col(j));
  int guard = 0;
  while (static_cast<Index>(cols.size()) < k && guard++ < 1000) {
    Vec g(d);
    for (Index i = 0; i < d; ++i) g[i] = rng.normal();
    try_add(std::move(g));
  }
  if (static_cast<Index>(cols.size()) < k)
    throw std::runtime_error("complete_frame: could not build a frame");
  Mat out(d, k);
  for (Index j = 0; j < k; ++j) out.col(j) = cols[j];
  return out;
}

SubspaceQuery random_frame(Index d, Index k, Rng& rng) {
  Mat g(d, k);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < k; ++j) g(i, j) = rng.normal();
  SubspaceQuery q;
  q.basis = complete_frame(g, d, k, rng);
  q.k = k;
  return q;
}

double query_dev(const CostEvaluator& truth, const CostEvaluator& est,
                 const SubspaceQuery& q, double p, double exclude_below) {
  const double t = truth.cost(q, p);
  if (t <= exclude_below) return 0.0;
  return std::abs(est.cost(q, p) / t - 1.0);
}

}  // namespace

std::vector<TaggedQuery> query_suite(const DenseMatrix& m, Index k,
                                     Index count, std::uint64_t seed,
                                     const WeightedCoreset* coreset, double p) {
  m.validate();
  const Index d = m.cols();
  if (k < 1 || k > d) throw std::invalid_argument("query_suite: bad k");
  if (count < 1) throw std::invalid_argument("query_suite: bad count");

  Index n_adv = coreset != nullptr ? count / 5 : 0;
  const Index n_svd = count / 5;
  const Index n_row = count / 5;
  const Index n_rand = count - n_adv - n_svd - n_row;

  std::vector<TaggedQuery> suite;
  suite.reserve(count);

  for (Index i = 0; i < n_rand; ++i) {
    Rng rng(hash_combine(hash_combine(seed, 0x01ull), static_cast<std::uint64_t>(i)));
    suite.push_back({random_frame(d, k, rng), QueryTag::Random});
  }

  // Singular-vector aligned: top-k, bottom-k, and rotations between them.
  if (n_svd > 0) {
    const SvdResult svd = thin_svd(m);
    Rng rng(hash_combine(seed, 0x02ull));
    const Index r = svd.rank;
    Mat top = complete_frame(svd.v.leftCols(std::min(k, r)), d, k, rng);
    Mat bottom = complete_frame(
        svd.v.rightCols(std::min(k, std::max<Index>(r - k, 1))), d, k, rng);
    for (Index i = 0; i < n_svd; ++i) {
      SubspaceQuery q;
      q.k = k;
      if (i == 0) {
        q.basis = top;
      } else if (i == 1) {
        q.basis = bottom;
      } else {
        const double theta = 1.5707963267948966 * static_cast<double>(i - 1) /
                             static_cast<double>(std::max<Index>(n_svd - 1, 2));
        Mat mixed = std::cos(theta) * top + std::sin(theta) * bottom;
        q.basis = complete_frame(mixed, d, k, rng);
      }
      suite.push_back({std::move(q), QueryTag::SvdAligned});
    }
  }

  for (Index i = 0; i < n_row; ++i) {
    Rng rng(hash_combine(hash_combine(seed, 0x03ull), static_cast<std::uint64_t>(i)));
    Mat cand(d, k);
    for (Index j = 0; j < k; ++j) {
      const Index pick = static_cast<Index>(
          rng.below(static_cast<std::uint64_t>(m.rows())));
      cand.col(j) = m.data.row(pick).transpose();
    }
    SubspaceQuery q;
    q.basis = complete_frame(cand, d, k, rng);
    q.k = k;
    suite.push_back({std::move(q), QueryTag::RowSpan});
  }

  if (n_adv > 0) {
    const CostEvaluator truth(m);
    const CostEvaluator est(materialize(*coreset, m));
    const double exclude_below = 1e-14 * pq_norm(m, p);

    Index worst = 0;
    double worst_dev = -1.0;
    for (Index i = 0; i < static_cast<Index>(suite.size()); ++i) {
      const double dev =
          query_dev(truth, est, suite[i].query, p, exclude_below);
      if (dev > worst_dev) {
        worst_dev = dev;
        worst = i;
      }
    }

    // Hill climb with Gaussian basis perturbations, keeping improving steps.
    constexpr int kRestarts = 5;
    constexpr int kSteps = 50;
    constexpr double kStepSigma = 0.05;
    std::vector<SubspaceQuery> found;
    for (int restart = 0; restart < kRestarts; ++restart) {
      Rng rng(hash_combine(hash_combine(seed, 0x04ull),
                           static_cast<std::uint64_t>(restart)));
      SubspaceQuery cur = suite[worst].query;
      double cur_dev = worst_dev;
      for (int step = 0; step < kSteps; ++step) {
        Mat perturbed = cur.basis;
        for (Index i = 0; i < d; ++i)
          for (Index j = 0; j < k; ++j)
            perturbed(i, j) += kStepSigma * rng.normal();
        SubspaceQuery cand;
        cand.basis = complete_frame(perturbed, d, k, rng);
        cand.k = k;
        const double dev = query_dev(truth, est, cand, p, exclude_below);
        if (dev > cur_dev) {
          cur = std::move(cand);
          cur_dev = dev;
          found.push_back(cur);
        }
      }
      found.push_back(cur);  // per-restart best, never worse than the start
    }
    Rng pad_rng(hash_combine(seed, 0x05ull));
    for (Index i = 0; i < n_adv; ++i) {
      if (i < static_cast<Index>(found.size())) {
        suite.push_back({found[found.size() - 1 - i], QueryTag::Adversarial});
      } else {
        // Quota exceeds climb output: pad with perturbations of the best.
        Mat perturbed = found.back().basis;
        for (Index r = 0; r < d; ++r)
          for (Index j = 0; j < k; ++j)
            perturbed(r, j) += kStepSigma * pad_rng.normal();
        SubspaceQuery q;
        q.basis = complete_frame(perturbed, d, k, pad_rng);
        q.k = k;
        suite.push_back({std::move(q), QueryTag::Adversarial});
      }
    }
  }
  return suite;
}

DistortionReport distortion(const DenseMatrix& m, const WeightedCoreset& c,
                            const std::vector<TaggedQuery>& queries, double p,
                            double eps_target) {
  const CostEvaluator truth(m);
  const CostEvaluator est(materialize(c, m));
  const double total = pq_norm(m, p);
  const double exclude_below = 1e-14 * total;
  const double zero_tol = 1e-9 * total;

  DistortionReport report;
  report.eps = eps_target;
  const Index nq = static_cast<Index>(queries.size());
  report.ratios.assign(nq, std::numeric_limits<double>::quiet_NaN());
  report.tags.resize(nq);
  std::vector<double> trues(nq), ests(nq);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Index i = 0; i < nq; ++i) {
    trues[i] = truth.cost(queries[i].query, p);
    ests[i] = est.cost(queries[i].query, p);
  }

  for (Index i = 0; i < nq; ++i) {
    report.tags[i] = queries[i].tag;
    if (trues[i] <= exclude_below) {
      report.excluded += 1;
      if (ests[i] > zero_tol) report.zero_cost_failures += 1;
      continue;
    }
    report.ratios[i] = ests[i] / trues[i];
    report.max_abs_dev =
        std::max(report.max_abs_dev, std::abs(report.ratios[i] - 1.0));
  }
  report.pass =
      report.max_abs_dev <= eps_target && report.zero_cost_failures == 0;
  return report;
}

double AffineReport::mult_error(double eps_add) const {
  double worst = 0.0;
  for (const AffineTrial& t : trials) {
    if (t.true_cost <= 0.0) continue;
    const double dev =
        std::abs(t.est_cost - t.true_cost) - eps_add * r_to_p;
    worst = std::max(worst, dev / t.true_cost);
  }
  return worst;
}

AffineReport affine_embedding_check(const DenseMatrix& m, const Vec& b,
                                    const WeightedCoreset& c, double p,
                                    double r_bound, int trials,
                                    std::uint64_t seed) {
  m.validate();
  if (b.size() != 0 && b.size() != m.rows())
    throw std::invalid_argument("affine_embedding_check: bad b length");
  const Mat rows = m.weighted();
  const Index n = m.rows();
  const bool affine = b.size() != 0 && b.cwiseAbs().maxCoeff() > 0.0;

  double b_norm_p = 0.0;
  if (affine)
    for (Index i = 0; i < n; ++i) b_norm_p += std::pow(std::abs(b[i]), p);
  if (affine && std::pow(r_bound, p) < b_norm_p)
    throw std::invalid_argument("affine_embedding_check: R below ||b||_p");

  AffineReport report;
  report.r_to_p = affine ? std::pow(r_bound, p) : 0.0;
  const double r0 = affine ? r_bound : 1.0;
  constexpr int kLevels = 12;

  Rng rng(hash_combine(seed, 0xaffull));
  for (int t = 0; t < trials; ++t) {
    Vec dir(m.cols());
    double y_norm_p = 0.0;
    Vec y;
    for (int attempt = 0; attempt < 16; ++attempt) {
      for (Index j = 0; j < m.cols(); ++j) dir[j] = rng.normal();
      y = rows * dir;
      y_norm_p = 0.0;
      for (Index i = 0; i < n; ++i) y_norm_p += std::pow(std::abs(y[i]), p);
      if (y_norm_p > 0.0) break;
    }
    if (y_norm_p <= 0.0) continue;  // zero matrix: nothing to scale

    const double target = r0 * std::pow(2.0, t % kLevels);
    y *= target / std::pow(y_norm_p, 1.0 / p);

    AffineTrial trial;
    trial.scale = target;
    for (Index i = 0; i < n; ++i) {
      const double v = y[i] + (affine ? b[i] : 0.0);
      trial.true_cost += std::pow(std::abs(v), p);
    }
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
      const Index idx = static_cast<Index>(c.indices[j]);
      const double diag = c.scales[j] / m.row_weights[idx];
      const double v = y[idx] + (affine ? b[idx] : 0.0);
      trial.est_cost += std::pow(diag * std::abs(v), p);
    }
    report.trials.push_back(trial);
  }
  return report;
}

double gaussian_p_moment(double p) {
  return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) /
         std::sqrt(3.14159265358979323846);
}

DvoretzkyReport dvoretzky_check(Index n, Index k, double p, int trials,
                                std::uint64_t seed) {
  if (n < k || k < 1) throw std::invalid_argument("dvoretzky_check: n < k");
  DvoretzkyReport report;
  report.moment = gaussian_p_moment(p);
  for (int t = 0; t < trials; ++t) {
    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(t)));
    Vec x(k);
    for (Index j = 0; j < k; ++j) x[j] = rng.normal();
    x.normalize();
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      double dot = 0.0;
      for (Index j = 0; j < k; ++j) dot += rng.normal() * x[j];
      sum += std::pow(std::abs(dot), p);
    }
    const double ratio = sum / (report.moment * static_cast<double>(n));
    report.max_dev = std::max(report.max_dev, std::abs(ratio - 1.0));
  }
  return report;
}

CollapseReport gaussian_collapse_check(const DenseMatrix& m, double p,
                                       double delta, int trials,
                                       std::uint64_t seed, double c_lo,
                                       double c_hi) {
  m.validate();
  if (trials < 1) throw std::invalid_argument("gaussian_collapse_check: trials");
  const Mat rows = m.weighted();
  const double norm_p = pq_norm(m, p);
  CollapseReport report;
  report.trials = trials;
  report.delta = delta;
  int fails = 0;
  Rng rng(hash_combine(seed, 0xc0ull));
  Vec g(m.cols());
  for (int t = 0; t < trials; ++t) {
    for (Index j = 0; j < m.cols(); ++j) g[j] = rng.normal();
    const Vec y = rows * g;
    double v = 0.0;
    for (Index i = 0; i < m.rows(); ++i) v += std::pow(std::abs(y[i]), p);
    const bool upper = delta * v <= c_hi * norm_p;
    const bool lower = norm_p <= c_lo * v / std::pow(delta, p);
    if (!(upper && lower)) ++fails;
  }
  report.fail_rate = static_cast<double>(fails) / trials;
  return report;
}

namespace {

double subspace_cost(const Mat& rows, const Vec& row_sqnorm, const Mat& basis,
                     double p) {
  const Mat proj = rows * basis;
  double total = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const double res2 =
        std::max(row_sqnorm[i] - proj.row(i).squaredNorm(), 0.0);
    total += std::pow(res2, 0.5 * p);
  }
  return total;
}

double direction_cost(const Mat& rows, const Vec& row_sqnorm, const Vec& v,
                      double p) {
  const Vec proj = rows * v;
  double total = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const double res2 = std::max(row_sqnorm[i] - proj[i] * proj[i], 0.0);
    total += std::pow(res2, 0.5 * p);
  }
  return total;
}

// Iteratively reweighted PCA descent; keeps only improving steps.
double irls_descent(const Mat& rows, const Vec& row_sqnorm, Mat basis,
                    double p, double* best_cost_io) {
  const Index n = rows.rows();
  const double scale = row_sqnorm.mean() + 1e-300;
  double mu = 1e-6 * scale;
  const double mu_min = 1e-15 * scale;
  double cur = subspace_cost(rows, row_sqnorm, basis, p);
  Eigen::SelfAdjointEigenSolver<Mat> eig;
  for (int it = 0; it < 150; ++it) {
    Mat weighted_rows = rows;
    const Mat proj = rows * basis;
    for (Index i = 0; i < n; ++i) {
      const double res2 =
          std::max(row_sqnorm[i] - proj.row(i).squaredNorm(), 0.0);
      weighted_rows.row(i) *= std::sqrt(std::pow(res2 + mu, 0.5 * p - 1.0));
    }
    eig.compute(weighted_rows.transpose() * weighted_rows);
    const Mat cand = eig.eigenvectors().rightCols(basis.cols());
    const double cand_cost = subspace_cost(rows, row_sqnorm, cand, p);
    if (cand_cost < cur * (1.0 - 1e-12)) {
      const double gain = cur - cand_cost;
      basis = cand;
      cur = cand_cost;
      mu = std::max(0.5 * mu, mu_min);
      if (gain < 1e-12 * (cur + scale)) break;
    } else {
      if (mu <= mu_min) break;
      mu = std::max(0.25 * mu, mu_min);
    }
  }
  *best_cost_io = std::min(*best_cost_io, cur);
  return cur;
}

}  // namespace

double brute_force_opt(const DenseMatrix& m, double p, Index k, int starts,
                       std::uint64_t seed) {
  m.validate();
  if (p < 1.0) throw std::invalid_argument("brute_force_opt: p < 1");
  const Index d = m.cols();
  if (k < 1 || k > d) throw std::invalid_argument("brute_force_opt: bad k");
  if (k >= d) return 0.0;
  const Mat rows = m.weighted();
  const Vec row_sqnorm = rows.array().square().rowwise().sum().matrix();

  double best = std::numeric_limits<double>::infinity();
  if (k == 1 && d <= 3) {
    constexpr double kStep = 1e-3;
    Vec best_v = Vec::Zero(d);
    if (d == 2) {
      for (double theta = 0.0; theta < 3.14159265358979323846; theta += kStep) {
        Vec v(2);
        v << std::cos(theta), std::sin(theta);
        const double c = direction_cost(rows, row_sqnorm, v, p);
        if (c < best) {
          best = c;
          best_v = v;
        }
      }
    } else {
      for (double theta = 0.0; theta <= 3.14159265358979323846;
           theta += kStep) {
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        for (double phi = 0.0; phi < 3.14159265358979323846; phi += kStep) {
          Vec v(3);
          v << st * std::cos(phi), st * std::sin(phi), ct;
          const double c = direction_cost(rows, row_sqnorm, v, p);
          if (c < best) {
            best = c;
            best_v = v;
          }
        }
      }
    }
    irls_descent(rows, row_sqnorm, best_v, p, &best);
    return best;
  }

  // SVD start, then random restarts.
  {
    const SvdResult svd = thin_svd(m);
    Rng rng(hash_combine(seed, 0xdeull));
    const Mat start = complete_frame(svd.v.leftCols(std::min(k, svd.rank)), d,
                                     k, rng);
    irls_descent(rows, row_sqnorm, start, p, &best);
  }
  for (int s = 0; s < starts; ++s) {
    Rng rng(hash_combine(hash_combine(seed, 0x57ull),
                         static_cast<std::uint64_t>(s)));
    irls_descent(rows, row_sqnorm, random_frame(d, k, rng).basis, p, &best);
  }
  return best;
}

DominationReport sensitivity_domination_check(const DenseMatrix& m, Index k,
                                              Index num_queries,
                                              std::uint64_t seed) {
  const double lambda = ridge_lambda(m, k);
  const ScoreVector scores = ridge_leverage_scores(m, lambda);
  const Mat rows = m.weighted();
  const Vec row_sqnorm = rows.array().square().rowwise().sum().matrix();
  const double total_sq = row_sqnorm.sum();

  DominationReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (Index qi = 0; qi < num_queries; ++qi) {
    Rng rng(hash_combine(hash_combine(seed, 0xd0ull),
                         static_cast<std::uint64_t>(qi)));
    const SubspaceQuery f = random_frame(m.cols(), k, rng);
    const Mat proj = rows * f.basis;
    Vec res2(m.rows());
    double den = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
      res2[i] = std::max(row_sqnorm[i] - proj.row(i).squaredNorm(), 0.0);
      den += res2[i];
    }
    if (den <= 1e-14 * total_sq) continue;  // residual numerically zero
    for (Index i = 0; i < m.rows(); ++i) {
      if (res2[i] <= 0.0) continue;
      const double margin = scores.values[i] * den / res2[i];
      report.worst_margin = std::min(report.worst_margin, margin);
      report.checked += 1;
    }
  }
  report.holds = report.worst_margin >= (1.0 / 48.0) * (1.0 - 1e-9);
  return report;
}

}  // namespace lpcs
