// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line. Run with no arguments for all criteria or with
// --criterion N for one. The exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "lpcoreset/io.hpp"
#include "lpcoreset/online.hpp"
#include "lpcoreset/pipeline.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/synthetic.hpp"
#include "lpcoreset/verify.hpp"

using namespace lpcs;

namespace {

constexpr std::uint64_t kMasterSeed = 20240817;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

SamplerConfig suite_config(double p, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.p = p;
  cfg.k = 3;
  cfg.eps = 0.5;
  cfg.delta = 0.1;
  cfg.seed = seed;
  cfg.n_hint = 2000;
  cfg.alpha_scale = practical_alpha_scale(p);
  return cfg;
}

DenseMatrix suite_data(Index n, std::uint64_t seed) {
  return synthetic_low_rank(n, 30, 3, 0.25, false, seed);
}

// ---------------------------------------------------------------------------
// 1. Ridge leverage score sums stay below 2k at lambda = tail_k / k.

Outcome criterion_ridge_sum() {
  Rng rng(hash_combine(kMasterSeed, 1));
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 50 + static_cast<Index>(rng.below(1951));
    const Index d = 5 + static_cast<Index>(rng.below(36));
    const Index k = 1 + static_cast<Index>(rng.below(8));
    DenseMatrix m =
        trial % 2 == 0
            ? gaussian_matrix(n, d, rng.next())
            : synthetic_low_rank(n, d, std::min<Index>(d, 1 + trial % 5),
                                 0.05 + 0.4 * rng.uniform(), trial % 4 == 1,
                                 rng.next());
    const Index kk = std::min(k, std::min(n, d));
    const double lambda = ridge_lambda(m, kk);
    const double sum = ridge_leverage_scores(m, lambda).values.sum();
    expect(sum <= 2.0 * kk + 1e-9,
           "score sum " + std::to_string(sum) + " exceeds 2k at n=" +
               std::to_string(n) + " d=" + std::to_string(d) +
               " k=" + std::to_string(kk));
    worst_ratio = std::max(worst_ratio, sum / (2.0 * kk));
  }
  std::ostringstream detail;
  detail << "50 matrices, max sum/(2k) = " << worst_ratio;
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 2. Ridge scores dominate the squared-residual sensitivities up to 1/48.

Outcome criterion_sensitivity_domination() {
  Rng rng(hash_combine(kMasterSeed, 2));
  double best_constant = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 60 + static_cast<Index>(rng.below(400));
    const Index d = 6 + static_cast<Index>(rng.below(15));
    const Index k = 1 + static_cast<Index>(rng.below(5));
    DenseMatrix m =
        trial % 2 == 0
            ? gaussian_matrix(n, d, rng.next())
            : synthetic_low_rank(n, d, std::min<Index>(d, k), 0.3,
                                 trial % 4 == 1, rng.next());
    const DominationReport report = sensitivity_domination_check(
        m, std::min(k, std::min(n, d)), 100, rng.next());
    expect(report.holds, "domination failed at trial " + std::to_string(trial) +
                             " with margin " +
                             std::to_string(report.worst_margin));
    best_constant = std::min(best_constant, report.worst_margin);
  }
  std::ostringstream detail;
  detail << "20 matrices x 100 queries, observed constant " << best_constant
         << " (required " << 1.0 / 48.0 << ")";
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 3. Flattening: exact cost preservation, row bounds, flatness, Frobenius.

Outcome criterion_flattening() {
  Rng rng(hash_combine(kMasterSeed, 3));
  double worst_rel = 0.0;
  for (double p : {1.0, 1.3, 1.7}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Index n = 80 + static_cast<Index>(rng.below(80));
      const Index d = 6 + static_cast<Index>(rng.below(6));
      DenseMatrix m = gaussian_matrix(n, d, rng.next());
      for (Index i = 0; i < n / 10; ++i)
        m.data.row(i) *= 5.0 + 30.0 * rng.uniform();

      SubspaceQuery anchor;
      anchor.k = 2;
      anchor.basis = orthonormalize(gaussian_matrix(d, 2, rng.next()).data);
      DenseMatrix flat = flatten(m, anchor, p);

      expect(flat.rows() >= n && 2 * flat.rows() <= 3 * n,
             "row-count bound violated");

      for (int q = 0; q < 100; ++q) {
        SubspaceQuery f;
        f.k = 3;
        f.basis = orthonormalize(gaussian_matrix(d, 3, rng.next()).data);
        const double before = pq_norm(residual(m, f), p);
        const double after = pq_norm(residual(flat, f), p);
        const double rel = std::abs(after - before) / std::max(before, 1e-300);
        worst_rel = std::max(worst_rel, rel);
        expect(rel <= 1e-9, "cost preservation broke: rel=" +
                                std::to_string(rel));
      }

      const DenseMatrix res = residual(flat, anchor);
      const double total = pq_norm(res, p);
      double frob_sq = 0.0;
      for (Index i = 0; i < flat.rows(); ++i) {
        const double wr = flat.row_weights[i] * res.data.row(i).norm();
        expect(std::pow(wr, p) <= (2.0 / n) * total * (1.0 + 1e-9),
               "per-row flatness bound violated");
        frob_sq += wr * wr;
      }
      const double bound =
          std::pow(2.0 / n, 1.0 / p - 0.5) * std::pow(total, 1.0 / p);
      expect(std::sqrt(frob_sq) <= bound * (1.0 + 1e-9),
             "flat Frobenius bound violated");
    }
  }
  std::ostringstream detail;
  detail << "p in {1,1.3,1.7}, 100 queries each, worst rel err " << worst_rel;
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 4. The sampler is unbiased for |y|_p^p across probability profiles.

Outcome criterion_unbiasedness() {
  const Index n = 200;
  double worst_z = 0.0;
  for (int vec_id = 0; vec_id < 10; ++vec_id) {
    Rng rng(hash_combine(hash_combine(kMasterSeed, 4), vec_id));
    Mat column(n, 1);
    for (Index i = 0; i < n; ++i) column(i, 0) = rng.normal();
    DenseMatrix y = DenseMatrix::from(column);

    for (int profile = 0; profile < 3; ++profile) {
      ScoreVector probs;
      probs.kind = ScoreKind::Probability;
      probs.values.resize(n);
      for (Index i = 0; i < n; ++i) {
        switch (profile) {
          case 0: probs.values[i] = 0.3; break;
          case 1:
            probs.values[i] = std::clamp(std::abs(column(i, 0)), 0.05, 1.0);
            break;
          default: probs.values[i] = (i % 2 == 0) ? 1.0 : 0.2; break;
        }
      }
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const double truth = pq_norm(y, p);
        const int reps = 10000;
        double sum = 0.0, sum_sq = 0.0;
        for (int r = 0; r < reps; ++r) {
          const std::uint64_t seed =
              hash_combine(hash_combine(kMasterSeed, 40 + vec_id),
                           static_cast<std::uint64_t>(profile * reps + r));
          WeightedCoreset c = lp_sample(y, probs, p, seed);
          double est = 0.0;
          for (Index j = 0; j < c.size(); ++j)
            est += std::pow(c.scales[j] * std::abs(column(c.indices[j], 0)), p);
          sum += est;
          sum_sq += est * est;
        }
        const double mean = sum / reps;
        const double var = std::max(sum_sq / reps - mean * mean, 0.0);
        const double se = std::sqrt(var / reps) + 1e-15;
        const double z = std::abs(mean - truth) / se;
        worst_z = std::max(worst_z, z);
        expect(z <= 3.0, "bias beyond 3 standard errors: z=" +
                             std::to_string(z) + " p=" + std::to_string(p));
      }
    }
  }
  std::ostringstream detail;
  detail << "10 vectors x 3 profiles x 4 exponents x 10^4 seeds, max |z| = "
         << worst_z;
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 5. Offline distortion on planted low-rank data, adversarial suite included.

Outcome criterion_offline_distortion() {
  std::ostringstream detail;
  bool pass = true;
  for (double p : {1.0, 1.5, 3.0}) {
    const SamplerConfig base = suite_config(p, 0);
    std::vector<int> ok(20, 0);
    std::vector<double> devs(20, 0.0);
    std::vector<Index> sizes(20, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int s = 0; s < 20; ++s) {
      DenseMatrix m = suite_data(2000, hash_combine(kMasterSeed, 500 + s));
      SamplerConfig cfg = base;
      cfg.seed = hash_combine(kMasterSeed, 900 + s);
      WeightedCoreset c = build_strong_coreset(m, cfg);
      const auto suite =
          query_suite(m, 3, 1000, hash_combine(kMasterSeed, 700 + s), &c, p);
      const DistortionReport r = distortion(m, c, suite, p, 0.5);
      sizes[s] = c.size();
      devs[s] = r.max_abs_dev;
      ok[s] = (r.pass && c.size() <= 2000 / 4) ? 1 : 0;
    }
    const int good = std::accumulate(ok.begin(), ok.end(), 0);
    const double worst = *std::max_element(devs.begin(), devs.end());
    const Index max_size = *std::max_element(sizes.begin(), sizes.end());
    detail << "p=" << p << ": " << good << "/20 seeds, worst dev " << worst
           << ", max size " << max_size << "; ";
    if (good < 18) pass = false;
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 6. More oversampling (smaller alpha) never hurts the median distortion.

Outcome criterion_oversampling_monotonicity() {
  std::ostringstream detail;
  bool pass = true;
  for (double p : {1.0, 1.5, 3.0}) {
    std::vector<double> medians;
    for (double divisor : {1.0, 4.0, 16.0}) {
      std::vector<double> devs(20, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
      for (int s = 0; s < 20; ++s) {
        DenseMatrix m = suite_data(2000, hash_combine(kMasterSeed, 600 + s));
        SamplerConfig cfg = suite_config(p, hash_combine(kMasterSeed, 60 + s));
        cfg.alpha_scale /= divisor;
        WeightedCoreset c = build_strong_coreset(m, cfg);
        const auto suite =
            query_suite(m, 3, 1000, hash_combine(kMasterSeed, 61 + s), &c, p);
        devs[s] = distortion(m, c, suite, p, 0.5).max_abs_dev;
      }
      std::sort(devs.begin(), devs.end());
      medians.push_back(0.5 * (devs[9] + devs[10]));
    }
    detail << "p=" << p << ": medians " << medians[0] << " -> " << medians[1]
           << " -> " << medians[2] << "; ";
    if (!(medians[1] <= medians[0] + 1e-12 &&
          medians[2] <= medians[1] + 1e-12))
      pass = false;
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 7. Bicriteria subspaces: constant-factor cost, exact zero at exact rank.

Outcome criterion_bicriteria() {
  double worst_ratio = 0.0;
  std::vector<double> ratios(20, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int s = 0; s < 20; ++s) {
    DenseMatrix m = suite_data(2000, hash_combine(kMasterSeed, 800 + s));
    const BicriteriaResult bic = bicriteria_subspace(
        m, 1.0, 3, 0.1, hash_combine(kMasterSeed, 810 + s));
    const double opt =
        brute_force_opt(m, 1.0, 3, 8, hash_combine(kMasterSeed, 820 + s));
    ratios[s] = bic.residual_cost / std::max(opt, 1e-300);
  }
  for (double r : ratios) {
    worst_ratio = std::max(worst_ratio, r);
    expect(r <= 10.0, "bicriteria cost ratio " + std::to_string(r));
  }

  for (int s = 0; s < 5; ++s) {
    DenseMatrix lowrank =
        gaussian_matrix(400, 3, hash_combine(kMasterSeed, 830 + s));
    DenseMatrix m = DenseMatrix::from(
        lowrank.data *
        gaussian_matrix(3, 12, hash_combine(kMasterSeed, 840 + s)).data);
    bool zero = false;
    for (std::uint64_t retry = 0; retry < 3 && !zero; ++retry)
      zero = bicriteria_subspace(m, 1.0, 3, 0.1,
                                 hash_combine(kMasterSeed, 850 + s + retry))
                 .residual_cost == 0.0;
    expect(zero, "exact-rank input did not certify zero cost");
  }
  std::ostringstream detail;
  detail << "20 seeds, worst cost/opt = " << worst_ratio
         << "; 5 exact-rank instances certified 0";
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 8. Online pass: irrevocable decisions, score domination, bounded size.

Outcome criterion_online() {
  const DenseMatrix eye = DenseMatrix::from(Mat::Identity(64, 64));
  expect(std::abs(online_condition_number(eye) - 1.0) <= 1e-12,
         "kappa of the identity is not 1");

  std::ostringstream detail;
  bool pass = true;
  for (double p : {1.0, 1.5, 3.0}) {
    std::vector<double> devs(5, 0.0);
    std::vector<double> size_ratio(5, 0.0);
    std::vector<int> dominated(5, 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int s = 0; s < 5; ++s) {
      DenseMatrix m = suite_data(2000, hash_combine(kMasterSeed, 500 + s));
      SamplerConfig cfg = suite_config(p, hash_combine(kMasterSeed, 910 + s));

      OnlineState state(m.cols(), cfg);
      for (Index i = 0; i < m.rows(); ++i) state.update(m.data.row(i));
      WeightedCoreset online = state.finish();

      // Decisions are final: kept stream positions strictly increase.
      for (std::size_t j = 1; j < online.indices.size(); ++j)
        if (online.indices[j] <= online.indices[j - 1]) dominated[s] = -1;

      // Offline ridge scores at the same regularization rank.
      const Index k_eff =
          p >= 2.0 ? 3
                   : std::min<Index>(
                         m.cols(),
                         static_cast<Index>(std::ceil(
                             3.0 * std::log(2000.0 / cfg.delta))));
      const double lambda = ridge_lambda(m, k_eff);
      const ScoreVector offline_scores = ridge_leverage_scores(m, lambda);
      for (Index i = 0; i < m.rows(); ++i)
        if (state.online_scores()[i] < offline_scores.values[i] - 1e-9)
          dominated[s] = 0;

      WeightedCoreset offline = build_strong_coreset(m, cfg);
      size_ratio[s] = static_cast<double>(online.size()) /
                      std::max<Index>(offline.size(), 1);

      const auto suite =
          query_suite(m, 3, 1000, hash_combine(kMasterSeed, 920 + s), &online,
                      p);
      devs[s] = distortion(m, online, suite, p, 0.5).max_abs_dev;
    }
    const double worst_dev = *std::max_element(devs.begin(), devs.end());
    const double worst_ratio =
        *std::max_element(size_ratio.begin(), size_ratio.end());
    const bool all_dominated =
        std::accumulate(dominated.begin(), dominated.end(), 0) == 5;
    detail << "p=" << p << ": worst dev " << worst_dev << ", size ratio "
           << worst_ratio << ", domination " << (all_dominated ? "ok" : "BROKEN")
           << "; ";
    if (worst_dev > 0.5 || worst_ratio > 10.0 || !all_dominated) pass = false;
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 9. Streaming merge-and-reduce equals the in-memory path bit for bit.

Outcome criterion_streaming() {
  namespace fs = std::filesystem;
  const std::string dir = fs::temp_directory_path().string();
  const std::string data_path = dir + "/acc_stream.lpcm";
  const std::string out_path = dir + "/acc_stream.json";

  std::ostringstream detail;
  bool pass = true;
  for (double p : {1.0, 3.0}) {
    DenseMatrix m = suite_data(5000, hash_combine(kMasterSeed, 950));
    SamplerConfig cfg = suite_config(p, hash_combine(kMasterSeed, 951));
    cfg.n_hint = 5000;
    WeightedCoreset in_memory = stream_coreset(m, cfg);
    in_memory.meta.dataset_hash = dataset_hash(m.data);
    const std::string expected = coreset_to_json(in_memory);

    write_lpcm(data_path, m.data);
    std::ostringstream cmd;
    cmd << LPCORESET_CLI_PATH << " construct --input " << data_path
        << " --p " << p << " --k 3 --eps 0.5 --delta 0.1 --seed "
        << cfg.seed << " --mode stream --n-hint 5000 --out " << out_path
        << " >/dev/null 2>&1";
    const int rc = std::system(cmd.str().c_str());
    expect(rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0,
           "CLI stream construct failed");
    const bool identical = read_text_file(out_path) == expected;

    const auto suite =
        query_suite(m, 3, 500, hash_combine(kMasterSeed, 955), &in_memory, p);
    const DistortionReport r = distortion(m, in_memory, suite, p, 0.5);
    detail << "p=" << p << ": bitwise " << (identical ? "equal" : "DIFFERENT")
           << ", size " << in_memory.size() << ", dev " << r.max_abs_dev
           << "; ";
    if (!identical || !r.pass || in_memory.size() > 5000 / 4) pass = false;
  }
  std::remove(data_path.c_str());
  std::remove(out_path.c_str());
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 10. Oracle agreement: descent vs SVD, Gaussian embeddings, collapse rate.

Outcome criterion_oracles() {
  Rng rng(hash_combine(kMasterSeed, 10));
  double worst_rel = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 15 + static_cast<Index>(rng.below(60));
    const Index d = 4 + static_cast<Index>(rng.below(7));
    const Index k = 1 + static_cast<Index>(rng.below(
                            static_cast<std::uint64_t>(d - 1)));
    DenseMatrix m = gaussian_matrix(n, d, rng.next());
    const double opt = brute_force_opt(m, 2.0, k, 10, rng.next());
    const double tail = svd_truncate(m, k).second;
    const double rel = std::abs(opt - tail) / std::max(tail, 1e-300);
    worst_rel = std::max(worst_rel, rel);
    expect(rel <= 1e-8, "p=2 optimum off the SVD tail by rel " +
                            std::to_string(rel));
  }

  const DvoretzkyReport dv =
      dvoretzky_check(4000, 3, 3.0, 100, hash_combine(kMasterSeed, 11));
  expect(dv.max_dev <= 0.2,
         "Dvoretzky deviation " + std::to_string(dv.max_dev));

  DenseMatrix x = gaussian_matrix(50, 8, hash_combine(kMasterSeed, 12));
  const CollapseReport col =
      gaussian_collapse_check(x, 1.0, 0.1, 10000, hash_combine(kMasterSeed, 13));
  const double sigma = std::sqrt(0.1 * 0.9 / 10000);
  expect(col.fail_rate <= 0.1 + 3.0 * sigma,
         "collapse failure rate " + std::to_string(col.fail_rate));

  std::ostringstream detail;
  detail << "p=2 worst rel " << worst_rel << "; Dvoretzky dev " << dv.max_dev
         << "; collapse rate " << col.fail_rate;
  return {true, detail.str()};
}

using CriterionFn = std::function<Outcome()>;

struct Criterion {
  int id;
  const char* name;
  CriterionFn fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "ridge score sum bound", criterion_ridge_sum},
      {2, "sensitivity domination", criterion_sensitivity_domination},
      {3, "flattening exactness", criterion_flattening},
      {4, "sampler unbiasedness", criterion_unbiasedness},
      {5, "offline strong-coreset distortion", criterion_offline_distortion},
      {6, "oversampling monotonicity", criterion_oversampling_monotonicity},
      {7, "bicriteria quality", criterion_bicriteria},
      {8, "online pipeline", criterion_online},
      {9, "streaming merge-and-reduce", criterion_streaming},
      {10, "oracle agreement", criterion_oracles},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }

  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.fn();
    } catch (const Failure& f) {
      outcome = {false, f.what};
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::string detail = outcome.detail;
    while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';'))
      detail.pop_back();
    std::printf("[%s] criterion %d: %s (%s; %.1f s)\n",
                outcome.pass ? "PASS" : "FAIL", c.id, c.name, detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
