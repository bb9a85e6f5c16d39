// lpcoreset: build and verify strong coresets for lp subspace approximation.
//
// Exit codes: 0 success / verification pass, 1 verification fail,
// 2 input error, 3 runtime failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpcoreset/io.hpp"
#include "lpcoreset/online.hpp"
#include "lpcoreset/pipeline.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/synthetic.hpp"
#include "lpcoreset/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::ordered_json;

struct InputOptions {
  std::string path;
  bool header = false;
};

lpcs::DenseMatrix load_input(const InputOptions& in) {
  return lpcs::DenseMatrix::from(lpcs::read_matrix(in.path, in.header));
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("LPCORESET_THREADS"))
      threads = std::atoi(env);
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

const char* tag_name(lpcs::QueryTag tag) {
  switch (tag) {
    case lpcs::QueryTag::Random: return "random";
    case lpcs::QueryTag::SvdAligned: return "svd-aligned";
    case lpcs::QueryTag::RowSpan: return "row-span";
    case lpcs::QueryTag::Adversarial: return "adversarial";
  }
  return "unknown";
}

int cmd_construct(const InputOptions& in, lpcs::SamplerConfig cfg,
                  const std::string& mode, const std::string& out_path) {
  lpcs::DenseMatrix data = load_input(in);
  lpcs::WeightedCoreset coreset;
  if (mode == "offline") {
    coreset = lpcs::build_strong_coreset(data, cfg);
  } else if (mode == "online") {
    if (cfg.n_hint == 0) cfg.n_hint = data.rows();
    coreset = lpcs::online_coreset(data, cfg);
  } else if (mode == "stream") {
    if (cfg.n_hint == 0) cfg.n_hint = data.rows();
    coreset = lpcs::stream_coreset(data, cfg);
  } else {
    throw std::invalid_argument("construct: unknown mode " + mode);
  }
  coreset.meta.dataset_hash = lpcs::dataset_hash(data.data);
  lpcs::write_text_file(out_path, lpcs::coreset_to_json(coreset));
  std::cerr << "constructed coreset of " << coreset.size() << " rows from "
            << data.rows() << "\n";
  return 0;
}

int cmd_verify(const InputOptions& in, const std::string& coreset_path,
               lpcs::Index queries, std::uint64_t seed, double eps,
               const std::string& out_path) {
  lpcs::DenseMatrix data = load_input(in);
  lpcs::WeightedCoreset coreset =
      lpcs::coreset_from_json(lpcs::read_text_file(coreset_path));
  if (!coreset.meta.dataset_hash.empty() &&
      coreset.meta.dataset_hash != lpcs::dataset_hash(data.data))
    throw std::invalid_argument("verify: coreset does not match this dataset");

  const double p = coreset.meta.cfg.p;
  const lpcs::Index k = coreset.meta.cfg.k;
  const auto suite = lpcs::query_suite(data, k, queries, seed, &coreset, p);
  const lpcs::DistortionReport report =
      lpcs::distortion(data, coreset, suite, p, eps);

  ordered_json j;
  j["format"] = "lpverify/1";
  j["dataset_sha256"] = lpcs::dataset_hash(data.data);
  j["p"] = p;
  j["k"] = k;
  j["eps"] = eps;
  j["seed"] = seed;
  j["queries"] = suite.size();
  j["max_abs_dev"] = report.max_abs_dev;
  j["pass"] = report.pass;
  j["excluded"] = report.excluded;
  j["zero_cost_failures"] = report.zero_cost_failures;
  ordered_json per_query = ordered_json::array();
  for (std::size_t i = 0; i < report.ratios.size(); ++i) {
    ordered_json q;
    q["tag"] = tag_name(report.tags[i]);
    if (std::isnan(report.ratios[i]))
      q["ratio"] = nullptr;
    else
      q["ratio"] = report.ratios[i];
    per_query.push_back(std::move(q));
  }
  j["per_query"] = std::move(per_query);
  if (!out_path.empty()) lpcs::write_text_file(out_path, j.dump(2) + "\n");
  std::cout << "max |ratio-1| = " << report.max_abs_dev << " over "
            << suite.size() << " queries ("
            << (report.pass ? "pass" : "fail") << ")\n";
  return report.pass ? 0 : 1;
}

int cmd_scores(const InputOptions& in, const std::string& kind, lpcs::Index k,
               double p, const std::string& out_path) {
  lpcs::DenseMatrix data = load_input(in);
  lpcs::ScoreVector scores;
  if (kind == "leverage") {
    scores = lpcs::leverage_scores(data);
  } else if (kind == "ridge") {
    scores = lpcs::ridge_leverage_scores(data, lpcs::ridge_lambda(data, k));
  } else if (kind == "lewis") {
    scores = lpcs::lewis_weights(data, p);
  } else {
    throw std::invalid_argument("scores: unknown kind " + kind);
  }
  lpcs::Mat column(scores.size(), 1);
  column.col(0) = scores.values;
  lpcs::write_csv(out_path, column);
  return 0;
}

int cmd_stream(const InputOptions& in, lpcs::SamplerConfig cfg,
               const std::string& out_path) {
  lpcs::DenseMatrix data = load_input(in);
  if (cfg.n_hint == 0) cfg.n_hint = data.rows();
  lpcs::WeightedCoreset coreset = lpcs::stream_coreset(data, cfg);
  coreset.meta.dataset_hash = lpcs::dataset_hash(data.data);
  const double kappa = lpcs::online_condition_number(data);

  lpcs::OnlineState probe(data.cols(), cfg);
  ordered_json j;
  j["format"] = "lpstream/1";
  j["rows"] = data.rows();
  j["d"] = data.cols();
  j["kappa_ol"] = kappa;
  j["floor_q"] = probe.floor_q();
  j["reduces"] = coreset.meta.rounds;
  j["final_size"] = coreset.size();
  j["coreset"] = nlohmann::ordered_json::parse(lpcs::coreset_to_json(coreset));
  if (!out_path.empty()) lpcs::write_text_file(out_path, j.dump(2) + "\n");
  std::cout << "kappa_ol = " << kappa << ", final size = " << coreset.size()
            << "\n";
  return 0;
}

int cmd_bench(std::uint64_t seed, const std::string& out_path) {
  const lpcs::Index n = 1000, d = 20, planted = 3, k = 3;
  const double noise = 0.25;
  ordered_json cells = ordered_json::array();
  for (double p : {1.0, 1.5, 3.0}) {
    for (double eps : {0.5}) {
      for (std::uint64_t s = 0; s < 3; ++s) {
        for (bool heavy : {false, true}) {
          lpcs::DenseMatrix data = lpcs::synthetic_low_rank(
              n, d, planted, noise, heavy, lpcs::hash_combine(seed, s));
          lpcs::SamplerConfig cfg;
          cfg.p = p;
          cfg.k = k;
          cfg.eps = eps;
          cfg.delta = 0.1;
          cfg.seed = lpcs::hash_combine(seed, 1000 + s);
          cfg.alpha_scale = lpcs::practical_alpha_scale(p);
          const auto t0 = std::chrono::steady_clock::now();
          lpcs::WeightedCoreset coreset = lpcs::build_strong_coreset(data, cfg);
          const auto t1 = std::chrono::steady_clock::now();
          const auto suite =
              lpcs::query_suite(data, k, 200, cfg.seed + 1, &coreset, p);
          const auto report =
              lpcs::distortion(data, coreset, suite, p, eps);
          const auto t2 = std::chrono::steady_clock::now();
          ordered_json cell;
          cell["p"] = p;
          cell["eps"] = eps;
          cell["seed"] = s;
          cell["heavy_tail"] = heavy;
          cell["n"] = n;
          cell["d"] = d;
          cell["k"] = k;
          cell["size"] = coreset.size();
          cell["rounds"] = coreset.meta.rounds;
          cell["max_abs_dev"] = report.max_abs_dev;
          cell["build_ms"] =
              std::chrono::duration<double, std::milli>(t1 - t0).count();
          cell["verify_ms"] =
              std::chrono::duration<double, std::milli>(t2 - t1).count();
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  ordered_json j;
  j["format"] = "lpbench/1";
  j["cells"] = std::move(cells);
  if (!out_path.empty()) lpcs::write_text_file(out_path, j.dump(2) + "\n");
  std::cout << "bench: " << j["cells"].size() << " cells\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strong coresets for lp subspace approximation"};
  app.require_subcommand(1);

  InputOptions in;
  lpcs::SamplerConfig cfg;
  cfg.alpha_scale = 0.0;  // 0 = resolve to the practical preset for p
  std::string mode = "offline";
  std::string out_path;
  std::string coreset_path;
  std::string kind = "ridge";
  lpcs::Index queries = 200;
  double verify_eps = 0.5;
  std::uint64_t seed = 0;
  int threads = 0;

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("--input", in.path, "matrix file (.lpcm binary or CSV)")
        ->required();
    cmd->add_flag("--header", in.header, "skip one CSV header line");
    cmd->add_option("--threads", threads, "cap worker threads");
  };
  auto add_config = [&](CLI::App* cmd, bool require_params) {
    auto* p_opt = cmd->add_option("--p", cfg.p, "norm exponent p >= 1");
    auto* k_opt = cmd->add_option("--k", cfg.k, "query rank k");
    auto* e_opt = cmd->add_option("--eps", cfg.eps, "target accuracy");
    if (require_params) {
      p_opt->required();
      k_opt->required();
      e_opt->required();
    }
    cmd->add_option("--delta", cfg.delta, "failure budget");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--alpha-scale", cfg.alpha_scale,
                    "oversampling multiplier (0 = practical preset)");
    cmd->add_option("--target-size", cfg.target_size, "stop size (0 = auto)");
    cmd->add_option("--max-rounds", cfg.max_rounds, "round cap (0 = auto)");
    cmd->add_option("--n-hint", cfg.n_hint, "stream length hint");
    cmd->add_option("--floor-c", cfg.floor_c,
                    "row-arrival probability floor constant (p < 2)");
  };

  auto* construct = app.add_subcommand("construct", "build a coreset");
  add_input(construct);
  add_config(construct, true);
  construct->add_option("--mode", mode, "offline|online|stream")
      ->check(CLI::IsMember({"offline", "online", "stream"}));
  construct->add_option("--out", out_path, "coreset JSON path")->required();

  auto* verify = app.add_subcommand("verify", "measure coreset distortion");
  add_input(verify);
  verify->add_option("--coreset", coreset_path, "coreset JSON")->required();
  verify->add_option("--queries", queries, "suite size");
  verify->add_option("--seed", seed, "suite seed");
  verify->add_option("--eps", verify_eps, "pass threshold")->required();
  verify->add_option("--out", out_path, "report JSON path");

  auto* scores = app.add_subcommand("scores", "per-row scores as CSV");
  add_input(scores);
  scores->add_option("--kind", kind, "leverage|ridge|lewis")
      ->check(CLI::IsMember({"leverage", "ridge", "lewis"}));
  scores->add_option("--k", cfg.k, "rank for ridge lambda");
  scores->add_option("--p", cfg.p, "exponent for lewis weights");
  scores->add_option("--out", out_path, "output CSV")->required();

  auto* stream = app.add_subcommand("stream", "replay rows, report kappa");
  add_input(stream);
  add_config(stream, true);
  stream->add_option("--out", out_path, "report JSON path");

  auto* bench = app.add_subcommand("bench", "synthetic suite benchmark");
  bench->add_option("--seed", seed, "suite seed");
  bench->add_option("--threads", threads, "cap worker threads");
  bench->add_option("--out", out_path, "bench JSON path");

  CLI11_PARSE(app, argc, argv);
  apply_threads(threads);

  try {
    if (construct->parsed()) {
      if (cfg.alpha_scale == 0.0)
        cfg.alpha_scale = lpcs::practical_alpha_scale(cfg.p);
      return cmd_construct(in, cfg, mode, out_path);
    }
    if (verify->parsed())
      return cmd_verify(in, coreset_path, queries, seed, verify_eps, out_path);
    if (scores->parsed()) return cmd_scores(in, kind, cfg.k, cfg.p, out_path);
    if (stream->parsed()) {
      if (cfg.alpha_scale == 0.0)
        cfg.alpha_scale = lpcs::practical_alpha_scale(cfg.p);
      return cmd_stream(in, cfg, out_path);
    }
    if (bench->parsed()) return cmd_bench(seed, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
