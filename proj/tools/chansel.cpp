#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chansel/baselines.hpp"
#include "chansel/dataset_io.hpp"
#include "chansel/error.hpp"
#include "chansel/evaluation.hpp"
#include "chansel/parallel.hpp"
#include "chansel/pipeline.hpp"
#include "chansel/preprocess.hpp"
#include "chansel/report.hpp"
#include "chansel/synth.hpp"
#include "chansel/topomap.hpp"
#include "chansel/xcdc.hpp"
#include "chansel/xcorr.hpp"

using namespace chansel;

namespace {

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("'" + s + "' is not a number");
  }
}

std::size_t to_size(const std::string& s) {
  const double v = to_double(s);
  if (v < 0 || v != std::floor(v)) throw ValidationError("'" + s + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto parts = split_on(text, ':');
  if (parts.size() != 2) throw ValidationError("expected LOW:HIGH, got '" + text + "'");
  return {to_double(parts[0]), to_double(parts[1])};
}

// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split_on(text, ':');
  if (parts.size() == 3) {
    const double a = to_double(parts[0]), b = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0) || b < a) throw ValidationError("grid needs LOW <= HIGH and STEP > 0");
    const auto n = std::lround((b - a) / step);
    std::vector<double> grid;
    for (long i = 0; i <= n; ++i) grid.push_back(n == 0 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
    return grid;
  }
  std::vector<double> grid;
  for (const auto& p : split_on(text, ',')) grid.push_back(to_double(p));
  return grid;
}

// "default", "a:b" (every integer) or a comma list.
std::vector<std::size_t> parse_ks(const std::string& text, std::size_t n_channels) {
  if (text == "default") return default_ks(n_channels);
  const auto range = split_on(text, ':');
  std::vector<std::size_t> ks;
  if (range.size() == 2) {
    const auto a = to_size(range[0]), b = to_size(range[1]);
    for (auto k = a; k <= b; ++k) ks.push_back(k);
    return ks;
  }
  for (const auto& p : split_on(text, ',')) ks.push_back(to_size(p));
  return ks;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(text, out);
  }
}

void emit_json(const nlohmann::json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel ranking and minimal-subset selection for epoched multichannel data"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth;
  std::string synth_out, informative = "2,7,11";
  auto* c_synth = app.add_subcommand("synth", "Write a planted-channel synthetic dataset");
  c_synth->add_option("--out", synth_out, "Dataset directory")->required();
  c_synth->add_option("--channels", synth.n_channels);
  c_synth->add_option("--informative", informative, "Comma-separated channel indices");
  c_synth->add_option("--trials-per-class", synth.n_trials_per_class);
  c_synth->add_option("--samples", synth.t_samples);
  c_synth->add_option("--fs", synth.fs);
  c_synth->add_option("--carrier", synth.carrier_hz);
  c_synth->add_option("--depth", synth.modulation_depth);
  c_synth->add_option("--noise", synth.noise_sigma);
  c_synth->add_option("--seed", synth.seed);

  // preprocess
  PreprocessConfig prep;
  std::string prep_in, prep_out, band = "0.1:30", window = "0:4";
  bool no_channel_zscore = false;
  auto* c_prep = app.add_subcommand("preprocess", "Bandpass, downsample, crop and z-score a dataset");
  c_prep->add_option("--in", prep_in)->required();
  c_prep->add_option("--out", prep_out)->required();
  c_prep->add_option("--band", band, "LOW:HIGH in Hz");
  c_prep->add_option("--order", prep.band.order);
  c_prep->add_flag("--zero-phase", prep.band.zero_phase);
  c_prep->add_option("--target-fs", prep.target_fs);
  c_prep->add_option("--window", window, "T0:T1 in seconds");
  c_prep->add_flag("--no-channel-zscore", no_channel_zscore);

  // rank
  std::string rank_in, rank_out, rank_method = "xcdc", rank_lambda = "auto", rank_grid = "0:1:0.1";
  int rank_folds = 10;
  std::size_t rank_topk = 3;
  std::uint64_t rank_seed = 0;
  std::optional<std::size_t> rank_max_lag;
  unsigned rank_threads = 1;
  auto* c_rank = app.add_subcommand("rank", "Rank channels and write ranking.json");
  c_rank->add_option("--in", rank_in)->required();
  c_rank->add_option("--out", rank_out, "Output file, stdout if omitted");
  c_rank->add_option("--method", rank_method, "xcdc, ccs or csp-rank");
  c_rank->add_option("--lambda", rank_lambda, "auto or a value in [0, 1]");
  c_rank->add_option("--folds", rank_folds);
  c_rank->add_option("--grid", rank_grid, "LOW:HIGH:STEP or a comma list");
  c_rank->add_option("--cv-topk", rank_topk);
  c_rank->add_option("--seed", rank_seed);
  c_rank->add_option("--max-lag", rank_max_lag);
  c_rank->add_option("--threads", rank_threads, "0 = all hardware threads");

  // eval-curve
  std::string curve_in, curve_ranking, curve_out, curve_ks = "default";
  std::uint64_t curve_seed = 0;
  unsigned curve_threads = 1;
  auto* c_curve = app.add_subcommand("eval-curve", "Accuracy of the top-k channels for each k");
  c_curve->add_option("--in", curve_in)->required();
  c_curve->add_option("--ranking", curve_ranking)->required();
  c_curve->add_option("--out", curve_out, "Output CSV, stdout if omitted");
  c_curve->add_option("--ks", curve_ks, "default, A:B or a comma list");
  c_curve->add_option("--seed", curve_seed);
  c_curve->add_option("--threads", curve_threads);

  // minimal-subset
  std::string ms_curve, ms_ranking, ms_out, ms_reference = "all";
  double ms_d = 0.01;
  auto* c_ms = app.add_subcommand("minimal-subset", "Smallest k within d of the reference accuracy");
  c_ms->add_option("--curve", ms_curve)->required();
  c_ms->add_option("--d", ms_d);
  c_ms->add_option("--reference", ms_reference, "all (last curve point) or an accuracy");
  c_ms->add_option("--ranking", ms_ranking, "Adds the selected channels to the output");
  c_ms->add_option("--out", ms_out);

  // topomap
  std::string tm_in, tm_ranking, tm_out;
  std::size_t tm_resolution = 64;
  auto* c_tm = app.add_subcommand("topomap", "Interpolate normalized scores onto a grid");
  c_tm->add_option("--in", tm_in, "Dataset supplying the electrode layout")->required();
  c_tm->add_option("--ranking", tm_ranking)->required();
  c_tm->add_option("--resolution", tm_resolution);
  c_tm->add_option("--out", tm_out);

  // run
  std::string run_config, run_out;
  unsigned run_threads = 1;
  bool run_quiet = false;
  auto* c_run = app.add_subcommand("run", "Run every stage from a JSON config into a bundle");
  c_run->add_option("--config", run_config, "Config file or a previous run.json")->required();
  c_run->add_option("--out", run_out, "Bundle directory")->required();
  c_run->add_option("--threads", run_threads);
  c_run->add_flag("--quiet", run_quiet);

  // xcorr-bench
  std::size_t bench_trials = 600, bench_samples = 400;
  unsigned bench_threads = 1;
  int bench_repeat = 1;
  std::string bench_engine = "fft";
  std::uint64_t bench_seed = 0;
  auto* c_bench = app.add_subcommand("xcorr-bench", "Time one channel's discriminant score");
  c_bench->add_option("--trials", bench_trials);
  c_bench->add_option("--samples", bench_samples);
  c_bench->add_option("--threads", bench_threads);
  c_bench->add_option("--engine", bench_engine, "fft, naive or both");
  c_bench->add_option("--repeat", bench_repeat);
  c_bench->add_option("--seed", bench_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*c_synth) {
      synth.informative.clear();
      if (!informative.empty()) {
        for (const auto& p : split_on(informative, ',')) synth.informative.push_back(to_size(p));
      }
      save_dataset(generate_synthetic(synth), synth_out);
    } else if (*c_prep) {
      std::tie(prep.band.low_hz, prep.band.high_hz) = parse_range(band);
      std::tie(prep.window_start_s, prep.window_end_s) = parse_range(window);
      prep.channel_zscore = !no_channel_zscore;
      save_dataset(preprocess(load_dataset(prep_in), prep), prep_out);
    } else if (*c_rank) {
      const auto data = load_dataset(rank_in);
      XcorrOptions xopt;
      xopt.max_lag = rank_max_lag;
      xopt.threads = rank_threads;
      RankingFile file;
      switch (parse_ranking_method(rank_method)) {
        case RankingMethod::xcdc: {
          nlohmann::json cv = nullptr;
          double lambda = 0.0;
          if (rank_lambda == "auto") {
            LambdaSearchOptions opt;
            opt.folds = rank_folds;
            opt.grid = parse_grid(rank_grid);
            opt.top_k = rank_topk;
            opt.seed = rank_seed;
            opt.xcorr = xopt;
            const auto search = select_lambda_cv(data, opt);
            lambda = search.lambda;
            cv = cv_record(opt, search);
          } else {
            lambda = to_double(rank_lambda);
          }
          file = make_ranking_file(rank_channels(data, lambda, Split::train, xopt), rank_seed);
          file.cv = std::move(cv);
          break;
        }
        case RankingMethod::ccs:
          file = make_ranking_file(ccs_rank(data), rank_seed);
          break;
        case RankingMethod::csp_rank:
          file = make_ranking_file(csp_rank(data), rank_seed);
          break;
      }
      emit_json(to_json(file), rank_out);
    } else if (*c_curve) {
      const auto data = load_dataset(curve_in);
      const auto file = ranking_from_json(read_json(curve_ranking));
      const auto ks = parse_ks(curve_ks, data.n_channels());
      const auto curve =
          accuracy_curve(data, std::span<const std::size_t>(file.order), ks, curve_seed, curve_threads);
      emit(curve_to_csv(curve), curve_out);
    } else if (*c_ms) {
      const auto curve = curve_from_csv(read_text(ms_curve));
      const double reference = ms_reference == "all" ? curve.reference : to_double(ms_reference);
      std::vector<std::size_t> order;
      if (!ms_ranking.empty()) order = ranking_from_json(read_json(ms_ranking)).order;
      emit_json(to_json(minimal_subset(curve, reference, ms_d, order)), ms_out);
    } else if (*c_tm) {
      const auto data = load_dataset(tm_in);
      const auto file = ranking_from_json(read_json(tm_ranking));
      const auto grid = topomap_grid(file.scores, data.layout(), tm_resolution);
      emit_json(to_json(grid, data.layout(), map_scores(file.scores)), tm_out);
    } else if (*c_run) {
      run_pipeline(load_run_config(run_config), run_out, run_threads, run_quiet ? nullptr : &std::cerr);
    } else if (*c_bench) {
      if (bench_engine != "fft" && bench_engine != "naive" && bench_engine != "both") {
        throw ValidationError("engine must be fft, naive or both");
      }
      if (bench_trials < 2 || bench_samples < 1 || bench_repeat < 1) {
        throw ValidationError("need at least 2 trials, 1 sample and 1 repeat");
      }
      std::mt19937_64 rng(bench_seed);
      std::normal_distribution<double> noise;
      std::vector<std::vector<double>> trials(bench_trials, std::vector<double>(bench_samples));
      std::vector<int> labels(bench_trials);
      for (std::size_t i = 0; i < bench_trials; ++i) {
        for (auto& v : trials[i]) v = noise(rng);
        labels[i] = static_cast<int>(i % 2);
      }
      std::vector<std::span<const double>> views(trials.begin(), trials.end());
      XcorrOptions xopt;
      xopt.threads = bench_threads;
      std::cout << "engine,threads,n_trials,t_samples,seconds\n";
      auto report = [&](const char* engine, auto&& compute) {
        for (int r = 0; r < bench_repeat; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto sim = compute();
          const auto ws = within_between(sim, labels);
          (void)discriminant_score(ws.r_w, ws.r_b, 0.5);
          char line[128];
          std::snprintf(line, sizeof line, "%s,%u,%zu,%zu,%.6f\n", engine, resolve_threads(bench_threads),
                        bench_trials, bench_samples, seconds_since(t0));
          std::cout << line;
        }
      };
      if (bench_engine != "naive") report("fft", [&] { return pairwise_similarity(views, xopt); });
      if (bench_engine != "fft") report("naive", [&] { return naive_pairwise_similarity(views, xopt); });
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
