#include "chansel/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <string>

#include <Eigen/Core>
#include <fftw3.h>

#include "chansel/baselines.hpp"
#include "chansel/dataset_io.hpp"
#include "chansel/error.hpp"
#include "chansel/evaluation.hpp"
#include "chansel/report.hpp"
#include "chansel/topomap.hpp"
#include "chansel/xcdc.hpp"

namespace chansel {
namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys{
    "dataset", "preprocess", "methods", "lambda", "folds", "grid", "cv_topk", "max_lag",
    "seed", "ks", "d", "table_d", "topomap_resolution"};
const std::set<std::string> kPreprocessKeys{"band_hz", "order", "zero_phase", "target_fs",
                                            "window_s", "channel_zscore"};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::pair<double, double> pair_of(const json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw ValidationError(std::string(what) + " must have two entries");
  return {v[0], v[1]};
}

PreprocessConfig parse_preprocess(const json& j) {
  for (const auto& [key, _] : j.items()) {
    if (!kPreprocessKeys.count(key)) throw ValidationError("unknown preprocess key '" + key + "'");
  }
  PreprocessConfig p;
  if (j.contains("band_hz")) std::tie(p.band.low_hz, p.band.high_hz) = pair_of(j["band_hz"], "band_hz");
  if (j.contains("order")) p.band.order = j["order"].get<int>();
  if (j.contains("zero_phase")) p.band.zero_phase = j["zero_phase"].get<bool>();
  if (j.contains("target_fs")) p.target_fs = j["target_fs"].get<double>();
  if (j.contains("window_s")) {
    std::tie(p.window_start_s, p.window_end_s) = pair_of(j["window_s"], "window_s");
  }
  if (j.contains("channel_zscore")) p.channel_zscore = j["channel_zscore"].get<bool>();
  return p;
}

json preprocess_json(const PreprocessConfig& p) {
  return {{"band_hz", {p.band.low_hz, p.band.high_hz}},
          {"order", p.band.order},
          {"zero_phase", p.band.zero_phase},
          {"target_fs", p.target_fs},
          {"window_s", {p.window_start_s, p.window_end_s}},
          {"channel_zscore", p.channel_zscore}};
}

// Runs one stage, prefixing failures with its name and keeping the error category.
template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError("stage '" + name + "' failed: " + e.what());
  } catch (const IoError& e) {
    throw IoError("stage '" + name + "' failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error("stage '" + name + "' failed: " + e.what());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.empty()) throw ValidationError("config needs a dataset path");
  if (methods.empty()) throw ValidationError("config needs at least one method");
  if (std::set<RankingMethod>(methods.begin(), methods.end()).size() != methods.size()) {
    throw ValidationError("methods must not repeat");
  }
  if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  if (folds < 2) throw ValidationError("folds must be at least 2");
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("lambda grid values must lie in [0, 1]");
  }
  if (cv_topk < 1) throw ValidationError("cv_topk must be at least 1");
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) throw ValidationError("ks must increase strictly");
  }
  if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("d must lie in [0, 1]");
  for (double t : table_d) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("table_d values must lie in [0, 1]");
  }
  if (topomap_resolution < 8) throw ValidationError("topomap_resolution must be at least 8");
}

RunConfig parse_run_config(const json& input) {
  const json& j = input.contains("config") && input["config"].is_object() ? input["config"] : input;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("preprocess") && !j["preprocess"].is_null()) c.preprocess = parse_preprocess(j["preprocess"]);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(parse_ranking_method(m.get<std::string>()));
    }
    if (j.contains("lambda")) {
      const auto& l = j["lambda"];
      if (l.is_string()) {
        if (l.get<std::string>() != "auto") throw ValidationError("lambda must be \"auto\" or a number");
      } else {
        c.lambda = l.get<double>();
      }
    }
    if (j.contains("folds")) c.folds = j["folds"].get<int>();
    if (j.contains("grid")) c.grid = j["grid"].get<std::vector<double>>();
    if (j.contains("cv_topk")) c.cv_topk = j["cv_topk"].get<std::size_t>();
    if (j.contains("max_lag") && !j["max_lag"].is_null()) c.max_lag = j["max_lag"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ks") && !j["ks"].is_null()) c.ks = j["ks"].get<std::vector<std::size_t>>();
    if (j.contains("d")) c.d = j["d"].get<double>();
    if (j.contains("table_d")) c.table_d = j["table_d"].get<std::vector<double>>();
    if (j.contains("topomap_resolution")) c.topomap_resolution = j["topomap_resolution"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  if (c.grid.empty()) c.grid = default_lambda_grid();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_json(path)); }

json to_json(const RunConfig& c) {
  json j;
  j["dataset"] = c.dataset.string();
  j["preprocess"] = c.preprocess ? preprocess_json(*c.preprocess) : json(nullptr);
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["lambda"] = c.lambda ? json(*c.lambda) : json("auto");
  j["folds"] = c.folds;
  j["grid"] = c.grid.empty() ? default_lambda_grid() : c.grid;
  j["cv_topk"] = c.cv_topk;
  j["max_lag"] = c.max_lag ? json(*c.max_lag) : json(nullptr);
  j["seed"] = c.seed;
  j["ks"] = c.ks.empty() ? json(nullptr) : json(c.ks);
  j["d"] = c.d;
  j["table_d"] = c.table_d;
  j["topomap_resolution"] = c.topomap_resolution;
  return j;
}

void run_pipeline(const RunConfig& input, const std::filesystem::path& out, unsigned threads,
                  std::ostream* log) {
  RunConfig config = input;
  if (config.grid.empty()) config.grid = default_lambda_grid();
  config.validate();
  auto note = [&](const std::string& msg) {
    if (log) *log << msg << '\n';
  };

  EpochedDataset data = stage("load", [&] {
    config.dataset = std::filesystem::weakly_canonical(config.dataset);
    return load_dataset(config.dataset);
  });
  if (config.preprocess) {
    data = stage("preprocess", [&] { return preprocess(data, *config.preprocess); });
  }
  if (config.ks.empty()) config.ks = default_ks(data.n_channels());

  XcorrOptions xopt;
  xopt.max_lag = config.max_lag;
  xopt.threads = threads;

  stage("write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  });

  std::string summary = "method,d,k_m,reference,accuracy_at_k_m\n";
  json results = json::object();

  for (const auto method : config.methods) {
    const std::string name(to_string(method));
    const auto dir = out / name;
    note("[" + name + "] rank");

    RankingFile file = stage("rank:" + name, [&] {
      switch (method) {
        case RankingMethod::xcdc: {
          double lambda = 0.0;
          json cv = nullptr;
          if (config.lambda) {
            lambda = *config.lambda;
          } else {
            LambdaSearchOptions opt;
            opt.folds = config.folds;
            opt.grid = config.grid;
            opt.top_k = config.cv_topk;
            opt.seed = config.seed;
            opt.xcorr = xopt;
            const auto search = select_lambda_cv(data, opt);
            lambda = search.lambda;
            cv = cv_record(opt, search);
          }
          auto f = make_ranking_file(rank_channels(data, lambda, Split::train, xopt), config.seed);
          f.cv = std::move(cv);
          return f;
        }
        case RankingMethod::ccs:
          return make_ranking_file(ccs_rank(data, Split::train), config.seed);
        case RankingMethod::csp_rank:
          return make_ranking_file(csp_rank(data, Split::train), config.seed);
      }
      throw Error("unknown method");
    });
    stage("write", [&] { write_json(to_json(file), dir / "ranking.json"); });

    note("[" + name + "] eval-curve");
    const auto curve = stage("eval-curve:" + name, [&] {
      return accuracy_curve(data, std::span<const std::size_t>(file.order), config.ks, config.seed,
                            threads);
    });
    stage("write", [&] { write_text(curve_to_csv(curve), dir / "curve.csv"); });

    note("[" + name + "] minimal-subset");
    stage("minimal-subset:" + name, [&] {
      auto report = minimal_subset(curve, curve.reference, config.d, file.order);
      json sj = to_json(report);
      json table = json::array();
      for (double td : config.table_d) {
        const auto r = minimal_subset(curve, curve.reference, td, file.order);
        table.push_back({{"d", td}, {"k_m", r.k_m}});
        summary += name + "," + fmt17(td) + "," + std::to_string(r.k_m) + "," + fmt17(curve.reference) +
                   "," + fmt17(curve.at(r.k_m)) + "\n";
      }
      sj["table"] = std::move(table);
      write_json(sj, dir / "subset.json");
      results[name] = {{"lambda", file.lambda ? json(*file.lambda) : json(nullptr)},
                       {"k_m", report.k_m},
                       {"reference", curve.reference}};
    });

    note("[" + name + "] topomap");
    stage("topomap:" + name, [&] {
      const auto grid = topomap_grid(file.scores, data.layout(), config.topomap_resolution);
      write_json(to_json(grid, data.layout(), map_scores(file.scores)), dir / "topomap.json");
    });
  }

  stage("write", [&] {
    write_text(summary, out / "summary.csv");
    json run;
    run["tool"] = "chansel";
    run["version"] = kVersion;
    run["created_utc"] = utc_timestamp();
    run["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)},
                        {"fftw", std::string(fftw_version)}};
    run["classifier"] = "csp-lda";
    run["rank_split"] = "train";
    run["topomap_interpolation"] = kTopomapInterpolation;
    run["config"] = to_json(config);
    run["results"] = results;
    write_json(run, out / "run.json");
  });
}

}  // namespace chansel
