#include <doctest.h>

#include <fstream>
#include <sstream>

#include "chansel/dataset_io.hpp"
#include "chansel/error.hpp"
#include "chansel/pipeline.hpp"
#include "chansel/report.hpp"
#include "chansel/synth.hpp"
#include "chansel/topomap.hpp"
#include "support.hpp"

using namespace chansel;
using chansel::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("\"created_utc\"") == std::string::npos) out += line + "\n";
  }
  return out;
}

std::vector<fs::path> bundle_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_small_dataset(const fs::path& dir) {
  SynthConfig cfg;
  cfg.n_channels = 6;
  cfg.informative = {1, 4};
  cfg.n_trials_per_class = 30;
  cfg.t_samples = 100;
  cfg.noise_sigma = 2.5;
  save_dataset(generate_synthetic(cfg), dir);
}

nlohmann::json small_config(const fs::path& dataset) {
  return {{"dataset", dataset.string()},
          {"methods", {"xcdc", "ccs", "csp-rank"}},
          {"lambda", "auto"},
          {"folds", 3},
          {"grid", {0.0, 0.5, 1.0}},
          {"cv_topk", 2},
          {"seed", 5},
          {"d", 0.01},
          {"topomap_resolution", 16}};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_run_config({{"dataset", "x"}});
  CHECK(c.methods.size() == 3);
  CHECK_FALSE(c.lambda.has_value());
  CHECK(c.grid.size() == 11);
  CHECK(parse_run_config({{"dataset", "x"}, {"lambda", 0.25}}).lambda == 0.25);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"lamda", 0.25}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"lambda", "best"}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"lambda", 2.0}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"methods", {"pca"}}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"methods", {"ccs", "ccs"}}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"methods", {"ccs"}}}), ValidationError);
  CHECK_THROWS_AS(parse_run_config({{"dataset", "x"}, {"preprocess", {{"band", {1, 2}}}}}), ValidationError);
  const auto p = parse_run_config({{"dataset", "x"}, {"preprocess", {{"band_hz", {1, 20}}, {"target_fs", 50}}}});
  REQUIRE(p.preprocess.has_value());
  CHECK(p.preprocess->band.high_hz == 20.0);
  CHECK(p.preprocess->target_fs == 50.0);
  // resolved form parses back to the same thing
  CHECK(to_json(parse_run_config(to_json(p))) == to_json(p));
}

TEST_CASE("bundle fan-out, determinism and re-execution from run.json") {
  TempDir tmp("bundle");
  const auto data = tmp.path() / "data";
  write_small_dataset(data);
  const auto config = parse_run_config(small_config(data));

  run_pipeline(config, tmp.path() / "a", 1);
  const auto files = bundle_files(tmp.path() / "a");
  for (const char* m : {"xcdc", "ccs", "csp-rank"}) {
    for (const char* f : {"ranking.json", "curve.csv", "subset.json", "topomap.json"}) {
      CHECK(std::find(files.begin(), files.end(), fs::path(m) / f) != files.end());
    }
  }
  CHECK(std::find(files.begin(), files.end(), fs::path("run.json")) != files.end());
  CHECK(std::find(files.begin(), files.end(), fs::path("summary.csv")) != files.end());

  const auto run = read_json(tmp.path() / "a" / "run.json");
  CHECK(run["topomap_interpolation"] == kTopomapInterpolation);
  CHECK(run["config"]["seed"] == 5);
  CHECK(run["config"]["ks"].size() == 6);
  const auto subset = read_json(tmp.path() / "a" / "xcdc" / "subset.json");
  CHECK(subset["d"] == 0.01);
  CHECK(subset["table"].size() == 3);
  const auto ranking = read_json(tmp.path() / "a" / "xcdc" / "ranking.json");
  CHECK(ranking["cv"]["fold_of"].size() == 42);

  run_pipeline(config, tmp.path() / "b", 1);
  run_pipeline(config, tmp.path() / "c", 3);
  run_pipeline(load_run_config(tmp.path() / "a" / "run.json"), tmp.path() / "d", 2);
  for (const char* other : {"b", "c", "d"}) {
    CHECK(bundle_files(tmp.path() / other) == files);
    for (const auto& f : files) {
      const auto a = slurp(tmp.path() / "a" / f);
      const auto b = slurp(tmp.path() / other / f);
      if (f == "run.json") {
        CHECK(without_timestamp(a) == without_timestamp(b));
      } else {
        CHECK_MESSAGE(a == b, f.string() << " differs in bundle " << other);
      }
    }
  }
}

TEST_CASE("stage failures name the stage") {
  TempDir tmp("fail");
  auto cfg = parse_run_config({{"dataset", (tmp.path() / "missing").string()}});
  try {
    run_pipeline(cfg, tmp.path() / "out");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("stage 'load'") != std::string::npos);
  }

  write_small_dataset(tmp.path() / "data");
  cfg = parse_run_config({{"dataset", (tmp.path() / "data").string()},
                          {"methods", {"ccs"}},
                          {"preprocess", {{"target_fs", 30}}}});
  try {
    run_pipeline(cfg, tmp.path() / "out2");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stage 'preprocess'") != std::string::npos);
  }

  cfg = parse_run_config({{"dataset", (tmp.path() / "data").string()}, {"methods", {"ccs"}}, {"ks", {1, 9}}});
  try {
    run_pipeline(cfg, tmp.path() / "out3");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stage 'eval-curve:ccs'") != std::string::npos);
  }
}
