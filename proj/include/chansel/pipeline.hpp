#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "chansel/dataset.hpp"
#include "chansel/preprocess.hpp"

namespace chansel {

inline constexpr const char* kVersion = "1.0.0";

/// Run configuration. JSON schema (all keys except "dataset" optional):
///   dataset             path to a dataset directory
///   preprocess          null, or {"band_hz": [lo, hi], "order", "zero_phase",
///                       "target_fs", "window_s": [t0, t1], "channel_zscore"}
///   methods             subset of ["xcdc", "ccs", "csp-rank"]
///   lambda              "auto" (cross-validated) or a number in [0, 1]
///   folds, grid, cv_topk  lambda search settings
///   max_lag             null or a lag bound for the similarity
///   seed                fold-assignment seed
///   ks                  null (default schedule) or increasing channel counts
///   d                   accuracy decrease for subset.json
///   table_d             decreases tabulated in summary.csv
///   topomap_resolution  grid size, >= 8
/// A run.json written by run_pipeline is also accepted; its "config" member
/// is used.
struct RunConfig {
  std::filesystem::path dataset;
  std::optional<PreprocessConfig> preprocess;
  std::vector<RankingMethod> methods{RankingMethod::xcdc, RankingMethod::ccs,
                                     RankingMethod::csp_rank};
  /// Unset means cross-validated.
  std::optional<double> lambda;
  int folds = 10;
  std::vector<double> grid;
  std::size_t cv_topk = 3;
  std::optional<std::size_t> max_lag;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ks;
  double d = 0.01;
  std::vector<double> table_d{0.05, 0.01, 0.0};
  std::size_t topomap_resolution = 64;

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Bundle layout under `out`:
///   run.json                     versions, timestamp, resolved config, per-method results
///   summary.csv                  method,d,k_m,reference,accuracy_at_k_m
///   <method>/ranking.json
///   <method>/curve.csv
///   <method>/subset.json
///   <method>/topomap.json
/// `threads` only affects speed; outputs do not depend on it and it is not
/// recorded. Any stage failure is rethrown with the stage name prefixed,
/// keeping the original error category.
void run_pipeline(const RunConfig& config, const std::filesystem::path& out, unsigned threads = 1,
                  std::ostream* log = nullptr);

}  // namespace chansel
