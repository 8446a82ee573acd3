#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "chansel/dataset.hpp"
#include "chansel/evaluation.hpp"
#include "chansel/xcdc.hpp"

namespace chansel {

/// (s - min) / (max - min). Throws ValidationError when all scores are equal
/// or any score is non-finite.
std::vector<double> normalize_scores(std::span<const double> scores);

/// Contents of ranking.json:
///   {"method", "lambda", "order", "scores", "r_w", "r_b", "seed", ...}
/// Non-finite numbers (degenerate channels) are written as null. lambda is
/// null and r_w / r_b are empty for the baseline methods.
struct RankingFile {
  RankingMethod method = RankingMethod::xcdc;
  std::optional<double> lambda;
  std::vector<std::size_t> order;
  std::vector<double> scores;
  std::vector<double> r_w;
  std::vector<double> r_b;
  std::uint64_t seed = 0;
  std::string rank_split = "train";
  /// Lambda search record (folds, grid, mean accuracies); null when lambda was fixed.
  nlohmann::json cv;

  ChannelRanking ranking() const;
};

RankingFile make_ranking_file(const XcdcResult& result, std::uint64_t seed);
RankingFile make_ranking_file(const ChannelRanking& ranking, std::uint64_t seed);

/// Lambda search record stored under "cv": folds, grid, top_k, seed, the
/// mean accuracy per grid value and the fold of each train-split trial.
nlohmann::json cv_record(const LambdaSearchOptions& options, const LambdaSearchResult& result);

nlohmann::json to_json(const RankingFile& file);
RankingFile ranking_from_json(const nlohmann::json& j);

/// curve.csv: header "k,accuracy", one row per k, accuracies printed with
/// 17 significant digits so they read back bit-exactly.
std::string curve_to_csv(const AccuracyCurve& curve);
AccuracyCurve curve_from_csv(const std::string& text);

nlohmann::json to_json(const MinimalSubsetReport& report);

/// Writes JSON with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

}  // namespace chansel
