#include "chansel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "chansel/error.hpp"

namespace chansel {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> numbers(const json& arr, double null_value) {
  std::vector<double> out;
  for (const auto& v : arr) out.push_back(v.is_null() ? null_value : v.get<double>());
  return out;
}

json number_array(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(number_or_null(v));
  return arr;
}

}  // namespace

std::vector<double> normalize_scores(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("no scores to normalize");
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("cannot normalize a non-finite score");
  }
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo;
  const double max = *hi;
  if (!(max > min)) throw ValidationError("cannot normalize scores that are all equal");
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back((s - min) / (max - min));
  return out;
}

ChannelRanking RankingFile::ranking() const { return ChannelRanking(order, scores, method); }

RankingFile make_ranking_file(const XcdcResult& result, std::uint64_t seed) {
  RankingFile f = make_ranking_file(result.ranking, seed);
  f.lambda = result.discriminant.lambda;
  for (const auto& ch : result.discriminant.per_channel) {
    f.r_w.push_back(ch.r_w);
    f.r_b.push_back(ch.r_b);
  }
  return f;
}

RankingFile make_ranking_file(const ChannelRanking& ranking, std::uint64_t seed) {
  RankingFile f;
  f.method = ranking.method();
  f.order = ranking.order();
  f.scores = ranking.scores();
  f.seed = seed;
  return f;
}

json cv_record(const LambdaSearchOptions& options, const LambdaSearchResult& result) {
  return {{"folds", options.folds},
          {"grid", options.grid},
          {"top_k", options.top_k},
          {"seed", options.seed},
          {"mean_accuracy", result.mean_accuracy},
          {"fold_of", result.fold_of}};
}

json to_json(const RankingFile& file) {
  json j;
  j["method"] = std::string(to_string(file.method));
  j["lambda"] = file.lambda ? json(*file.lambda) : json(nullptr);
  j["order"] = file.order;
  j["scores"] = number_array(file.scores);
  j["r_w"] = number_array(file.r_w);
  j["r_b"] = number_array(file.r_b);
  j["seed"] = file.seed;
  j["rank_split"] = file.rank_split;
  j["cv"] = file.cv;
  return j;
}

RankingFile ranking_from_json(const json& j) {
  try {
    RankingFile f;
    f.method = parse_ranking_method(j.at("method").get<std::string>());
    if (!j.at("lambda").is_null()) f.lambda = j.at("lambda").get<double>();
    f.order = j.at("order").get<std::vector<std::size_t>>();
    f.scores = numbers(j.at("scores"), -std::numeric_limits<double>::infinity());
    f.r_w = numbers(j.at("r_w"), std::numeric_limits<double>::quiet_NaN());
    f.r_b = numbers(j.at("r_b"), std::numeric_limits<double>::quiet_NaN());
    f.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rank_split")) f.rank_split = j.at("rank_split").get<std::string>();
    if (j.contains("cv")) f.cv = j.at("cv");
    // Validates permutation and ordering.
    (void)f.ranking();
    return f;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ranking file: ") + e.what());
  }
}

std::string curve_to_csv(const AccuracyCurve& curve) {
  std::string out = "k,accuracy\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", curve.ks[i], curve.accuracies[i]);
    out += buf;
  }
  return out;
}

AccuracyCurve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("curve file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,accuracy") throw ValidationError("curve file must start with 'k,accuracy'");
  AccuracyCurve curve;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("malformed curve row '" + line + "'");
    try {
      curve.ks.push_back(std::stoul(line.substr(0, comma)));
      curve.accuracies.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw ValidationError("malformed curve row '" + line + "'");
    }
  }
  if (curve.ks.empty()) throw ValidationError("curve file has no rows");
  for (std::size_t i = 1; i < curve.ks.size(); ++i) {
    if (curve.ks[i] <= curve.ks[i - 1]) throw ValidationError("curve k values must increase");
  }
  curve.reference = curve.accuracies.back();
  return curve;
}

json to_json(const MinimalSubsetReport& report) {
  json j;
  j["k_m"] = report.k_m;
  j["d"] = report.constraint_d;
  j["reference"] = report.reference;
  j["threshold"] = report.reference * (1.0 - report.constraint_d);
  j["admissible"] = report.admissible;
  j["channels"] = report.channels;
  return j;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed on " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const json& j, const std::filesystem::path& path) {
  write_text(j.dump(2) + "\n", path);
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace chansel
