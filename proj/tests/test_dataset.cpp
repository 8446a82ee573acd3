#include <doctest.h>

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "chansel/dataset.hpp"
#include "chansel/dataset_io.hpp"
#include "chansel/error.hpp"
#include "chansel/synth.hpp"
#include "support.hpp"

using namespace chansel;
using chansel::testing::TempDir;

namespace {

void write_manifest(const std::filesystem::path& dir, std::size_t c, std::size_t t) {
  nlohmann::json meta;
  meta["fs_hz"] = 100.0;
  meta["n_samples"] = t;
  meta["classes"] = {"left", "right"};
  meta["channels"] = nlohmann::json::array();
  for (std::size_t i = 0; i < c; ++i) {
    meta["channels"].push_back({{"name", "C" + std::to_string(i)}, {"x", 0.1 * i}, {"y", 0.0}});
  }
  std::ofstream(dir / kMetaFile) << meta.dump();
}

void write_blob(const std::filesystem::path& dir, std::size_t bytes) {
  std::ofstream out(dir / kTrialsFile, std::ios::binary);
  for (std::size_t i = 0; i < bytes / 4; ++i) {
    const float v = static_cast<float>(i) * 0.5f;
    const auto u = std::bit_cast<std::uint32_t>(v);
    const char b[4] = {static_cast<char>(u & 0xFF), static_cast<char>((u >> 8) & 0xFF),
                       static_cast<char>((u >> 16) & 0xFF), static_cast<char>(u >> 24)};
    out.write(b, 4);
  }
  for (std::size_t i = 0; i < bytes % 4; ++i) out.put('\0');
}

void write_labels(const std::filesystem::path& dir, std::size_t n) {
  std::ofstream out(dir / kLabelsFile);
  out << "trial,label,split\n";
  for (std::size_t i = 0; i < n; ++i) out << i << ',' << (i % 2) << ",train\n";
}

bool bit_equal(const EpochedDataset& a, const EpochedDataset& b) {
  if (a.n_trials() != b.n_trials() || a.n_channels() != b.n_channels() || a.n_samples() != b.n_samples()) {
    return false;
  }
  for (std::size_t i = 0; i < a.n_trials(); ++i) {
    for (Eigen::Index r = 0; r < a.trial(i).data.rows(); ++r) {
      for (Eigen::Index s = 0; s < a.trial(i).data.cols(); ++s) {
        if (std::bit_cast<std::uint64_t>(a.trial(i).data(r, s)) !=
            std::bit_cast<std::uint64_t>(b.trial(i).data(r, s))) {
          return false;
        }
      }
    }
  }
  return a == b;
}

}  // namespace

TEST_CASE("manifest with C=2, T=4 and a 96-byte blob loads three 2x4 trials") {
  TempDir dir("load");
  write_manifest(dir.path(), 2, 4);
  write_blob(dir.path(), 96);
  write_labels(dir.path(), 3);
  const auto ds = load_dataset(dir.path());
  CHECK(ds.n_trials() == 3);
  CHECK(ds.n_channels() == 2);
  CHECK(ds.n_samples() == 4);
  // trial-major, then channel, then time
  CHECK(ds.trial(1).data(0, 0) == 4.0);
  CHECK(ds.trial(2).data(1, 3) == 11.5);
  CHECK(ds.trial(1).label == 1);
}

TEST_CASE("a 95-byte blob is a dimension mismatch") {
  TempDir dir("short");
  write_manifest(dir.path(), 2, 4);
  write_blob(dir.path(), 95);
  write_labels(dir.path(), 3);
  CHECK_THROWS_AS(load_dataset(dir.path()), ValidationError);
}

TEST_CASE("missing files are I/O errors") {
  TempDir dir("missing");
  CHECK_THROWS_AS(load_dataset(dir.path()), IoError);
  write_manifest(dir.path(), 2, 4);
  CHECK_THROWS_AS(load_dataset(dir.path()), IoError);
}

TEST_CASE("label outside the class list is rejected") {
  TempDir dir("label");
  write_manifest(dir.path(), 2, 4);
  write_blob(dir.path(), 96);
  std::ofstream(dir.path() / kLabelsFile) << "trial,label,split\n0,0,train\n1,2,train\n2,1,test\n";
  CHECK_THROWS_AS(load_dataset(dir.path()), ValidationError);
}

TEST_CASE("non-finite samples are rejected on load") {
  TempDir dir("nan");
  write_manifest(dir.path(), 1, 2);
  {
    std::ofstream out(dir.path() / kTrialsFile, std::ios::binary);
    const float vals[4] = {1.0f, std::numeric_limits<float>::quiet_NaN(), 2.0f, 3.0f};
    for (float v : vals) {
      const auto u = std::bit_cast<std::uint32_t>(v);
      const char b[4] = {static_cast<char>(u & 0xFF), static_cast<char>((u >> 8) & 0xFF),
                         static_cast<char>((u >> 16) & 0xFF), static_cast<char>(u >> 24)};
      out.write(b, 4);
    }
  }
  write_labels(dir.path(), 2);
  CHECK_THROWS_AS(load_dataset(dir.path()), ValidationError);
}

TEST_CASE("fewer than two trials is invalid") {
  CHECK_THROWS_AS(EpochedDataset({}, 100.0, testing::line_layout(2), {"a", "b"}), ValidationError);
  std::vector<Trial> one{{SignalMatrix::Zero(2, 4), 0, Split::train}};
  CHECK_THROWS_AS(EpochedDataset(one, 100.0, testing::line_layout(2), {"a", "b"}), ValidationError);
}

TEST_CASE("save then load is bit-exact") {
  TempDir dir("roundtrip");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto ds = testing::random_dataset(7, 3, 33, seed);
    save_dataset(ds, dir.path() / std::to_string(seed));
    CHECK(bit_equal(load_dataset(dir.path() / std::to_string(seed)), ds));
  }
}

TEST_CASE("one-channel dataset round-trips") {
  TempDir dir("onech");
  const auto ds = testing::random_dataset(4, 1, 10, 9);
  save_dataset(ds, dir.path());
  const auto meta = nlohmann::json::parse(std::ifstream(dir.path() / kMetaFile));
  CHECK(meta["channels"].size() == 1);
  CHECK(bit_equal(load_dataset(dir.path()), ds));
}

TEST_CASE("synthetic dataset round-trips bit-exactly") {
  TempDir dir("synth");
  SynthConfig cfg;
  cfg.n_trials_per_class = 20;
  cfg.t_samples = 64;
  const auto ds = generate_synthetic(cfg);
  save_dataset(ds, dir.path());
  CHECK(bit_equal(load_dataset(dir.path()), ds));
}

TEST_CASE("splits and subsets") {
  const auto ds = testing::random_dataset(10, 2, 8, 4);
  CHECK(ds.count(Split::test) == 2);
  CHECK(ds.count(Split::train) == 8);
  const auto test = ds.restrict_to(Split::test);
  CHECK(test.n_trials() == 2);
  CHECK(test.trial(0).data == ds.trial(4).data);
  CHECK_THROWS_AS(ds.restrict_to(Split::validation), ValidationError);
  const std::vector<std::size_t> rows{1, 0};
  const auto swapped = ds.select_channels(rows);
  CHECK(swapped.trial(3).data.row(0) == ds.trial(3).data.row(1));
  CHECK(swapped.layout()[0].name == "E1");
}

TEST_CASE("split names parse and print") {
  for (auto s : {Split::train, Split::validation, Split::test}) CHECK(parse_split(to_string(s)) == s);
  CHECK_THROWS_AS(parse_split("holdout"), ValidationError);
}

TEST_CASE("ranking from scores sorts descending with index ties") {
  const auto r = ChannelRanking::from_scores({0.2, 0.9, 0.5}, RankingMethod::xcdc);
  CHECK(r.order() == std::vector<std::size_t>{1, 2, 0});
  const auto tie = ChannelRanking::from_scores({1.0, 3.0, 1.0, 3.0}, RankingMethod::ccs);
  CHECK(tie.order() == std::vector<std::size_t>{1, 3, 0, 2});
  const double inf = std::numeric_limits<double>::infinity();
  const auto deg = ChannelRanking::from_scores({-inf, 0.0, -1.0}, RankingMethod::xcdc);
  CHECK(deg.order() == std::vector<std::size_t>{1, 2, 0});
  CHECK_THROWS_AS(ChannelRanking::from_scores({0.0, std::nan("")}, RankingMethod::xcdc), ValidationError);
}

TEST_CASE("ranking constructor rejects bad orders") {
  CHECK_THROWS_AS(ChannelRanking({0, 0}, {1.0, 2.0}, RankingMethod::xcdc), ValidationError);
  CHECK_THROWS_AS(ChannelRanking({0, 1}, {1.0, 2.0}, RankingMethod::xcdc), ValidationError);
  // equal scores must list the lower index first
  CHECK_THROWS_AS(ChannelRanking({1, 0}, {1.0, 1.0}, RankingMethod::xcdc), ValidationError);
  CHECK_NOTHROW(ChannelRanking({1, 0}, {1.0, 2.0}, RankingMethod::xcdc));
  CHECK(is_permutation_of_indices(std::vector<std::size_t>{2, 0, 1}, 3));
  CHECK_FALSE(is_permutation_of_indices(std::vector<std::size_t>{2, 0, 3}, 3));
}

TEST_CASE("layout rejects duplicate names") {
  CHECK_THROWS_AS(ChannelLayout({{"A", 0, 0}, {"A", 1, 1}}), ValidationError);
  const ChannelLayout l({{"A", 0, 0}, {"B", 1, 1}});
  CHECK(l.index_of("B") == 1u);
  CHECK_FALSE(l.index_of("Z").has_value());
}
