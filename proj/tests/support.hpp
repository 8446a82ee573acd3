#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "chansel/dataset.hpp"

namespace chansel::testing {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("chansel_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ChannelLayout line_layout(std::size_t c) {
  std::vector<Electrode> e;
  for (std::size_t i = 0; i < c; ++i) {
    e.push_back({"E" + std::to_string(i), -0.5 + static_cast<double>(i) / static_cast<double>(c),
                 0.1 * static_cast<double>(i % 3)});
  }
  return ChannelLayout(std::move(e));
}

// Gaussian noise trials, labels alternating, split pattern train-heavy.
inline EpochedDataset random_dataset(std::size_t n, std::size_t c, std::size_t t, std::uint64_t seed,
                                     bool float_exact = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Trial> trials;
  for (std::size_t i = 0; i < n; ++i) {
    Trial tr{SignalMatrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)),
             static_cast<int>(i % 2), i % 5 == 4 ? Split::test : Split::train};
    for (Eigen::Index r = 0; r < tr.data.rows(); ++r) {
      for (Eigen::Index s = 0; s < tr.data.cols(); ++s) {
        const double v = g(rng);
        tr.data(r, s) = float_exact ? static_cast<double>(static_cast<float>(v)) : v;
      }
    }
    trials.push_back(std::move(tr));
  }
  return EpochedDataset(std::move(trials), 100.0, line_layout(c), {"a", "b"});
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace chansel::testing
