#include "chansel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "chansel/error.hpp"

namespace chansel {

void SynthConfig::validate() const {
  if (n_channels < 1) throw ValidationError("synthetic dataset needs at least one channel");
  for (auto c : informative) {
    if (c >= n_channels) {
      throw ValidationError("informative channel " + std::to_string(c) + " is outside [0, " +
                            std::to_string(n_channels) + ")");
    }
  }
  if (std::set<std::size_t>(informative.begin(), informative.end()).size() != informative.size()) {
    throw ValidationError("informative channels must be distinct");
  }
  if (n_trials_per_class < 1) throw ValidationError("need at least one trial per class");
  if (t_samples < 2) throw ValidationError("need at least two samples per trial");
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(carrier_hz > 0.0)) throw ValidationError("carrier frequency must be positive");
  if (!(modulation_depth > 0.0 && modulation_depth <= 1.0)) {
    throw ValidationError("modulation depth must lie in (0, 1]");
  }
  if (!(noise_sigma > 0.0)) throw ValidationError("noise sigma must be positive");
}

ChannelLayout synthetic_layout(std::size_t n_channels) {
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_channels))));
  const auto rows = (n_channels + cols - 1) / cols;
  auto coord = [](std::size_t i, std::size_t n) {
    return n == 1 ? 0.0 : -0.8 + 1.6 * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<Electrode> entries;
  entries.reserve(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const auto r = c / cols;
    const auto k = c % cols;
    char name[24];
    std::snprintf(name, sizeof name, "Ch%02zu", c);
    entries.push_back({name, coord(k, cols), -coord(r, rows)});
  }
  return ChannelLayout(std::move(entries));
}

EpochedDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto per_class = config.n_trials_per_class;
  const auto n = 2 * per_class;

  std::vector<Split> splits(n, Split::test);
  const auto n_train = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(per_class)));
  const auto n_val = std::min(per_class - n_train,
                              static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(per_class))));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = static_cast<std::size_t>(cls); i < n; i += 2) members.push_back(i);
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t p = 0; p < members.size(); ++p) {
      splits[members[p]] = p < n_train ? Split::train : (p < n_train + n_val ? Split::validation : Split::test);
    }
  }

  std::vector<bool> is_informative(config.n_channels, false);
  for (auto c : config.informative) is_informative[c] = true;

  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double omega = 2.0 * std::numbers::pi * config.carrier_hz / config.fs;
  const auto c = static_cast<Eigen::Index>(config.n_channels);
  const auto t = static_cast<Eigen::Index>(config.t_samples);

  std::vector<Trial> trials;
  trials.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double amp =
        kCarrierAmplitude * (label == 0 ? 1.0 + config.modulation_depth : 1.0 - config.modulation_depth);
    Trial trial{SignalMatrix(c, t), label, splits[i]};
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const bool carrier = is_informative[static_cast<std::size_t>(ch)];
      const double phi = carrier ? phase(rng) : 0.0;
      for (Eigen::Index s = 0; s < t; ++s) {
        double v = noise(rng);
        if (carrier) v += amp * std::sin(omega * static_cast<double>(s) + phi);
        trial.data(ch, s) = static_cast<double>(static_cast<float>(v));
      }
    }
    trials.push_back(std::move(trial));
  }
  return EpochedDataset(std::move(trials), config.fs, synthetic_layout(config.n_channels),
                        {"class0", "class1"});
}

}  // namespace chansel
