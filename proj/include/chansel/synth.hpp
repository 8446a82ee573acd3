#pragma once

#include <cstdint>
#include <vector>

#include "chansel/dataset.hpp"

namespace chansel {

/// Planted-channel synthetic MI-like data.
///
/// Every channel carries white noise of standard deviation noise_sigma.
/// Informative channels add a carrier_hz sinusoid with a fresh uniform
/// phase per (trial, channel); its amplitude is (1 + depth) * A for class 0
/// and (1 - depth) * A for class 1, with A = sqrt(2) so the unmodulated
/// carrier has unit power, equal to the noise power at noise_sigma = 1.
/// Raising noise_sigma lowers the per-channel SNR.
struct SynthConfig {
  std::size_t n_channels = 16;
  std::vector<std::size_t> informative{2, 7, 11};
  std::size_t n_trials_per_class = 150;
  std::size_t t_samples = 400;
  double fs = 100.0;
  double carrier_hz = 10.0;
  double modulation_depth = 0.5;
  double noise_sigma = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Unmodulated carrier amplitude A.
inline constexpr double kCarrierAmplitude = 1.4142135623730951;

/// Deterministic in `seed`. Generator stream consumption, one
/// std::mt19937_64 in this order:
///   1. split assignment: class 0's trial list is shuffled, then class 1's;
///      the first round(0.7 n) of each become train, the next round(0.1 n)
///      validation, the rest test;
///   2. trials in order (labels alternate 0, 1, 0, ...); within a trial,
///      channels in order; an informative channel draws its phase first,
///      then T noise samples.
/// Samples are rounded to float32 so the dataset survives save/load exactly.
EpochedDataset generate_synthetic(const SynthConfig& config);

/// Grid layout inside the unit square, rows front to back, names "Ch00"...
ChannelLayout synthetic_layout(std::size_t n_channels);

}  // namespace chansel
