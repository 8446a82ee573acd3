#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "chansel/dataset.hpp"

namespace chansel {

struct BandpassSpec {
  double low_hz = 0.1;
  double high_hz = 30.0;
  int order = 2;
  /// Forward then backward pass; squares the magnitude response.
  bool zero_phase = false;

  /// Throws ValidationError unless 0 < low < high < fs/2 and order >= 1.
  void validate(double fs) const;
};

/// One second-order section, a[0] == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};
};

/// Butterworth bandpass of the given prototype order (2*order poles),
/// designed by bilinear transform with both band edges prewarped so the
/// digital response is exactly -3 dB at low_hz and high_hz.
std::vector<Biquad> design_butterworth_bandpass(double fs, const BandpassSpec& spec);

/// Complex response of a cascade at frequency f_hz.
std::complex<double> sos_response(std::span<const Biquad> sections, double f_hz, double fs);

/// Causal cascade with zero initial state.
std::vector<double> sos_filter(std::span<const Biquad> sections, std::span<const double> signal);

/// Shortest signal accepted by butterworth_bandpass: 3 * (2 * order + 1)
/// samples, the usual transient/padding length for a filter of that size.
std::size_t min_filter_length(const BandpassSpec& spec);

std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs,
                                         const BandpassSpec& spec);

/// Keeps indices 0, factor, 2*factor, ...; no anti-alias filtering.
std::vector<double> decimate(std::span<const double> signal, int factor);

/// Samples [round(t0*fs), round(t1*fs)) of every channel.
Trial crop(const Trial& trial, double fs, double t0, double t1);

inline constexpr double kZscoreTolerance = 1e-12;

/// (x - mean) / std with the population (divide-by-T) standard deviation.
/// Throws ValidationError when std <= kZscoreTolerance.
std::vector<double> zscore(std::span<const double> signal);
/// In-place variant used by hot loops; same contract.
void zscore_into(std::span<const double> signal, std::span<double> out);

struct PreprocessConfig {
  BandpassSpec band;
  /// Output rate; fs / target_fs must be an integer.
  double target_fs = 100.0;
  double window_start_s = 0.0;
  double window_end_s = 4.0;
  /// Per-channel z-score using statistics pooled over the train split.
  bool channel_zscore = true;
};

/// Per-channel z-score across trials. Mean and std come from the trials in
/// `stats_split` (all trials if that split is empty) and are applied to every trial.
EpochedDataset zscore_channels(const EpochedDataset& dataset, Split stats_split = Split::train);

/// bandpass -> decimate -> crop -> channel z-score, in that order.
EpochedDataset preprocess(const EpochedDataset& dataset, const PreprocessConfig& config);

}  // namespace chansel
