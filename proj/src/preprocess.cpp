#include "chansel/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chansel/error.hpp"

namespace chansel {
namespace {

using cplx = std::complex<double>;

void require_finite(std::span<const double> signal) {
  for (double v : signal) {
    if (!std::isfinite(v)) throw ValidationError("signal contains a non-finite sample");
  }
}

}  // namespace

void BandpassSpec::validate(double fs) const {
  if (order < 1) throw ValidationError("filter order must be >= 1");
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(low_hz > 0.0) || !(low_hz < high_hz)) {
    throw ValidationError("band edges must satisfy 0 < low < high");
  }
  if (!(high_hz < fs / 2.0)) {
    throw ValidationError("high cutoff " + std::to_string(high_hz) +
                          " Hz is not below the Nyquist frequency " + std::to_string(fs / 2.0) +
                          " Hz");
  }
}

std::vector<Biquad> design_butterworth_bandpass(double fs, const BandpassSpec& spec) {
  spec.validate(fs);
  const int n = spec.order;
  const double fs2 = 2.0 * fs;

  // Prewarped analog band edges.
  const double wl = fs2 * std::tan(std::numbers::pi * spec.low_hz / fs);
  const double wh = fs2 * std::tan(std::numbers::pi * spec.high_hz / fs);
  const double bw = wh - wl;
  const double w0_sq = wl * wh;

  // Normalized lowpass prototype poles on the left half of the unit circle,
  // each mapped to a pair of bandpass poles whose product is w0^2.
  std::vector<cplx> analog_poles;
  analog_poles.reserve(2 * static_cast<std::size_t>(n));
  for (int m = -n + 1; m <= n - 1; m += 2) {
    const cplx p = -std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * n)));
    const cplx half = p * (bw / 2.0);
    const cplx disc = std::sqrt(half * half - w0_sq);
    cplx big = half + disc;
    if (std::abs(half - disc) > std::abs(big)) big = half - disc;
    analog_poles.push_back(big);
    analog_poles.push_back(w0_sq / big);
  }

  // Bilinear transform. The n analog zeros at s = 0 go to z = 1 and the n
  // zeros at infinity to z = -1.
  std::vector<cplx> poles;
  poles.reserve(analog_poles.size());
  cplx denom = 1.0;
  for (const auto& p : analog_poles) {
    poles.push_back((fs2 + p) / (fs2 - p));
    denom *= (fs2 - p);
  }
  const double gain = (std::pow(bw, n) * std::pow(fs2, n) / denom).real();

  // Pair conjugates (imag > 0 with its mirror) and leftover real poles.
  std::vector<cplx> upper;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) <= 1e-14 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  std::sort(reals.begin(), reals.end());
  if (reals.size() % 2 != 0 || upper.size() * 2 + reals.size() != poles.size()) {
    throw Error("bandpass design produced unpaired poles");
  }

  std::vector<Biquad> sections;
  for (const auto& p : upper) {
    sections.push_back({{1.0, 0.0, -1.0}, {1.0, -2.0 * p.real(), std::norm(p)}});
  }
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    sections.push_back(
        {{1.0, 0.0, -1.0}, {1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]}});
  }
  for (auto& coef : sections.front().b) coef *= gain;
  return sections;
}

std::complex<double> sos_response(std::span<const Biquad> sections, double f_hz, double fs) {
  const cplx zinv = std::exp(cplx(0.0, -2.0 * std::numbers::pi * f_hz / fs));
  const cplx zinv2 = zinv * zinv;
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b[0] + s.b[1] * zinv + s.b[2] * zinv2) / (s.a[0] + s.a[1] * zinv + s.a[2] * zinv2);
  }
  return h;
}

std::vector<double> sos_filter(std::span<const Biquad> sections, std::span<const double> signal) {
  std::vector<double> y(signal.begin(), signal.end());
  for (const auto& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b[0] * x + z1;
      z1 = s.b[1] * x - s.a[1] * out + z2;
      z2 = s.b[2] * x - s.a[2] * out;
      v = out;
    }
  }
  return y;
}

std::size_t min_filter_length(const BandpassSpec& spec) {
  return 3 * (2 * static_cast<std::size_t>(std::max(spec.order, 1)) + 1);
}

std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs,
                                         const BandpassSpec& spec) {
  spec.validate(fs);
  if (signal.size() < min_filter_length(spec)) {
    throw ValidationError("signal of " + std::to_string(signal.size()) +
                          " samples is shorter than the filter minimum of " +
                          std::to_string(min_filter_length(spec)));
  }
  require_finite(signal);
  const auto sections = design_butterworth_bandpass(fs, spec);
  auto y = sos_filter(sections, signal);
  if (spec.zero_phase) {
    std::reverse(y.begin(), y.end());
    y = sos_filter(sections, y);
    std::reverse(y.begin(), y.end());
  }
  return y;
}

std::vector<double> decimate(std::span<const double> signal, int factor) {
  if (factor < 1) throw ValidationError("decimation factor must be >= 1");
  std::vector<double> out;
  out.reserve((signal.size() + static_cast<std::size_t>(factor) - 1) / static_cast<std::size_t>(factor));
  for (std::size_t i = 0; i < signal.size(); i += static_cast<std::size_t>(factor)) {
    out.push_back(signal[i]);
  }
  return out;
}

Trial crop(const Trial& trial, double fs, double t0, double t1) {
  if (!(t0 >= 0.0) || !(t1 > t0)) throw ValidationError("crop window needs 0 <= t0 < t1");
  const long i0 = std::lround(t0 * fs);
  const long i1 = std::lround(t1 * fs);
  if (i1 > static_cast<long>(trial.n_samples()) || i1 <= i0) {
    throw ValidationError("crop window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                          ") s lies outside a trial of " + std::to_string(trial.n_samples()) +
                          " samples at " + std::to_string(fs) + " Hz");
  }
  return Trial{trial.data.middleCols(i0, i1 - i0), trial.label, trial.split};
}

void zscore_into(std::span<const double> signal, std::span<double> out) {
  const auto n = static_cast<double>(signal.size());
  if (signal.empty()) throw ValidationError("cannot z-score an empty signal");
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= n;
  // The mean is carried as mean + low: a single double leaves a shared
  // rounding bias of up to half an ulp in every residual, which dominates
  // when the offset is large relative to the spread.
  double low = 0.0;
  for (double v : signal) low += v - mean;
  mean += low / n;
  low = 0.0;
  for (double v : signal) low += v - mean;
  low /= n;

  double ss = 0.0;
  for (double v : signal) {
    const double r = (v - mean) - low;
    ss += r * r;
  }
  const double sd = std::sqrt(ss / n);
  if (!(sd > kZscoreTolerance)) {
    throw ValidationError("cannot z-score a constant signal");
  }
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = ((signal[i] - mean) - low) / sd;
}

std::vector<double> zscore(std::span<const double> signal) {
  std::vector<double> out(signal.size());
  zscore_into(signal, out);
  return out;
}

EpochedDataset zscore_channels(const EpochedDataset& dataset, Split stats_split) {
  auto stats_idx = dataset.indices_of(stats_split);
  if (stats_idx.empty()) {
    stats_idx.resize(dataset.n_trials());
    for (std::size_t i = 0; i < stats_idx.size(); ++i) stats_idx[i] = i;
  }
  const auto c = dataset.n_channels();
  const double count = static_cast<double>(stats_idx.size() * dataset.n_samples());
  std::vector<double> mean(c, 0.0);
  std::vector<double> sd(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (auto i : stats_idx) {
      for (double v : dataset.trial(i).channel(ch)) sum += v;
    }
    mean[ch] = sum / count;
    double ss = 0.0;
    for (auto i : stats_idx) {
      for (double v : dataset.trial(i).channel(ch)) ss += (v - mean[ch]) * (v - mean[ch]);
    }
    sd[ch] = std::sqrt(ss / count);
  }

  std::vector<Trial> trials = dataset.trials();
  for (auto& t : trials) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      auto row = t.data.row(static_cast<Eigen::Index>(ch));
      row.array() -= mean[ch];
      // A flat electrode is only centered; the rankers deal with it downstream.
      if (sd[ch] > kZscoreTolerance) row /= sd[ch];
    }
  }
  return EpochedDataset(std::move(trials), dataset.fs(), dataset.layout(), dataset.class_names());
}

EpochedDataset preprocess(const EpochedDataset& dataset, const PreprocessConfig& config) {
  const double fs = dataset.fs();
  config.band.validate(fs);
  if (!(config.target_fs > 0.0) || config.target_fs > fs) {
    throw ValidationError("target rate must be in (0, fs]");
  }
  const double ratio = fs / config.target_fs;
  const int factor = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - factor) > 1e-9 * ratio) {
    throw ValidationError("sampling rate " + std::to_string(fs) +
                          " Hz is not an integer multiple of the target " +
                          std::to_string(config.target_fs) + " Hz");
  }
  if (!(config.band.high_hz < config.target_fs / 2.0)) {
    throw ValidationError("pass band must lie below the post-decimation Nyquist frequency");
  }

  const auto sections = design_butterworth_bandpass(fs, config.band);
  if (dataset.n_samples() < min_filter_length(config.band)) {
    throw ValidationError("trials are shorter than the filter minimum length");
  }
  const auto decimated_len =
      static_cast<Eigen::Index>((dataset.n_samples() + static_cast<std::size_t>(factor) - 1) /
                                static_cast<std::size_t>(factor));

  std::vector<Trial> out;
  out.reserve(dataset.n_trials());
  for (const auto& t : dataset.trials()) {
    Trial d{SignalMatrix(t.data.rows(), decimated_len), t.label, t.split};
    for (std::size_t ch = 0; ch < t.n_channels(); ++ch) {
      auto y = sos_filter(sections, t.channel(ch));
      if (config.band.zero_phase) {
        std::reverse(y.begin(), y.end());
        y = sos_filter(sections, y);
        std::reverse(y.begin(), y.end());
      }
      const auto dec = decimate(y, factor);
      d.data.row(static_cast<Eigen::Index>(ch)) =
          Eigen::Map<const Eigen::RowVectorXd>(dec.data(), static_cast<Eigen::Index>(dec.size()));
    }
    out.push_back(crop(d, config.target_fs, config.window_start_s, config.window_end_s));
  }
  EpochedDataset result(std::move(out), config.target_fs, dataset.layout(), dataset.class_names());
  if (config.channel_zscore) return zscore_channels(result, Split::train);
  return result;
}

}  // namespace chansel
