#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace chansel {

/// r(k) for consecutive lags; values[j] holds lag j + lag_offset.
struct LagSeries {
  std::vector<double> values;
  long lag_offset = 0;

  long first_lag() const { return lag_offset; }
  long last_lag() const { return lag_offset + static_cast<long>(values.size()) - 1; }
  double at(long lag) const { return values.at(static_cast<std::size_t>(lag - lag_offset)); }
  /// Lag of the largest value; the most negative such lag on ties.
  long argmax() const;
};

/// Pairwise trial similarities for one channel. Symmetric by construction.
struct SimilarityMatrix {
  Eigen::MatrixXd values;
  std::size_t channel = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

struct XcorrOptions {
  /// Restricts the lag search to |k| <= max_lag; unset means every lag
  /// in [-(T-1), T-1].
  std::optional<std::size_t> max_lag;
  /// Pair-level workers; 0 = hardware concurrency.
  unsigned threads = 1;
};

/// r(k) = sum_i x(i) y(i + k) for k in [-(T-1), T-1], terms with i + k
/// outside [0, T) taking y as zero. Evaluated directly, O(T^2).
LagSeries xcorr_full(std::span<const double> x, std::span<const double> y);

/// Maximum of the signed cross-correlation over the lag window, evaluated
/// directly from the definition.
double similarity(std::span<const double> x, std::span<const double> y,
                  std::optional<std::size_t> max_lag = std::nullopt);

/// Direct O(N^2 T^2) pairwise matrix. Kept as the reference the FFT engine
/// is checked and benchmarked against.
SimilarityMatrix naive_pairwise_similarity(std::span<const std::span<const double>> trials,
                                           const XcorrOptions& options = {});

/// Frequency-domain pairwise similarity for trials of a fixed length.
///
/// Each trial is transformed once (zero-padded to the next power of two
/// >= 2T-1); every pair i <= j then costs one spectrum product, one inverse
/// real FFT and a max scan over the lag window. Pairs are distributed over
/// workers by row; each entry is written by exactly one worker and its value
/// does not depend on the worker count.
class SimilarityEngine {
 public:
  explicit SimilarityEngine(std::size_t n_samples, XcorrOptions options = {});
  ~SimilarityEngine();
  SimilarityEngine(SimilarityEngine&&) noexcept;
  SimilarityEngine& operator=(SimilarityEngine&&) noexcept;
  SimilarityEngine(const SimilarityEngine&) = delete;
  SimilarityEngine& operator=(const SimilarityEngine&) = delete;

  std::size_t n_samples() const;
  std::size_t fft_length() const;

  SimilarityMatrix pairwise(std::span<const std::span<const double>> trials,
                            std::size_t channel = 0) const;
  /// Full lag series via the FFT path; used to test the engine against xcorr_full.
  LagSeries xcorr(std::span<const double> x, std::span<const double> y) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper building a SimilarityEngine for the trials' length.
SimilarityMatrix pairwise_similarity(std::span<const std::span<const double>> trials,
                                     const XcorrOptions& options = {});

std::size_t next_pow2(std::size_t n);

}  // namespace chansel
