#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chansel/dataset.hpp"

namespace chansel {

struct AccuracyCurve {
  std::vector<std::size_t> ks;
  std::vector<double> accuracies;
  /// Accuracy with every channel.
  double reference = 0.0;
  std::uint64_t seed = 0;

  /// Accuracy recorded for k; throws if k is not on the curve.
  double at(std::size_t k) const;
};

struct MinimalSubsetReport {
  std::size_t k_m = 0;
  double constraint_d = 0.0;
  double reference = 0.0;
  std::vector<std::size_t> admissible;
  /// Top-k_m channels of the ranking, when one was supplied.
  std::vector<std::size_t> channels;
};

/// `channels` reordered front-to-back (descending y), then left-to-right,
/// then by index. Classifier inputs always use this row order.
std::vector<std::size_t> spatial_order(const ChannelLayout& layout,
                                       std::span<const std::size_t> channels);

/// Trains the evaluation classifier on every trial of `train` restricted to
/// `channels` and returns its accuracy on every trial of `test`.
double subset_accuracy(const EpochedDataset& train, const EpochedDataset& test,
                       std::span<const std::size_t> channels);

/// 1..C when C < 20; otherwise 1..19 followed by a geometric schedule
/// (ratio 1.25) that always ends at C.
std::vector<std::size_t> default_ks(std::size_t n_channels);

/// Test-split accuracy using the top-k channels of `order` for each k,
/// training on the train split. `reference` is the all-channel accuracy.
AccuracyCurve accuracy_curve(const EpochedDataset& dataset, std::span<const std::size_t> order,
                             std::span<const std::size_t> ks, std::uint64_t seed = 0,
                             unsigned threads = 1);
AccuracyCurve accuracy_curve(const EpochedDataset& dataset, const ChannelRanking& ranking,
                             std::span<const std::size_t> ks, std::uint64_t seed = 0,
                             unsigned threads = 1);

/// A = {k in curve.ks : a_k >= reference * (1 - d)}, k_m = min A.
/// Throws ValidationError when A is empty or d lies outside [0, 1].
MinimalSubsetReport minimal_subset(const AccuracyCurve& curve, double reference, double d,
                                   std::span<const std::size_t> order = {});

}  // namespace chansel
