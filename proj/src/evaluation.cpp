#include "chansel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chansel/classifier.hpp"
#include "chansel/error.hpp"
#include "chansel/parallel.hpp"

namespace chansel {

double AccuracyCurve::at(std::size_t k) const {
  const auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw ValidationError("k=" + std::to_string(k) + " is not on the curve");
  return accuracies[static_cast<std::size_t>(it - ks.begin())];
}

std::vector<std::size_t> spatial_order(const ChannelLayout& layout,
                                       std::span<const std::size_t> channels) {
  std::vector<std::size_t> out(channels.begin(), channels.end());
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = layout[a];
    const auto& eb = layout[b];
    if (ea.y != eb.y) return ea.y > eb.y;
    if (ea.x != eb.x) return ea.x < eb.x;
    return a < b;
  });
  return out;
}

double subset_accuracy(const EpochedDataset& train, const EpochedDataset& test,
                       std::span<const std::size_t> channels) {
  const auto rows = spatial_order(train.layout(), channels);
  CspLdaClassifier clf;
  clf.fit(train.select_channels(rows));
  return clf.accuracy(test.select_channels(rows));
}

std::vector<std::size_t> default_ks(std::size_t n_channels) {
  std::vector<std::size_t> ks;
  if (n_channels == 0) return ks;
  const std::size_t linear_end = std::min<std::size_t>(n_channels, 19);
  for (std::size_t k = 1; k <= linear_end; ++k) ks.push_back(k);
  if (n_channels < 20) {
    if (ks.back() != n_channels) ks.push_back(n_channels);
    return ks;
  }
  std::size_t k = ks.back();
  while (k < n_channels) {
    k = std::max(k + 1, static_cast<std::size_t>(std::ceil(static_cast<double>(k) * 1.25)));
    ks.push_back(std::min(k, n_channels));
  }
  return ks;
}

AccuracyCurve accuracy_curve(const EpochedDataset& dataset, std::span<const std::size_t> order,
                             std::span<const std::size_t> ks, std::uint64_t seed,
                             unsigned threads) {
  const auto c = dataset.n_channels();
  if (!is_permutation_of_indices(order, c)) {
    throw ValidationError("channel order is not a permutation of the dataset's channels");
  }
  if (ks.empty()) throw ValidationError("no channel counts requested");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || ks[i] > c) {
      throw ValidationError("k=" + std::to_string(ks[i]) + " is outside [1, " + std::to_string(c) + "]");
    }
    if (i > 0 && ks[i] <= ks[i - 1]) throw ValidationError("channel counts must increase strictly");
  }
  const auto train = dataset.restrict_to(Split::train);
  const auto test = dataset.restrict_to(Split::test);

  AccuracyCurve curve;
  curve.seed = seed;
  curve.ks.assign(ks.begin(), ks.end());
  curve.accuracies.assign(ks.size(), 0.0);
  parallel_for(ks.size(), threads, [&](std::size_t i, unsigned) {
    curve.accuracies[i] = subset_accuracy(train, test, order.first(ks[i]));
  });
  if (curve.ks.back() == c) {
    curve.reference = curve.accuracies.back();
  } else {
    curve.reference = subset_accuracy(train, test, order);
  }
  return curve;
}

AccuracyCurve accuracy_curve(const EpochedDataset& dataset, const ChannelRanking& ranking,
                             std::span<const std::size_t> ks, std::uint64_t seed,
                             unsigned threads) {
  return accuracy_curve(dataset, std::span<const std::size_t>(ranking.order()), ks, seed, threads);
}

MinimalSubsetReport minimal_subset(const AccuracyCurve& curve, double reference, double d,
                                   std::span<const std::size_t> order) {
  if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("accuracy decrease d must lie in [0, 1]");
  if (curve.ks.empty() || curve.ks.size() != curve.accuracies.size()) {
    throw ValidationError("accuracy curve is empty or malformed");
  }
  MinimalSubsetReport report;
  report.constraint_d = d;
  report.reference = reference;
  const double threshold = reference * (1.0 - d);
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    if (curve.accuracies[i] >= threshold) report.admissible.push_back(curve.ks[i]);
  }
  if (report.admissible.empty()) {
    throw ValidationError("no channel count reaches the accuracy threshold " +
                          std::to_string(threshold));
  }
  report.k_m = *std::min_element(report.admissible.begin(), report.admissible.end());
  if (!order.empty()) {
    if (report.k_m > order.size()) throw ValidationError("ranking is shorter than k_m");
    report.channels.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(report.k_m));
  }
  return report;
}

}  // namespace chansel
