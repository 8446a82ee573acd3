#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chansel/dataset.hpp"
#include "chansel/xcorr.hpp"

namespace chansel {

/// Mean within-class similarity and negated mean between-class similarity.
struct ClassSimilarity {
  double r_w = 0.0;
  double r_b = 0.0;
};

/// Averages over unordered pairs i < j; the diagonal never contributes.
/// Throws ValidationError if no same-class pair or no cross-class pair exists.
ClassSimilarity within_between(const SimilarityMatrix& sim, std::span<const int> labels);

/// Same, over the sub-matrix formed by `members` (indices into sim and labels).
ClassSimilarity within_between(const SimilarityMatrix& sim, std::span<const int> labels,
                               std::span<const std::size_t> members);

/// lambda * r_w + (1 - lambda) * r_b; lambda must lie in [0, 1].
double discriminant_score(double r_w, double r_b, double lambda);

struct ChannelDiscriminant {
  double r_w = 0.0;
  double r_b = 0.0;
  double d = 0.0;
  /// Constant in some trial; d is -inf and r_w/r_b are NaN.
  bool degenerate = false;
};

struct DiscriminantResult {
  std::vector<ChannelDiscriminant> per_channel;
  double lambda = 0.5;
};

struct XcdcResult {
  ChannelRanking ranking;
  DiscriminantResult discriminant;
};

/// Per-channel similarity matrices over every trial of `dataset`, with each
/// trial z-scored first. Degenerate channels yield std::nullopt.
std::vector<std::optional<SimilarityMatrix>> channel_similarities(const EpochedDataset& dataset,
                                                                  const XcorrOptions& options = {});

/// Scores and ranks channels from precomputed similarity matrices, using
/// only the trials listed in `members`.
XcdcResult rank_from_similarities(std::span<const std::optional<SimilarityMatrix>> matrices,
                                  std::span<const int> labels,
                                  std::span<const std::size_t> members, double lambda);

/// Ranks channels by the discriminant score computed on the trials of `split`.
XcdcResult rank_channels(const EpochedDataset& dataset, double lambda, Split split = Split::train,
                         const XcorrOptions& options = {});

std::vector<double> default_lambda_grid();

struct LambdaSearchOptions {
  int folds = 10;
  std::vector<double> grid = default_lambda_grid();
  std::size_t top_k = 3;
  std::uint64_t seed = 0;
  XcorrOptions xcorr;
};

struct LambdaSearchResult {
  double lambda = 0.5;
  /// Mean held-out accuracy per grid entry, aligned to options.grid.
  std::vector<double> mean_accuracy;
  /// Fold index of each train-split trial, in train-split order.
  std::vector<int> fold_of;
};

/// Stratified fold assignment: each class is shuffled with a generator
/// seeded by `seed`, then dealt round-robin, continuing the deal across
/// classes so fold sizes differ by at most one.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// K-fold search for lambda on the train split. For each fold and grid value
/// the channels are ranked on the fold's training trials, the top_k are fed
/// to the evaluation classifier, and it is scored on the held-out fold. The
/// highest mean accuracy wins; ties go to the smaller lambda.
LambdaSearchResult select_lambda_cv(const EpochedDataset& dataset,
                                    const LambdaSearchOptions& options);

}  // namespace chansel
