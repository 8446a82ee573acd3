#include "chansel/xcdc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "chansel/error.hpp"
#include "chansel/evaluation.hpp"
#include "chansel/preprocess.hpp"

namespace chansel {

ClassSimilarity within_between(const SimilarityMatrix& sim, std::span<const int> labels,
                               std::span<const std::size_t> members) {
  if (labels.size() != sim.size()) {
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match similarity matrix size " + std::to_string(sim.size()));
  }
  double sum_w = 0.0;
  double sum_b = 0.0;
  std::size_t n_w = 0;
  std::size_t n_b = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const auto i = members[a];
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const auto j = members[b];
      const double s = sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (labels[i] == labels[j]) {
        sum_w += s;
        ++n_w;
      } else {
        sum_b += s;
        ++n_b;
      }
    }
  }
  if (n_w == 0) throw ValidationError("no pair of trials shares a class");
  if (n_b == 0) throw ValidationError("no pair of trials spans two classes");
  return {sum_w / static_cast<double>(n_w), -(sum_b / static_cast<double>(n_b))};
}

ClassSimilarity within_between(const SimilarityMatrix& sim, std::span<const int> labels) {
  std::vector<std::size_t> all(sim.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return within_between(sim, labels, all);
}

double discriminant_score(double r_w, double r_b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda " + std::to_string(lambda) + " is outside [0, 1]");
  }
  return lambda * r_w + (1.0 - lambda) * r_b;
}

std::vector<std::optional<SimilarityMatrix>> channel_similarities(const EpochedDataset& dataset,
                                                                  const XcorrOptions& options) {
  const auto n = dataset.n_trials();
  const auto t = dataset.n_samples();
  SimilarityEngine engine(t, options);

  std::vector<std::optional<SimilarityMatrix>> out;
  out.reserve(dataset.n_channels());
  std::vector<double> normalized(n * t);
  std::vector<std::span<const double>> views(n);
  for (std::size_t c = 0; c < dataset.n_channels(); ++c) {
    bool degenerate = false;
    for (std::size_t i = 0; i < n && !degenerate; ++i) {
      std::span<double> dst(normalized.data() + i * t, t);
      try {
        zscore_into(dataset.trial(i).channel(c), dst);
      } catch (const ValidationError&) {
        degenerate = true;
      }
      views[i] = dst;
    }
    if (degenerate) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(engine.pairwise(views, c));
    }
  }
  return out;
}

XcdcResult rank_from_similarities(std::span<const std::optional<SimilarityMatrix>> matrices,
                                  std::span<const int> labels,
                                  std::span<const std::size_t> members, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda " + std::to_string(lambda) + " is outside [0, 1]");
  }
  DiscriminantResult result;
  result.lambda = lambda;
  std::vector<double> scores;
  scores.reserve(matrices.size());
  for (const auto& m : matrices) {
    ChannelDiscriminant cd;
    if (!m) {
      cd.degenerate = true;
      cd.r_w = std::numeric_limits<double>::quiet_NaN();
      cd.r_b = std::numeric_limits<double>::quiet_NaN();
      cd.d = -std::numeric_limits<double>::infinity();
    } else {
      const auto wb = within_between(*m, labels, members);
      cd.r_w = wb.r_w;
      cd.r_b = wb.r_b;
      cd.d = discriminant_score(wb.r_w, wb.r_b, lambda);
    }
    scores.push_back(cd.d);
    result.per_channel.push_back(cd);
  }
  return {ChannelRanking::from_scores(std::move(scores), RankingMethod::xcdc), std::move(result)};
}

XcdcResult rank_channels(const EpochedDataset& dataset, double lambda, Split split,
                         const XcorrOptions& options) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda " + std::to_string(lambda) + " is outside [0, 1]");
  }
  const auto part = dataset.restrict_to(split);
  const auto matrices = channel_similarities(part, options);
  const auto labels = part.labels();
  std::vector<std::size_t> members(part.n_trials());
  for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
  return rank_from_similarities(matrices, labels, members, lambda);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least two folds");
  if (labels.size() < static_cast<std::size_t>(folds)) {
    throw ValidationError(std::to_string(labels.size()) + " trials cannot fill " +
                          std::to_string(folds) + " folds");
  }
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(labels.size(), -1);
  std::size_t dealt = 0;
  for (int cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) fold_of[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

LambdaSearchResult select_lambda_cv(const EpochedDataset& dataset,
                                    const LambdaSearchOptions& options) {
  if (options.grid.empty()) throw ValidationError("lambda grid is empty");
  for (double l : options.grid) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw ValidationError("lambda grid value " + std::to_string(l) + " is outside [0, 1]");
    }
  }
  if (options.folds < 2) throw ValidationError("need at least two folds");
  if (options.top_k < 1 || options.top_k > dataset.n_channels()) {
    throw ValidationError("cv top-k must lie in [1, C]");
  }

  LambdaSearchResult result;
  if (options.grid.size() == 1) {
    result.lambda = options.grid.front();
    return result;
  }

  const auto train = dataset.restrict_to(Split::train);
  const auto labels = train.labels();
  result.fold_of = stratified_folds(labels, options.folds, options.seed);
  // A trial's similarity to another does not depend on the rest of the set,
  // so every fold reuses sub-matrices of the full train-split matrices.
  const auto matrices = channel_similarities(train, options.xcorr);

  std::vector<double> sums(options.grid.size(), 0.0);
  for (int f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> fit_idx;
    std::vector<std::size_t> held_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (result.fold_of[i] == f ? held_idx : fit_idx).push_back(i);
    }
    std::map<int, std::size_t> per_class;
    for (auto i : fit_idx) ++per_class[labels[i]];
    if (per_class.size() < 2 ||
        std::any_of(per_class.begin(), per_class.end(), [](const auto& kv) { return kv.second < 2; }) ||
        held_idx.size() < 2) {
      throw ValidationError("fold " + std::to_string(f) +
                            " is too small to train and score the classifier");
    }
    const auto fit_ds = train.subset(fit_idx);
    const auto held_ds = train.subset(held_idx);

    std::map<std::vector<std::size_t>, double> cache;
    for (std::size_t g = 0; g < options.grid.size(); ++g) {
      const auto ranked = rank_from_similarities(matrices, labels, fit_idx, options.grid[g]);
      auto key = ranked.ranking.top(options.top_k);
      std::sort(key.begin(), key.end());
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, subset_accuracy(fit_ds, held_ds, key)).first;
      }
      sums[g] += it->second;
    }
  }

  result.mean_accuracy.resize(options.grid.size());
  std::size_t best = 0;
  for (std::size_t g = 0; g < options.grid.size(); ++g) {
    result.mean_accuracy[g] = sums[g] / static_cast<double>(options.folds);
    if (g == 0) continue;
    const double cur = result.mean_accuracy[g];
    const double top = result.mean_accuracy[best];
    if (cur > top || (cur == top && options.grid[g] < options.grid[best])) best = g;
  }
  result.lambda = options.grid[best];
  return result;
}

}  // namespace chansel
