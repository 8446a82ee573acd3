#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace chansel {

enum class Split { train, validation, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Channels are rows, time runs along columns; each row is contiguous.
using SignalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Trial {
  SignalMatrix data;
  int label = 0;
  Split split = Split::train;

  std::size_t n_channels() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(data.cols()); }
  std::span<const double> channel(std::size_t c) const {
    return {data.row(static_cast<Eigen::Index>(c)).data(), n_samples()};
  }
};

struct Electrode {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

/// Electrode names and positions in a normalized head frame (x to the
/// right, y towards the nose, both in [-1, 1]).
class ChannelLayout {
 public:
  ChannelLayout() = default;
  explicit ChannelLayout(std::vector<Electrode> entries);

  std::size_t size() const { return entries_.size(); }
  const Electrode& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Electrode>& entries() const { return entries_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  ChannelLayout select(std::span<const std::size_t> channels) const;

  friend bool operator==(const ChannelLayout& a, const ChannelLayout& b);

 private:
  std::vector<Electrode> entries_;
};

/// N trials of C channels by T samples with labels in [0, M).
///
/// Immutable once constructed; every accessor is const so instances can be
/// shared between worker threads.
class EpochedDataset {
 public:
  EpochedDataset(std::vector<Trial> trials, double fs, ChannelLayout layout,
                 std::vector<std::string> class_names);

  std::size_t n_trials() const { return trials_.size(); }
  std::size_t n_channels() const { return layout_.size(); }
  std::size_t n_samples() const { return trials_.front().n_samples(); }
  std::size_t n_classes() const { return class_names_.size(); }
  double fs() const { return fs_; }
  const ChannelLayout& layout() const { return layout_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<Trial>& trials() const { return trials_; }
  const Trial& trial(std::size_t i) const { return trials_[i]; }

  std::vector<int> labels() const;
  std::vector<std::size_t> indices_of(Split split) const;
  std::size_t count(Split split) const;

  /// Trials in the given order. Throws ValidationError when fewer than two remain.
  EpochedDataset subset(std::span<const std::size_t> trial_indices) const;
  EpochedDataset restrict_to(Split split) const;
  /// Rows picked in the given order; layout follows.
  EpochedDataset select_channels(std::span<const std::size_t> channels) const;

  /// One span per trial over channel `c`.
  std::vector<std::span<const double>> channel_series(std::size_t c) const;

  friend bool operator==(const EpochedDataset& a, const EpochedDataset& b);

 private:
  std::vector<Trial> trials_;
  double fs_;
  ChannelLayout layout_;
  std::vector<std::string> class_names_;
};

enum class RankingMethod { xcdc, ccs, csp_rank };

std::string_view to_string(RankingMethod method);
RankingMethod parse_ranking_method(std::string_view text);

/// Channels in descending score order, ties broken by ascending index.
class ChannelRanking {
 public:
  /// Sorts by score; -inf scores land last. NaN is rejected.
  static ChannelRanking from_scores(std::vector<double> scores, RankingMethod method);

  /// Validates that `order` is a permutation and `scores` are
  /// non-increasing along it with the index tie rule.
  ChannelRanking(std::vector<std::size_t> order, std::vector<double> scores,
                 RankingMethod method);

  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<double>& scores() const { return scores_; }
  RankingMethod method() const { return method_; }
  std::size_t size() const { return order_.size(); }
  std::vector<std::size_t> top(std::size_t k) const;

 private:
  std::vector<std::size_t> order_;
  std::vector<double> scores_;
  RankingMethod method_;
};

bool is_permutation_of_indices(std::span<const std::size_t> order, std::size_t n);

}  // namespace chansel
