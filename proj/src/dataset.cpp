#include "chansel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "chansel/error.hpp"

namespace chansel {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

ChannelLayout::ChannelLayout(std::vector<Electrode> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.name).second) {
      throw ValidationError("duplicate channel name '" + e.name + "'");
    }
    if (!std::isfinite(e.x) || !std::isfinite(e.y)) {
      throw ValidationError("non-finite coordinate for channel '" + e.name + "'");
    }
  }
}

std::optional<std::size_t> ChannelLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

ChannelLayout ChannelLayout::select(std::span<const std::size_t> channels) const {
  std::vector<Electrode> picked;
  picked.reserve(channels.size());
  for (auto c : channels) {
    if (c >= entries_.size()) throw ValidationError("channel index out of range");
    picked.push_back(entries_[c]);
  }
  return ChannelLayout(std::move(picked));
}

bool operator==(const ChannelLayout& a, const ChannelLayout& b) {
  return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
                    [](const Electrode& l, const Electrode& r) {
                      return l.name == r.name && l.x == r.x && l.y == r.y;
                    });
}

EpochedDataset::EpochedDataset(std::vector<Trial> trials, double fs, ChannelLayout layout,
                               std::vector<std::string> class_names)
    : trials_(std::move(trials)),
      fs_(fs),
      layout_(std::move(layout)),
      class_names_(std::move(class_names)) {
  if (trials_.size() < 2) throw ValidationError("a dataset needs at least two trials");
  if (class_names_.size() < 2) throw ValidationError("a dataset needs at least two classes");
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw ValidationError("sampling rate must be positive");
  if (layout_.size() == 0) throw ValidationError("a dataset needs at least one channel");

  const auto t = trials_.front().n_samples();
  if (t < 2) throw ValidationError("trials need at least two samples");
  for (std::size_t i = 0; i < trials_.size(); ++i) {
    const auto& tr = trials_[i];
    if (tr.n_channels() != layout_.size() || tr.n_samples() != t) {
      throw ValidationError("trial " + std::to_string(i) + " has shape " +
                            std::to_string(tr.n_channels()) + "x" + std::to_string(tr.n_samples()) +
                            ", expected " + std::to_string(layout_.size()) + "x" +
                            std::to_string(t));
    }
    if (tr.label < 0 || static_cast<std::size_t>(tr.label) >= class_names_.size()) {
      throw ValidationError("trial " + std::to_string(i) + " has label " +
                            std::to_string(tr.label) + " outside [0, " +
                            std::to_string(class_names_.size()) + ")");
    }
    if (!tr.data.allFinite()) {
      throw ValidationError("trial " + std::to_string(i) + " contains a non-finite sample");
    }
  }
}

std::vector<int> EpochedDataset::labels() const {
  std::vector<int> out;
  out.reserve(trials_.size());
  for (const auto& t : trials_) out.push_back(t.label);
  return out;
}

std::vector<std::size_t> EpochedDataset::indices_of(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trials_.size(); ++i) {
    if (trials_[i].split == split) out.push_back(i);
  }
  return out;
}

std::size_t EpochedDataset::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      trials_.begin(), trials_.end(), [split](const Trial& t) { return t.split == split; }));
}

EpochedDataset EpochedDataset::subset(std::span<const std::size_t> trial_indices) const {
  std::vector<Trial> picked;
  picked.reserve(trial_indices.size());
  for (auto i : trial_indices) {
    if (i >= trials_.size()) throw ValidationError("trial index out of range");
    picked.push_back(trials_[i]);
  }
  return EpochedDataset(std::move(picked), fs_, layout_, class_names_);
}

EpochedDataset EpochedDataset::restrict_to(Split split) const {
  const auto idx = indices_of(split);
  if (idx.size() < 2) {
    throw ValidationError("split '" + std::string(to_string(split)) + "' has " +
                          std::to_string(idx.size()) + " trials, need at least 2");
  }
  return subset(idx);
}

EpochedDataset EpochedDataset::select_channels(std::span<const std::size_t> channels) const {
  if (channels.empty()) throw ValidationError("channel selection is empty");
  std::vector<Trial> out;
  out.reserve(trials_.size());
  const auto t = static_cast<Eigen::Index>(n_samples());
  for (const auto& tr : trials_) {
    Trial sel{SignalMatrix(static_cast<Eigen::Index>(channels.size()), t), tr.label, tr.split};
    for (std::size_t r = 0; r < channels.size(); ++r) {
      if (channels[r] >= n_channels()) throw ValidationError("channel index out of range");
      sel.data.row(static_cast<Eigen::Index>(r)) =
          tr.data.row(static_cast<Eigen::Index>(channels[r]));
    }
    out.push_back(std::move(sel));
  }
  return EpochedDataset(std::move(out), fs_, layout_.select(channels), class_names_);
}

std::vector<std::span<const double>> EpochedDataset::channel_series(std::size_t c) const {
  std::vector<std::span<const double>> out;
  out.reserve(trials_.size());
  for (const auto& tr : trials_) out.push_back(tr.channel(c));
  return out;
}

bool operator==(const EpochedDataset& a, const EpochedDataset& b) {
  if (a.fs_ != b.fs_ || !(a.layout_ == b.layout_) || a.class_names_ != b.class_names_ ||
      a.trials_.size() != b.trials_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.trials_.size(); ++i) {
    const auto& l = a.trials_[i];
    const auto& r = b.trials_[i];
    if (l.label != r.label || l.split != r.split || l.data.rows() != r.data.rows() ||
        l.data.cols() != r.data.cols() || l.data != r.data) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(RankingMethod method) {
  switch (method) {
    case RankingMethod::xcdc:
      return "xcdc";
    case RankingMethod::ccs:
      return "ccs";
    case RankingMethod::csp_rank:
      return "csp-rank";
  }
  return "xcdc";
}

RankingMethod parse_ranking_method(std::string_view text) {
  if (text == "xcdc") return RankingMethod::xcdc;
  if (text == "ccs") return RankingMethod::ccs;
  if (text == "csp-rank") return RankingMethod::csp_rank;
  throw ValidationError("unknown ranking method '" + std::string(text) + "'");
}

bool is_permutation_of_indices(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto i : order) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

ChannelRanking ChannelRanking::from_scores(std::vector<double> scores, RankingMethod method) {
  for (double s : scores) {
    if (std::isnan(s)) throw ValidationError("ranking score is NaN");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return ChannelRanking(std::move(order), std::move(scores), method);
}

ChannelRanking::ChannelRanking(std::vector<std::size_t> order, std::vector<double> scores,
                               RankingMethod method)
    : order_(std::move(order)), scores_(std::move(scores)), method_(method) {
  if (order_.empty()) throw ValidationError("ranking is empty");
  if (scores_.size() != order_.size()) {
    throw ValidationError("ranking has " + std::to_string(order_.size()) + " entries but " +
                          std::to_string(scores_.size()) + " scores");
  }
  if (!is_permutation_of_indices(order_, order_.size())) {
    throw ValidationError("ranking order is not a permutation");
  }
  for (std::size_t i = 1; i < order_.size(); ++i) {
    const double prev = scores_[order_[i - 1]];
    const double cur = scores_[order_[i]];
    if (std::isnan(prev) || std::isnan(cur) || cur > prev ||
        (cur == prev && order_[i] < order_[i - 1])) {
      throw ValidationError("ranking order does not follow its scores");
    }
  }
}

std::vector<std::size_t> ChannelRanking::top(std::size_t k) const {
  if (k == 0 || k > order_.size()) {
    throw ValidationError("top-k with k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(order_.size()) + "]");
  }
  return {order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace chansel
