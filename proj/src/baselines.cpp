#include "chansel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chansel/csp.hpp"
#include "chansel/error.hpp"

namespace chansel {

std::vector<std::size_t> csp_traversal_order(const Eigen::MatrixXd& filters) {
  const auto c = static_cast<std::size_t>(filters.cols());
  if (filters.rows() != filters.cols() || c == 0) {
    throw ValidationError("CSP filter matrix must be square and non-empty");
  }
  std::vector<std::size_t> visit;
  for (std::size_t lo = 0, hi = c - 1; lo <= hi; ++lo, --hi) {
    visit.push_back(lo);
    if (hi != lo) visit.push_back(hi);
    if (hi == 0) break;
  }

  std::vector<bool> taken(c, false);
  std::vector<std::size_t> order;
  order.reserve(c);
  std::vector<std::size_t> by_weight(c);
  for (auto f : visit) {
    const auto row = filters.row(static_cast<Eigen::Index>(f)).cwiseAbs();
    std::iota(by_weight.begin(), by_weight.end(), std::size_t{0});
    std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
      return row(static_cast<Eigen::Index>(a)) > row(static_cast<Eigen::Index>(b));
    });
    for (auto ch : by_weight) {
      if (!taken[ch]) {
        taken[ch] = true;
        order.push_back(ch);
        break;
      }
    }
  }
  return order;
}

ChannelRanking csp_rank(const EpochedDataset& dataset, Split split) {
  const auto model = csp_fit(dataset, split);
  auto order = csp_traversal_order(model.filters);
  const auto c = order.size();
  std::vector<double> scores(c);
  for (std::size_t pos = 0; pos < c; ++pos) {
    scores[order[pos]] = static_cast<double>(c - pos) / static_cast<double>(c);
  }
  return ChannelRanking(std::move(order), std::move(scores), RankingMethod::csp_rank);
}

Eigen::MatrixXd pearson_matrix(const SignalMatrix& trial) {
  const auto c = trial.rows();
  SignalMatrix centered = trial.colwise() - trial.rowwise().mean();
  Eigen::VectorXd norms = centered.rowwise().norm();
  Eigen::MatrixXd r = centered * centered.transpose();
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double denom = norms(i) * norms(j);
      r(i, j) = denom > 0.0 ? std::clamp(r(i, j) / denom, -1.0, 1.0) : 0.0;
    }
    if (norms(i) > 0.0) r(i, i) = 1.0;
  }
  return r;
}

std::vector<double> ccs_scores(const EpochedDataset& data) {
  const auto c = data.n_channels();
  if (c < 2) throw ValidationError("CCS needs at least two channels");
  std::vector<double> scores(c, 0.0);
  for (const auto& t : data.trials()) {
    const auto r = pearson_matrix(t.data);
    for (std::size_t i = 0; i < c; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        if (j != i) row += std::abs(r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      scores[i] += row / static_cast<double>(c - 1);
    }
  }
  for (auto& s : scores) s /= static_cast<double>(data.n_trials());
  return scores;
}

ChannelRanking ccs_rank(const EpochedDataset& dataset, Split split) {
  return ChannelRanking::from_scores(ccs_scores(dataset.restrict_to(split)), RankingMethod::ccs);
}

}  // namespace chansel
