#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "chansel/dataset.hpp"

namespace chansel {

/// Ends-first traversal of filter rows (first, last, second, second-last, ...).
/// Each filter contributes the unselected channel with the largest absolute
/// coefficient, ties to the lower index.
std::vector<std::size_t> csp_traversal_order(const Eigen::MatrixXd& filters);

/// CSP-rank on the trials of `split`. Scores are (C - position) / C so they
/// decrease strictly along the traversal order.
ChannelRanking csp_rank(const EpochedDataset& dataset, Split split = Split::train);

/// Pearson correlation between the channel rows of one trial. Rows with no
/// variance correlate 0 with everything, including themselves.
Eigen::MatrixXd pearson_matrix(const SignalMatrix& trial);

/// Per-channel CCS score: mean over trials of the mean absolute off-diagonal
/// correlation in that channel's row.
std::vector<double> ccs_scores(const EpochedDataset& data);

/// CCS on the trials of `split`. Requires at least two channels.
ChannelRanking ccs_rank(const EpochedDataset& dataset, Split split = Split::train);

}  // namespace chansel
