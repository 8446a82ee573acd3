#pragma once

#include <utility>

#include <Eigen/Core>

#include "chansel/dataset.hpp"

namespace chansel {

/// Common spatial patterns for a two-class problem.
///
/// Rows of `filters` are spatial filters w sorted by eigenvalue mu
/// descending, where C1 w = mu (C1 + C2) w and W (C1 + C2) W^T = I.
/// mu near 1 favours class_order.first.
struct CspModel {
  Eigen::MatrixXd filters;
  Eigen::VectorXd eigenvalues;
  std::pair<int, int> class_order{0, 1};
};

/// Trace-normalized class-average covariances X X^T / trace(X X^T).
struct ClassCovariances {
  Eigen::MatrixXd first;
  Eigen::MatrixXd second;
};

/// Relative floor on the composite covariance eigenvalues before whitening,
/// scaled by trace / C. Only rank-deficient directions are affected.
inline constexpr double kCspRidge = 1e-9;

/// Uses every trial of `data`. Requires exactly two classes with at least
/// two trials each.
ClassCovariances class_covariances(const EpochedDataset& data, std::pair<int, int> class_order = {0, 1});

/// Composite whitening followed by an eigendecomposition of the whitened
/// first-class covariance. Each filter's sign is fixed so that its largest
/// magnitude coefficient is positive.
CspModel csp_from_covariances(const Eigen::MatrixXd& first, const Eigen::MatrixXd& second,
                              std::pair<int, int> class_order = {0, 1});

CspModel csp_fit(const EpochedDataset& data, std::pair<int, int> class_order = {0, 1});
CspModel csp_fit(const EpochedDataset& dataset, Split split);

}  // namespace chansel
