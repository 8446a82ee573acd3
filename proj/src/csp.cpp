#include "chansel/csp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chansel/error.hpp"

namespace chansel {

ClassCovariances class_covariances(const EpochedDataset& data, std::pair<int, int> class_order) {
  if (data.n_classes() != 2) {
    throw ValidationError("CSP needs a binary dataset, got " + std::to_string(data.n_classes()) +
                          " classes");
  }
  const auto c = static_cast<Eigen::Index>(data.n_channels());
  ClassCovariances out{Eigen::MatrixXd::Zero(c, c), Eigen::MatrixXd::Zero(c, c)};
  std::size_t n_first = 0;
  std::size_t n_second = 0;
  for (const auto& t : data.trials()) {
    Eigen::MatrixXd cov = t.data * t.data.transpose();
    const double tr = cov.trace();
    if (!(tr > 0.0)) throw ValidationError("CSP trial covariance has zero trace");
    cov /= tr;
    if (t.label == class_order.first) {
      out.first += cov;
      ++n_first;
    } else if (t.label == class_order.second) {
      out.second += cov;
      ++n_second;
    }
  }
  if (n_first < 2 || n_second < 2) {
    throw ValidationError("CSP needs at least two trials per class (got " +
                          std::to_string(n_first) + " and " + std::to_string(n_second) + ")");
  }
  out.first /= static_cast<double>(n_first);
  out.second /= static_cast<double>(n_second);
  return out;
}

CspModel csp_from_covariances(const Eigen::MatrixXd& first, const Eigen::MatrixXd& second,
                              std::pair<int, int> class_order) {
  const auto c = first.rows();
  if (c == 0 || first.cols() != c || second.rows() != c || second.cols() != c) {
    throw ValidationError("CSP covariances must be square and of equal size");
  }
  Eigen::MatrixXd composite = first + second;
  const double tr = composite.trace();
  if (!(tr > 0.0) || !composite.allFinite()) {
    throw ValidationError("composite covariance is degenerate");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> composite_eig(composite);
  if (composite_eig.info() != Eigen::Success) throw Error("composite eigendecomposition failed");
  // Floor rather than shift, so a well-conditioned composite is whitened exactly.
  const double min_eig = kCspRidge * tr / static_cast<double>(c);
  const Eigen::VectorXd evals = composite_eig.eigenvalues().cwiseMax(min_eig);
  const Eigen::MatrixXd whitening =
      evals.array().rsqrt().matrix().asDiagonal() * composite_eig.eigenvectors().transpose();

  Eigen::MatrixXd s = whitening * first * whitening.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s_eig(s);
  if (s_eig.info() != Eigen::Success) throw Error("whitened eigendecomposition failed");

  // Eigen returns ascending eigenvalues; flip to descending.
  CspModel model;
  model.class_order = class_order;
  model.filters.resize(c, c);
  model.eigenvalues.resize(c);
  for (Eigen::Index k = 0; k < c; ++k) {
    const Eigen::Index src = c - 1 - k;
    model.eigenvalues(k) = std::clamp(s_eig.eigenvalues()(src), 0.0, 1.0);
    Eigen::RowVectorXd w = s_eig.eigenvectors().col(src).transpose() * whitening;
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w(arg) < 0.0) w = -w;
    model.filters.row(k) = w;
  }
  return model;
}

CspModel csp_fit(const EpochedDataset& data, std::pair<int, int> class_order) {
  const auto cov = class_covariances(data, class_order);
  return csp_from_covariances(cov.first, cov.second, class_order);
}

CspModel csp_fit(const EpochedDataset& dataset, Split split) {
  return csp_fit(dataset.restrict_to(split));
}

}  // namespace chansel
