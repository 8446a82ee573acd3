#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "chansel/dataset.hpp"

namespace chansel {

/// Binary judge used to score channel subsets. Implementations train on
/// every trial of the dataset they are given.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const EpochedDataset& train) = 0;
  virtual int predict(const SignalMatrix& trial) const = 0;
  virtual std::size_t n_features() const = 0;

  /// Fraction of trials in `data` predicted correctly.
  double accuracy(const EpochedDataset& data) const;
};

/// CSP spatial filters, log-variance features and a two-class linear
/// discriminant with pooled covariance.
///
/// With k >= 2 channels, min(3, k/2) filter pairs are taken from both ends
/// of the CSP spectrum. With a single channel the lone feature is the log
/// variance of that channel.
class CspLdaClassifier final : public Classifier {
 public:
  void fit(const EpochedDataset& train) override;
  int predict(const SignalMatrix& trial) const override;
  std::size_t n_features() const override { return static_cast<std::size_t>(weights_.size()); }

  Eigen::VectorXd features(const SignalMatrix& trial) const;
  const Eigen::MatrixXd& spatial_filters() const { return filters_; }

 private:
  Eigen::MatrixXd filters_;  // rows are filters; empty on the single-channel path
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

/// Fits a CspLdaClassifier on the trials of `split`.
CspLdaClassifier train_classifier(const EpochedDataset& dataset, Split split = Split::train);

/// Two-class LDA on feature rows. Returns (w, b); predict class 1 when
/// w.x + b > 0. Falls back to a pseudo-inverse when the pooled covariance
/// is singular.
std::pair<Eigen::VectorXd, double> fit_lda(const Eigen::MatrixXd& features,
                                           std::span<const int> labels);

}  // namespace chansel
