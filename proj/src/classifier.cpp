#include "chansel/classifier.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

#include "chansel/csp.hpp"
#include "chansel/error.hpp"

namespace chansel {
namespace {

double log_variance(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  return std::log(std::max(var, 1e-300));
}

}  // namespace

double Classifier::accuracy(const EpochedDataset& data) const {
  std::size_t correct = 0;
  for (const auto& t : data.trials()) {
    if (predict(t.data) == t.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n_trials());
}

std::pair<Eigen::VectorXd, double> fit_lda(const Eigen::MatrixXd& features,
                                           std::span<const int> labels) {
  const auto n = features.rows();
  const auto p = features.cols();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw ValidationError("feature rows and labels differ in count");
  }
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(p);
  double n0 = 0.0;
  double n1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] == 0) {
      mu0 += features.row(i).transpose();
      n0 += 1.0;
    } else if (labels[static_cast<std::size_t>(i)] == 1) {
      mu1 += features.row(i).transpose();
      n1 += 1.0;
    } else {
      throw ValidationError("LDA expects labels 0 and 1");
    }
  }
  if (n0 < 1.0 || n1 < 1.0) throw ValidationError("a class is absent from the training trials");
  mu0 /= n0;
  mu1 /= n1;

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d =
        features.row(i).transpose() - (labels[static_cast<std::size_t>(i)] == 0 ? mu0 : mu1);
    pooled.noalias() += d * d.transpose();
  }
  pooled /= std::max(1.0, static_cast<double>(n) - 2.0);

  const Eigen::VectorXd diff = mu1 - mu0;
  Eigen::VectorXd w;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
    w = ldlt.solve(diff);
  } else {
    w = pooled.completeOrthogonalDecomposition().pseudoInverse() * diff;
  }
  const double b = -0.5 * w.dot(mu0 + mu1) + std::log(n1 / n0);
  return {w, b};
}

void CspLdaClassifier::fit(const EpochedDataset& train) {
  if (train.n_classes() != 2) {
    throw ValidationError("the evaluation classifier is binary; got " +
                          std::to_string(train.n_classes()) + " classes");
  }
  std::size_t per_class[2] = {0, 0};
  for (const auto& t : train.trials()) ++per_class[t.label];
  if (per_class[0] == 0 || per_class[1] == 0) {
    throw ValidationError("a class is absent from the training trials");
  }

  const auto k = train.n_channels();
  if (k == 1) {
    filters_.resize(0, 0);
  } else {
    const auto model = csp_fit(train);
    const auto pairs = static_cast<Eigen::Index>(std::min<std::size_t>(3, k / 2));
    const auto c = model.filters.rows();
    filters_.resize(2 * pairs, c);
    filters_.topRows(pairs) = model.filters.topRows(pairs);
    filters_.bottomRows(pairs) = model.filters.bottomRows(pairs);
  }

  const auto n = static_cast<Eigen::Index>(train.n_trials());
  const Eigen::Index p = k == 1 ? 1 : filters_.rows();
  Eigen::MatrixXd feats(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    feats.row(i) = features(train.trial(static_cast<std::size_t>(i)).data).transpose();
  }
  const auto labels = train.labels();
  auto [w, b] = fit_lda(feats, labels);
  weights_ = std::move(w);
  bias_ = b;
}

Eigen::VectorXd CspLdaClassifier::features(const SignalMatrix& trial) const {
  if (filters_.size() == 0) {
    if (trial.rows() != 1) throw ValidationError("single-channel model got a multichannel trial");
    Eigen::VectorXd f(1);
    f(0) = log_variance(trial.row(0));
    return f;
  }
  if (trial.rows() != filters_.cols()) {
    throw ValidationError("trial channel count does not match the fitted filters");
  }
  const Eigen::MatrixXd projected = filters_ * trial;
  Eigen::VectorXd f(projected.rows());
  for (Eigen::Index r = 0; r < projected.rows(); ++r) f(r) = log_variance(projected.row(r));
  return f;
}

int CspLdaClassifier::predict(const SignalMatrix& trial) const {
  if (weights_.size() == 0) throw Error("classifier used before fit");
  return weights_.dot(features(trial)) + bias_ > 0.0 ? 1 : 0;
}

CspLdaClassifier train_classifier(const EpochedDataset& dataset, Split split) {
  CspLdaClassifier clf;
  clf.fit(dataset.restrict_to(split));
  return clf;
}

}  // namespace chansel
