#include <cmath>

#include "sectorrank/ranker.hpp"

namespace sectorrank {

namespace {

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd labels_of(const std::vector<RankingInstance> &instances) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(instances.size()));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = instances[i].label_up ? 1.0 : 0.0;
  }
  return y;
}

} // namespace

double logistic_loss(const LogisticModel &model, const Eigen::MatrixXd &X,
                     const Eigen::VectorXd &labels) {
  const Eigen::VectorXd z = (X * model.weights).array() + model.bias;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += softplus(z[i]) - labels[i] * z[i];
  return sum / static_cast<double>(z.size()) + 0.5 * model.l2 * model.weights.squaredNorm();
}

LogisticGradient logistic_grad(const LogisticModel &model, const Eigen::MatrixXd &X,
                               const Eigen::VectorXd &labels) {
  const Eigen::VectorXd z = (X * model.weights).array() + model.bias;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual[i] = sigmoid(z[i]) - labels[i];
  const double n = static_cast<double>(z.size());
  return {X.transpose() * residual / n + model.l2 * model.weights, residual.sum() / n};
}

LogisticModel train_logistic(const std::vector<RankingInstance> &instances,
                             const LogisticConfig &config) {
  if (instances.size() < 2) throw Error(ErrorKind::SingleClass, "need at least 2 instances");
  if (!(config.learning_rate > 0.0) || config.epochs < 1 || !(config.l2 >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "logistic config");
  }
  const Eigen::MatrixXd X = feature_matrix(instances);
  const Eigen::VectorXd y = labels_of(instances);
  if (y.sum() == 0.0 || y.sum() == static_cast<double>(y.size())) {
    throw Error(ErrorKind::SingleClass, "labels are all one class");
  }

  LogisticModel model{Eigen::VectorXd::Zero(X.cols()), 0.0, config.l2, config};
  double loss = logistic_loss(model, X, y);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const LogisticGradient g = logistic_grad(model, X, y);
    double step = config.learning_rate;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      LogisticModel trial = model;
      trial.weights -= step * g.weights;
      trial.bias -= step * g.bias;
      const double trial_loss = logistic_loss(trial, X, y);
      if (!std::isfinite(trial_loss)) continue;
      if (trial_loss <= loss) {
        model = std::move(trial);
        loss = trial_loss;
        moved = true;
        break;
      }
    }
    if (!moved) break; // no descent step found at any scale
  }
  if (!std::isfinite(loss) || !model.weights.allFinite() || !std::isfinite(model.bias)) {
    throw Error(ErrorKind::Diverged, "logistic parameters are not finite");
  }
  return model;
}

LinearModel train_linear(const std::vector<RankingInstance> &instances, const LinearConfig &config) {
  if (instances.size() < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 instances");
  if (!(config.l2 >= 0.0)) throw Error(ErrorKind::InvalidConfig, "l2 must be >= 0");
  const Eigen::MatrixXd X = feature_matrix(instances);
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = instances[static_cast<std::size_t>(i)].target_return;

  // Centering leaves the bias out of the penalty.
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  const double ridge = std::max(config.l2, kRidgeFloor);
  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += ridge;
  LinearModel model;
  model.weights = gram.ldlt().solve(Xc.transpose() * yc);
  model.bias = y_mean - x_mean.dot(model.weights);
  model.l2 = config.l2;
  return model;
}

} // namespace sectorrank
