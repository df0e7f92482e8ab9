#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gqomkl {

// Pointwise loss on a linear score theta.z, split into the data-fit part
// (cost of a scalar prediction) and the regularizer so that callers can also
// score a combined prediction that has no single theta behind it.
class LossModel {
public:
  virtual ~LossModel() = default;

  virtual double cost(double prediction, double label) const = 0;
  virtual double regularizer(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& z,
                                   double label) const = 0;

  double value(const Eigen::VectorXd& theta, const Eigen::VectorXd& z, double label) const {
    check_dims(theta, z);
    return cost(theta.dot(z), label) + regularizer(theta);
  }

protected:
  static void check_dims(const Eigen::VectorXd& theta, const Eigen::VectorXd& z) {
    if (theta.size() != z.size())
      throw std::invalid_argument("loss: theta has length " + std::to_string(theta.size()) +
                                  " but z has length " + std::to_string(z.size()));
  }
  static void check_label(double label) {
    if (label != 1.0 && label != -1.0)
      throw std::invalid_argument("loss: label must be +1 or -1, got " + std::to_string(label));
  }
};

// Regularized logistic loss ln(1 + exp(-y f)) + lambda ||theta||^2, evaluated
// in softplus form so large margins neither overflow nor lose precision.
class KlrLoss final : public LossModel {
public:
  explicit KlrLoss(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("klr: lambda must be finite and >= 0");
  }

  double lambda() const { return lambda_; }

  double cost(double prediction, double label) const override {
    check_label(label);
    if (!std::isfinite(prediction))
      throw std::invalid_argument("klr: non-finite prediction");
    const double margin = label * prediction;
    // softplus(-margin) = ln(1 + exp(-margin))
    if (margin > 0.0) return std::log1p(std::exp(-margin));
    return -margin + std::log1p(std::exp(margin));
  }

  double regularizer(const Eigen::VectorXd& theta) const override {
    return lambda_ * theta.squaredNorm();
  }

  // d/dtheta [ln(1 + exp(-y theta.z)) + lambda||theta||^2]
  //   = -y z sigmoid(-y theta.z) + 2 lambda theta
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& z,
                           double label) const override {
    check_dims(theta, z);
    check_label(label);
    const double margin = label * theta.dot(z);
    const double s = sigmoid(-margin);
    return (-label * s) * z + (2.0 * lambda_) * theta;
  }

private:
  static double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  double lambda_;
};

inline double predict_single(const Eigen::VectorXd& theta, const Eigen::VectorXd& z) {
  if (theta.size() != z.size())
    throw std::invalid_argument("predict_single: dimension mismatch");
  return theta.dot(z);
}

inline void check_learning_rate(double eta) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("learning rate must lie in (0,1), got " + std::to_string(eta));
}

inline Eigen::VectorXd sgd_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& gradient,
                                double eta) {
  check_learning_rate(eta);
  if (theta.size() != gradient.size())
    throw std::invalid_argument("sgd_step: dimension mismatch");
  return theta - eta * gradient;
}

// Multiplicative-weights state over the kernel dictionary, kept as
// max-normalized log-weights.  Subtracting the smallest loss before the
// exponential update leaves equal-loss rounds as exact no-ops (the weights do
// not move by even one bit), and normalisation can never overflow.
class KernelWeights {
public:
  explicit KernelWeights(int count) : log_w_(count, 0.0) {
    if (count < 1) throw std::invalid_argument("kernel weights: need at least one kernel");
  }

  int count() const { return static_cast<int>(log_w_.size()); }
  const std::vector<double>& log_weights() const { return log_w_; }

  // w_p <- w_p * exp(-eta * loss_p), then renormalize the representation
  void update(std::span<const double> losses, double eta) {
    if (static_cast<int>(losses.size()) != count())
      throw std::invalid_argument("kernel weights: got " + std::to_string(losses.size()) +
                                  " losses for " + std::to_string(count()) + " kernels");
    check_learning_rate(eta);
    for (double l : losses)
      if (!std::isfinite(l))
        throw std::invalid_argument("kernel weights: non-finite loss");
    const double lmin = *std::min_element(losses.begin(), losses.end());
    for (int p = 0; p < count(); ++p) log_w_[p] -= eta * (losses[p] - lmin);
    const double lwmax = *std::max_element(log_w_.begin(), log_w_.end());
    for (double& lw : log_w_) lw -= lwmax;
  }

  // normalized weights: positive, sum to 1
  std::vector<double> normalized() const {
    std::vector<double> w(log_w_.size());
    double sum = 0.0;
    for (std::size_t p = 0; p < log_w_.size(); ++p) {
      w[p] = std::exp(log_w_[p]);  // <= 1 since log-weights are max-normalized
      sum += w[p];
    }
    for (double& x : w) x /= sum;
    return w;
  }

 private:
  std::vector<double> log_w_;
};

inline KernelWeights hedge_update(KernelWeights weights, std::span<const double> losses,
                                  double eta) {
  weights.update(losses, eta);
  return weights;
}

inline double combined_prediction(std::span<const double> weights,
                                  std::span<const double> predictions) {
  if (weights.size() != predictions.size())
    throw std::invalid_argument("combined_prediction: size mismatch");
  double out = 0.0;
  for (std::size_t p = 0; p < weights.size(); ++p) out += weights[p] * predictions[p];
  return out;
}

// Everything one node carries between rounds: its models, its own hidden
// state per kernel, and a replica of each neighbor's hidden state.  The
// protocol keeps replicas bit-exactly in sync with the originals.
struct NodeState {
  int id = 0;
  std::vector<int> neighbors;                                // ascending, excludes id
  std::vector<Eigen::VectorXd> theta;                        // per kernel
  std::vector<Eigen::VectorXd> hidden;                       // per kernel
  std::vector<std::vector<Eigen::VectorXd>> hidden_replica;  // [kernel][neighbor index]
  KernelWeights weights{1};
};

inline NodeState make_node_state(int id, std::vector<int> neighbors, int kernel_count,
                                 int dim) {
  if (kernel_count < 1 || dim < 1)
    throw std::invalid_argument("make_node_state: kernel count and dimension must be >= 1");
  NodeState node;
  node.id = id;
  node.neighbors = std::move(neighbors);
  std::sort(node.neighbors.begin(), node.neighbors.end());
  node.theta.assign(kernel_count, Eigen::VectorXd::Zero(dim));
  node.hidden.assign(kernel_count, Eigen::VectorXd::Zero(dim));
  node.hidden_replica.assign(
      kernel_count, std::vector<Eigen::VectorXd>(node.neighbors.size(), Eigen::VectorXd::Zero(dim)));
  node.weights = KernelWeights(kernel_count);
  return node;
}

}  // namespace gqomkl
