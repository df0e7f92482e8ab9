#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gqomkl/data.hpp"
#include "gqomkl/learner.hpp"
#include "gqomkl/metrics.hpp"
#include "gqomkl/rf_kernel.hpp"

namespace gqomkl {

struct BatchOracleResult {
  Eigen::VectorXd theta;      // minimizer of the batch objective
  double objective = 0.0;     // sum_i cost_i + n * lambda * ||theta||^2
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Best fixed model in hindsight for one feature map: minimizes
//   F(theta) = sum_i ln(1 + exp(-y_i theta.z_i)) + n * lambda * ||theta||^2
// by full-batch gradient descent with Armijo backtracking from theta = 0.
// The per-sample regularizer is scaled by n so F is the sum of the same
// per-round losses the online learner pays.
inline BatchOracleResult batch_oracle(const Eigen::MatrixXd& features,
                                      const Eigen::VectorXd& labels, const FeatureMap& map,
                                      double lambda, double tolerance, int max_iterations = 20000) {
  const int n = static_cast<int>(features.rows());
  if (n < 1) throw std::invalid_argument("batch_oracle: empty dataset");
  if (labels.size() != n) throw std::invalid_argument("batch_oracle: label count mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("batch_oracle: lambda must be >= 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("batch_oracle: tolerance must be positive");
  for (int i = 0; i < n; ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw std::invalid_argument("batch_oracle: labels must be +1/-1");

  const int dim = map.embedding_dim();
  Eigen::MatrixXd z(n, dim);
  for (int i = 0; i < n; ++i) z.row(i) = map.features(features.row(i).transpose()).transpose();

  const double reg = static_cast<double>(n) * lambda;
  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd margins = labels.array() * (z * theta).array();
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      const double m = margins(i);
      f += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return f + reg * theta.squaredNorm();
  };
  auto gradient = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd margins = labels.array() * (z * theta).array();
    Eigen::VectorXd coef(n);
    for (int i = 0; i < n; ++i) {
      const double m = margins(i);
      const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(m)) : std::exp(-m) / (1.0 + std::exp(-m));
      coef(i) = -labels(i) * s;
    }
    return (z.transpose() * coef + 2.0 * reg * theta).eval();
  };

  BatchOracleResult out;
  out.theta = Eigen::VectorXd::Zero(dim);
  double f = objective(out.theta);
  double step = 1.0;
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    const Eigen::VectorXd g = gradient(out.theta);
    out.gradient_norm = g.norm();
    if (out.gradient_norm <= tolerance) {
      out.converged = true;
      break;
    }
    // Armijo backtracking, warm-starting from slightly above the last step
    double alpha = std::min(step * 2.0, 1e6);
    const double g2 = out.gradient_norm * out.gradient_norm;
    bool stalled = false;
    while (true) {
      const Eigen::VectorXd candidate = out.theta - alpha * g;
      const double fc = objective(candidate);
      if (fc <= f - 1e-4 * alpha * g2) {
        out.theta = candidate;
        f = fc;
        step = alpha;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-18) {
        stalled = true;  // objective at its double-precision floor
        break;
      }
    }
    if (stalled) break;
  }
  out.objective = f;
  if (!out.converged) out.gradient_norm = gradient(out.theta).norm();
  return out;
}

// Worst-case cumulative-regret guarantee for the protocol:
//   J ||theta*||^2 / (2 eta) + eta J T L^2 / 2 + eta J T L sqrt(12) / c
//   + J ln(P) / eta + eta J T
// where L bounds per-sample gradient norms and c is the consensus
// contraction constant.
inline double regret_bound(int nodes, int rounds, double eta, double theta_star_norm, double grad_bound,
                           int kernels, double c) {
  if (nodes < 1 || rounds < 1 || kernels < 1)
    throw std::invalid_argument("regret_bound: counts must be positive");
  if (!(eta > 0.0) || !(c > 0.0) || !(theta_star_norm >= 0.0) || !(grad_bound >= 0.0))
    throw std::invalid_argument("regret_bound: eta and c must be positive, norms nonnegative");
  const double j = nodes, t = rounds, l = grad_bound;
  return j * theta_star_norm * theta_star_norm / (2.0 * eta) + eta * j * t * l * l / 2.0 +
         eta * j * t * l * std::sqrt(12.0) / c + j * std::log(static_cast<double>(kernels)) / eta +
         eta * j * t;
}

struct BoundInputs {
  int nodes = 0;
  int rounds = 0;
  double eta = 0.0;
  double theta_star_norm = 0.0;  // of the best kernel's comparator
  double grad_bound = 0.0;       // empirical L: max observed gradient norm
  int kernels = 1;
  double c = 0.0;
};

struct RegretReport {
  std::vector<double> cumulative_loss;        // network loss summed through t
  std::vector<double> comparator_cumulative;  // comparator loss summed through t
  std::vector<double> average_regret;         // (difference) / t
  double lhs = 0.0;                           // final cumulative regret
  double rhs = 0.0;                           // guarantee evaluated at inputs
  BoundInputs inputs;
  bool within_bound = false;
};

// comparator_per_round[t] must hold the comparator's network loss at round t
// (sum over nodes of the per-sample losses of the fixed batch model).
inline RegretReport regret_report(const MetricsLog& log,
                                  std::span<const double> comparator_per_round,
                                  const BoundInputs& inputs) {
  if (static_cast<int>(comparator_per_round.size()) != log.rounds)
    throw std::invalid_argument("regret_report: comparator series has " +
                                std::to_string(comparator_per_round.size()) + " rounds, log has " +
                                std::to_string(log.rounds));
  if (log.rounds < 1) throw std::invalid_argument("regret_report: empty log");
  RegretReport rep;
  rep.inputs = inputs;
  rep.cumulative_loss.resize(log.rounds);
  rep.comparator_cumulative.resize(log.rounds);
  rep.average_regret.resize(log.rounds);
  double cum = 0.0, comp = 0.0;
  for (int t = 0; t < log.rounds; ++t) {
    cum += log.network_loss(t);
    comp += comparator_per_round[t];
    rep.cumulative_loss[t] = cum;
    rep.comparator_cumulative[t] = comp;
    rep.average_regret[t] = (cum - comp) / static_cast<double>(t + 1);
  }
  rep.lhs = cum - comp;
  rep.rhs = regret_bound(inputs.nodes, inputs.rounds, inputs.eta, inputs.theta_star_norm,
                         inputs.grad_bound, inputs.kernels, inputs.c);
  rep.within_bound = rep.lhs <= rep.rhs;
  return rep;
}

struct SublinearityResult {
  bool passes = false;
  double slope = 0.0;      // log-log slope of cumulative regret over the later rounds
  bool decreasing = false; // windowed average regret trends down
};

// Checks that average regret behaves sublinearly: the mean of
// average_regret over the last window is below the mean over an earlier
// window, and the log-log slope of cumulative regret against t over the
// second half is < 1.  A run whose regret is never positive passes outright.
inline SublinearityResult sublinearity_check(std::span<const double> average_regret,
                                             int window) {
  const int t_count = static_cast<int>(average_regret.size());
  if (window < 1) throw std::invalid_argument("sublinearity_check: window must be positive");
  if (t_count < 2 * window)
    throw std::invalid_argument("sublinearity_check: need at least 2*window rounds, got " +
                                std::to_string(t_count));
  SublinearityResult out;

  double early = 0.0, late = 0.0;
  for (int t = 0; t < window; ++t) early += average_regret[t];
  for (int t = t_count - window; t < t_count; ++t) late += average_regret[t];
  out.decreasing = late < early;

  // reconstruct cumulative regret and fit ln(cum) ~ slope * ln(t) on the
  // second half, ignoring rounds where regret is not positive
  std::vector<double> lx, ly;
  for (int t = t_count / 2; t < t_count; ++t) {
    const double cum = average_regret[t] * static_cast<double>(t + 1);
    if (cum > 0.0) {
      lx.push_back(std::log(static_cast<double>(t + 1)));
      ly.push_back(std::log(cum));
    }
  }
  if (lx.size() < 2) {
    // regret never (or almost never) positive: trivially sublinear
    out.slope = 0.0;
    out.passes = true;
    out.decreasing = true;
    return out;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  out.passes = out.decreasing && out.slope < 1.0;
  return out;
}

inline void write_regret_report(const RegretReport& rep, const std::string& text_path,
                                const std::string& csv_path) {
  {
    std::ofstream out(text_path);
    if (!out) throw std::runtime_error("write_regret_report: cannot open " + text_path);
    out << "cumulative regret (lhs): " << rep.lhs << "\n"
        << "guarantee        (rhs): " << rep.rhs << "\n"
        << "within bound          : " << (rep.within_bound ? "yes" : "no") << "\n"
        << "inputs: J=" << rep.inputs.nodes << " T=" << rep.inputs.rounds
        << " eta=" << rep.inputs.eta << " |theta*|=" << rep.inputs.theta_star_norm
        << " L=" << rep.inputs.grad_bound << " P=" << rep.inputs.kernels << " c=" << rep.inputs.c
        << "\n";
    if (!out) throw std::runtime_error("write_regret_report: write failed for " + text_path);
  }
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("write_regret_report: cannot open " + csv_path);
  csv << "t,cumulative_loss,comparator_cumulative,average_regret\n";
  for (std::size_t t = 0; t < rep.cumulative_loss.size(); ++t)
    csv << (t + 1) << ',' << detail::format_double(rep.cumulative_loss[t]) << ','
        << detail::format_double(rep.comparator_cumulative[t]) << ','
        << detail::format_double(rep.average_regret[t]) << "\n";
  if (!csv) throw std::runtime_error("write_regret_report: write failed for " + csv_path);
}

}  // namespace gqomkl
