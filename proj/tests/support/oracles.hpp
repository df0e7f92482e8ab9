#pragma once

// Independent reference implementations used only by tests.  Each one
// computes a quantity the library also computes, by a different route, so
// the two can be checked against each other.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "gqomkl/rng.hpp"

namespace oracle {

// Second-largest eigenvalue of a symmetric stochastic matrix, by power
// iteration on the shifted matrix (W + I) / 2 restricted to the complement
// of the all-ones vector.  No eigensolver library involved.
inline double second_eigenvalue(const Eigen::MatrixXd& w, int iterations = 20000) {
  const auto n = w.rows();
  if (n < 2 || w.cols() != n) throw std::invalid_argument("second_eigenvalue: bad shape");
  gqomkl::RandomStream rng(0x5eed5eedULL);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  auto project = [&](Eigen::VectorXd& x) { x -= ones.dot(x) * ones; };
  project(v);
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd next = 0.5 * (w * v + v);  // (W + I) / 2 keeps the spectrum in [0, 1]
    project(next);
    const double norm = next.norm();
    if (norm == 0.0) return -1.0;  // the projected spectrum vanished (W = averaging matrix)
    next /= norm;
    mu = next.dot(0.5 * (w * next + next));
    v = next;
  }
  return 2.0 * mu - 1.0;
}

// Largest eigenvalue of I - W (which is positive semidefinite for symmetric
// stochastic W), again by plain power iteration.
inline double largest_shift_eigenvalue(const Eigen::MatrixXd& w, int iterations = 20000) {
  const auto n = w.rows();
  gqomkl::RandomStream rng(0xbeefULL);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd next = v - w * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    mu = next.dot(next - w * next);
    v = next;
  }
  return mu;
}

// Second-order solver for the batch logistic objective
//   F(theta) = sum_i ln(1 + exp(-y_i z_i.theta)) + reg ||theta||^2
// (reg already includes any sample-count scaling).  Newton steps with an
// exact dense Hessian; only usable at test sizes.
inline Eigen::VectorXd newton_logistic(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                       double reg, int iterations = 100) {
  const auto n = z.rows();
  const auto dim = z.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd margins = y.array() * (z * theta).array();
    Eigen::VectorXd s(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = margins(i);
      const double sig = m >= 0.0 ? 1.0 / (1.0 + std::exp(m)) : std::exp(-m) / (1.0 + std::exp(-m));
      s(i) = sig;                 // sigmoid(-m)
      h(i) = sig * (1.0 - sig);   // sigmoid'(m)
    }
    const Eigen::VectorXd grad =
        z.transpose() * (-y.array() * s.array()).matrix() + 2.0 * reg * theta;
    Eigen::MatrixXd hess = z.transpose() * h.asDiagonal() * z;
    hess.diagonal().array() += 2.0 * reg;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    theta -= step;
    if (grad.norm() < 1e-13) break;
  }
  return theta;
}

// Central finite differences for any scalar function of a vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& at, double h = 1e-6) {
  Eigen::VectorXd g(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Eigen::VectorXd lo = at, hi = at;
    lo(i) -= h;
    hi(i) += h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
