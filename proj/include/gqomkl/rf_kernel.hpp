#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "gqomkl/quantizer.hpp"  // for the little-endian float helpers
#include "gqomkl/rng.hpp"

namespace gqomkl {

struct GaussianKernelSpec {
  double sigma = 1.0;  // bandwidth, > 0
};

inline double kernel_exact(const GaussianKernelSpec& spec, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  if (!(spec.sigma > 0.0)) throw std::invalid_argument("kernel_exact: sigma must be positive");
  if (a.size() != b.size()) throw std::invalid_argument("kernel_exact: dimension mismatch");
  return std::exp(-(a - b).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
}

// Random trigonometric embedding of the Gaussian kernel: frequencies are
// drawn from N(0, I/sigma^2), and
//   z(x) = D^{-1/2} [sin(v_1.x), ..., sin(v_D.x), cos(v_1.x), ..., cos(v_D.x)]
// so z always has unit Euclidean norm and z(x).z(x') estimates the kernel.
class FeatureMap {
public:
  FeatureMap(Eigen::MatrixXd frequencies, double sigma)
      : freq_(std::move(frequencies)), sigma_(sigma) {
    if (!(sigma_ > 0.0)) throw std::invalid_argument("feature map: sigma must be positive");
    if (freq_.rows() < 1 || freq_.cols() < 1)
      throw std::invalid_argument("feature map: frequency matrix must be non-empty");
  }

  int feature_count() const { return static_cast<int>(freq_.rows()); }   // D
  int input_dim() const { return static_cast<int>(freq_.cols()); }       // d
  int embedding_dim() const { return 2 * feature_count(); }              // 2D
  double sigma() const { return sigma_; }
  const Eigen::MatrixXd& frequencies() const { return freq_; }

  Eigen::VectorXd features(const Eigen::VectorXd& x) const {
    if (x.size() != freq_.cols())
      throw std::invalid_argument("features: input has dimension " + std::to_string(x.size()) +
                                  ", map expects " + std::to_string(freq_.cols()));
    const Eigen::VectorXd t = freq_ * x;
    const int d_count = feature_count();
    Eigen::VectorXd z(2 * d_count);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_count));
    for (int i = 0; i < d_count; ++i) {
      z(i) = scale * std::sin(t(i));
      z(d_count + i) = scale * std::cos(t(i));
    }
    return z;
  }

private:
  Eigen::MatrixXd freq_;  // D x d
  double sigma_;
};

// Frequencies are drawn row-major (feature index outer, coordinate inner) so
// a given stream always produces the same map.
inline FeatureMap sample_feature_map(const GaussianKernelSpec& spec, int feature_count,
                                     int input_dim, RandomStream& rng) {
  if (!(spec.sigma > 0.0))
    throw std::invalid_argument("sample_feature_map: sigma must be positive");
  if (feature_count < 1 || input_dim < 1)
    throw std::invalid_argument("sample_feature_map: dimensions must be >= 1");
  Eigen::MatrixXd freq(feature_count, input_dim);
  for (int i = 0; i < feature_count; ++i)
    for (int j = 0; j < input_dim; ++j) freq(i, j) = rng.gaussian() / spec.sigma;
  return FeatureMap(std::move(freq), spec.sigma);
}

// Binary layout: u32 input_dim, u32 feature_count, f64 sigma, then the
// frequency matrix row-major as f64 -- all little-endian.
inline void save_feature_map(const FeatureMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_feature_map: cannot open " + path);
  auto put_u32 = [&](std::uint32_t v) {
    std::uint8_t b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<std::uint8_t>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_f64 = [&](double v) {
    std::uint8_t b[8];
    detail::store_f64_le(v, b);
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  put_u32(static_cast<std::uint32_t>(map.input_dim()));
  put_u32(static_cast<std::uint32_t>(map.feature_count()));
  put_f64(map.sigma());
  for (int i = 0; i < map.feature_count(); ++i)
    for (int j = 0; j < map.input_dim(); ++j) put_f64(map.frequencies()(i, j));
  if (!out) throw std::runtime_error("save_feature_map: write failed for " + path);
}

inline FeatureMap load_feature_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_feature_map: cannot open " + path);
  auto get_u32 = [&]() {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("load_feature_map: truncated file " + path);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
  };
  auto get_f64 = [&]() {
    std::uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("load_feature_map: truncated file " + path);
    return detail::load_f64_le(b);
  };
  const std::uint32_t input_dim = get_u32();
  const std::uint32_t feature_count = get_u32();
  const double sigma = get_f64();
  if (input_dim < 1 || feature_count < 1 || input_dim > (1u << 24) ||
      feature_count > (1u << 24))
    throw std::runtime_error("load_feature_map: implausible header in " + path);
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::runtime_error("load_feature_map: invalid sigma in " + path);
  Eigen::MatrixXd freq(feature_count, input_dim);
  for (std::uint32_t i = 0; i < feature_count; ++i)
    for (std::uint32_t j = 0; j < input_dim; ++j) freq(i, j) = get_f64();
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error("load_feature_map: trailing bytes in " + path);
  return FeatureMap(std::move(freq), sigma);
}

}  // namespace gqomkl
