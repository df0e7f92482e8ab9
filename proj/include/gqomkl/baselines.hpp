#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gqomkl/protocol.hpp"

namespace gqomkl {

// Reference runs the main protocol is compared against:
//  - single_kernel: same topology and codec, dictionary reduced to one
//    bandwidth (the multiplicative weights collapse to the constant 1);
//  - complete_unquantized: fully connected network, lossless payloads;
//  - complete_quantized: fully connected network, same level codec.
struct BaselineSpec {
  enum class Kind { single_kernel, complete_unquantized, complete_quantized };
  Kind kind = Kind::single_kernel;
  double sigma = 1.0;  // only read for single_kernel
};

inline std::string baseline_name(const BaselineSpec& spec) {
  switch (spec.kind) {
    case BaselineSpec::Kind::single_kernel: {
      std::string s = std::to_string(spec.sigma);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return "single_kernel_" + s;
    }
    case BaselineSpec::Kind::complete_unquantized:
      return "complete_unquantized";
    case BaselineSpec::Kind::complete_quantized:
      return "complete_quantized";
  }
  return "?";
}

inline SimulationConfig baseline_config(const BaselineSpec& spec, SimulationConfig cfg) {
  switch (spec.kind) {
    case BaselineSpec::Kind::single_kernel:
      if (!(spec.sigma > 0.0))
        throw std::invalid_argument("baseline: single-kernel bandwidth must be positive");
      cfg.kernel_sigmas = {spec.sigma};
      break;
    case BaselineSpec::Kind::complete_unquantized:
      cfg.topology = TopologyKind::complete;
      cfg.custom_edges.clear();
      cfg.quantizer_levels = 0;
      break;
    case BaselineSpec::Kind::complete_quantized:
      cfg.topology = TopologyKind::complete;
      cfg.custom_edges.clear();
      if (cfg.quantizer_levels == 0) cfg.quantizer_levels = 7;
      break;
  }
  return cfg;
}

inline SimulationResult run_baseline(const BaselineSpec& spec, const SimulationConfig& cfg,
                                     const Partition& data) {
  return run_simulation(baseline_config(spec, cfg), data);
}

// Hand-rolled single-kernel protocol without any of the multi-kernel
// machinery (no weight state, no combination step).  Exists to pin down that
// the general implementation with a one-kernel dictionary is this algorithm,
// bit for bit.
struct SingleKernelRun {
  std::vector<double> loss;                  // [t * J + j]
  std::vector<Eigen::VectorXd> final_theta;  // per node
};

inline SingleKernelRun run_single_kernel_direct(const SimulationConfig& cfg,
                                                const Partition& data) {
  if (cfg.kernel_sigmas.size() != 1)
    throw std::invalid_argument("run_single_kernel_direct: exactly one kernel required");
  if (data.node_count != cfg.nodes || data.length < cfg.rounds)
    throw std::invalid_argument("run_single_kernel_direct: partition does not fit config");
  SharedModel model = make_shared_model(cfg, data.data->dim());
  const int dim = 2 * cfg.rf_features;
  const Eigen::MatrixXd& w = model.gossip.weights;

  std::vector<Eigen::VectorXd> theta(cfg.nodes, Eigen::VectorXd::Zero(dim));
  std::vector<Eigen::VectorXd> hidden(cfg.nodes, Eigen::VectorXd::Zero(dim));
  // replica[j][k] mirrors hidden[neighbor k of j]
  std::vector<std::vector<Eigen::VectorXd>> replica(cfg.nodes);
  for (int j = 0; j < cfg.nodes; ++j)
    replica[j].assign(model.topology.neighbors(j).size(), Eigen::VectorXd::Zero(dim));
  std::vector<RandomStream> streams = make_quantizer_streams(cfg, 1);

  SingleKernelRun out;
  out.loss.assign(static_cast<std::size_t>(cfg.rounds) * cfg.nodes, 0.0);

  std::vector<Eigen::VectorXd> z(cfg.nodes);
  std::vector<double> label(cfg.nodes);
  std::vector<std::vector<std::uint8_t>> wire(cfg.nodes);
  for (int t = 0; t < cfg.rounds; ++t) {
    for (int j = 0; j < cfg.nodes; ++j) {
      const Sample s = data.sample(j, t);
      z[j] = model.maps[0].features(s.x);
      label[j] = s.y;
      const double pred = theta[j].dot(z[j]);
      out.loss[static_cast<std::size_t>(t) * cfg.nodes + j] =
          model.loss.cost(pred, s.y) + model.loss.regularizer(theta[j]);
      const auto& nbrs = model.topology.neighbors(j);
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(dim);
      for (std::size_t k = 0; k < nbrs.size(); ++k)
        mix += w(nbrs[k], j) * (replica[j][k] - hidden[j]);
      theta[j] += model.gamma * mix;
      wire[j] = encode_wire(quantize(theta[j] - hidden[j], model.quantizer, streams[j]),
                            model.quantizer);
    }
    for (int j = 0; j < cfg.nodes; ++j) {
      hidden[j] += dequantize(decode_wire(wire[j], model.quantizer), model.quantizer);
      const auto& nbrs = model.topology.neighbors(j);
      for (std::size_t k = 0; k < nbrs.size(); ++k)
        replica[j][k] += dequantize(decode_wire(wire[nbrs[k]], model.quantizer), model.quantizer);
      if (model.eta != 0.0)
        theta[j] -= model.eta * model.loss.gradient(theta[j], z[j], label[j]);
    }
  }
  out.final_theta = std::move(theta);
  return out;
}

}  // namespace gqomkl
