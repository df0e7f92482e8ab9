#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gqomkl/data.hpp"
#include "gqomkl/graph.hpp"
#include "gqomkl/learner.hpp"
#include "gqomkl/metrics.hpp"
#include "gqomkl/quantizer.hpp"
#include "gqomkl/rf_kernel.hpp"
#include "gqomkl/rng.hpp"

namespace gqomkl {

// Raised when the simulated network reaches a state that the protocol's
// invariants forbid: a replica out of sync with its original, or a non-finite
// model entry.
class ProtocolFault : public std::runtime_error {
public:
  ProtocolFault(int round, int node, const std::string& what)
      : std::runtime_error("protocol fault at round " + std::to_string(round) + ", node " +
                           std::to_string(node) + ": " + what),
        round_(round),
        node_(node) {}

  int round() const { return round_; }
  int node() const { return node_; }

private:
  int round_;
  int node_;
};

enum class Execution { sequential, parallel };

// How the consensus step size is chosen: a fixed value, the contraction
// formula from the spectral quantities, or the default 0.9 * eta.
struct GammaChoice {
  enum class Mode { fixed, theory, default_ratio } mode = Mode::default_ratio;
  double value = 0.0;

  static GammaChoice fixed(double v) { return {Mode::fixed, v}; }
  static GammaChoice theory() { return {Mode::theory, 0.0}; }
};

struct SimulationConfig {
  int nodes = 0;                       // J
  int rounds = 0;                      // T
  int rf_features = 0;                 // D; model dimension is 2D
  std::vector<double> kernel_sigmas;   // one bandwidth per dictionary kernel
  double eta = 0.01;                   // learning rate, in (0,1)
  GammaChoice gamma;                   // consensus step size policy
  double lambda = 0.0;                 // regularization weight
  int quantizer_levels = 0;            // M; 0 selects the identity codec
  TopologyKind topology = TopologyKind::complete;
  std::vector<std::pair<int, int>> custom_edges;  // used when topology == custom
  std::uint64_t seed = 1;
  Execution execution = Execution::sequential;
};

// Immutable per-run context shared by every node.
struct SharedModel {
  Topology topology;
  GossipMatrix gossip;
  std::vector<FeatureMap> maps;  // one per kernel
  KlrLoss loss;
  QuantizerSpec quantizer;
  double eta = 0.0;
  double gamma = 0.0;
};

struct RoundOutput {
  std::vector<std::vector<double>> kernel_loss;   // [node][kernel]
  std::vector<std::vector<double>> weights_used;  // [node][kernel]
  std::vector<double> combined_loss;              // [node]
  std::vector<std::uint64_t> bytes_sent;          // [node]
  std::vector<double> max_gradient_norm;          // [node]
};

namespace detail {

inline bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

inline void check_entry_invariants(const std::vector<NodeState>& nodes, int kernel_count,
                                   int round) {
  for (const auto& node : nodes) {
    for (int p = 0; p < kernel_count; ++p) {
      if (!node.theta[p].allFinite())
        throw ProtocolFault(round, node.id, "model for kernel " + std::to_string(p) +
                                               " has non-finite entries");
      if (!node.hidden[p].allFinite())
        throw ProtocolFault(round, node.id, "hidden state for kernel " + std::to_string(p) +
                                               " has non-finite entries");
      for (std::size_t k = 0; k < node.neighbors.size(); ++k) {
        const int i = node.neighbors[k];
        if (!bit_equal(node.hidden_replica[p][k], nodes[i].hidden[p]))
          throw ProtocolFault(round, node.id,
                              "replica of node " + std::to_string(i) + "'s hidden state (kernel " +
                                  std::to_string(p) + ") is out of sync");
      }
    }
  }
}

// Runs fn(j) for j in [0, J): either in order on this thread, or on one
// thread per node with exceptions collected and rethrown.  Both schedules
// perform the same arithmetic, so results agree bit for bit.
template <typename Fn>
void for_each_node(int node_count, Execution exec, Fn&& fn) {
  if (exec == Execution::sequential) {
    for (int j = 0; j < node_count; ++j) fn(j);
    return;
  }
  std::vector<std::exception_ptr> errors(node_count);
  std::vector<std::thread> threads;
  threads.reserve(node_count);
  for (int j = 0; j < node_count; ++j)
    threads.emplace_back([&, j] {
      try {
        fn(j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// One synchronous round for every node j with its sample (x, y):
//   1. embed x through every kernel's feature map;
//   2. per-kernel predictions and losses at the round-entry models;
//   3. combined prediction under the round-entry weights, then the
//      multiplicative weight update;
//   4. gossip: theta_p += gamma * sum_i W(i,j) (replica_i - hidden_j);
//   5. compress theta_p - hidden_j and broadcast the encoded payload;
//   6. every holder of a replica (the node itself included) applies the
//      decoded payload, keeping all copies bit-identical;
//   7. descend the round's loss gradient at the post-gossip model.
// Steps 1-5 for all nodes complete before any node runs step 6 (the wire
// buffer is the barrier), mirroring one synchronized network round.
inline RoundOutput run_round(std::vector<NodeState>& nodes, const SharedModel& model,
                             std::span<const Sample> samples,
                             std::vector<RandomStream>& quantizer_streams,
                             Execution exec = Execution::sequential, int round = -1) {
  const int node_count = static_cast<int>(nodes.size());
  const int kernel_count = static_cast<int>(model.maps.size());
  if (node_count != model.topology.node_count())
    throw std::invalid_argument("run_round: node count does not match topology");
  if (static_cast<int>(samples.size()) != node_count)
    throw std::invalid_argument("run_round: need exactly one sample per node");
  if (static_cast<int>(quantizer_streams.size()) != node_count * kernel_count)
    throw std::invalid_argument("run_round: need one quantizer stream per (node, kernel)");

  detail::check_entry_invariants(nodes, kernel_count, round);

  RoundOutput out;
  out.kernel_loss.assign(node_count, std::vector<double>(kernel_count, 0.0));
  out.weights_used.assign(node_count, std::vector<double>(kernel_count, 0.0));
  out.combined_loss.assign(node_count, 0.0);
  out.bytes_sent.assign(node_count, 0);
  out.max_gradient_norm.assign(node_count, 0.0);

  // per-node scratch that must survive the barrier
  std::vector<std::vector<Eigen::VectorXd>> embedded(node_count);
  std::vector<std::vector<std::vector<std::uint8_t>>> wire(node_count);

  const Eigen::MatrixXd& w = model.gossip.weights;

  detail::for_each_node(node_count, exec, [&](int j) {
    NodeState& node = nodes[j];
    const Sample& s = samples[j];
    embedded[j].resize(kernel_count);
    wire[j].resize(kernel_count);

    std::vector<double> predictions(kernel_count);
    std::vector<double> losses(kernel_count);
    for (int p = 0; p < kernel_count; ++p) {
      embedded[j][p] = model.maps[p].features(s.x);
      predictions[p] = node.theta[p].dot(embedded[j][p]);
      losses[p] = model.loss.cost(predictions[p], s.y) + model.loss.regularizer(node.theta[p]);
    }

    const std::vector<double> wbar = node.weights.normalized();
    double combined_pred = 0.0;
    double combined_reg = 0.0;
    for (int p = 0; p < kernel_count; ++p) {
      combined_pred += wbar[p] * predictions[p];
      combined_reg += wbar[p] * model.loss.regularizer(node.theta[p]);
    }
    out.combined_loss[j] = model.loss.cost(combined_pred, s.y) + combined_reg;
    out.kernel_loss[j] = losses;
    out.weights_used[j] = wbar;

    // eta == 0 turns learning off entirely, leaving pure consensus dynamics
    if (model.eta != 0.0) node.weights.update(losses, model.eta);

    for (int p = 0; p < kernel_count; ++p) {
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(node.theta[p].size());
      for (std::size_t k = 0; k < node.neighbors.size(); ++k) {
        const int i = node.neighbors[k];
        mix += w(i, j) * (node.hidden_replica[p][k] - node.hidden[p]);
      }
      node.theta[p] += model.gamma * mix;
      const Eigen::VectorXd residual = node.theta[p] - node.hidden[p];
      wire[j][p] = encode_wire(quantize(residual, model.quantizer,
                                        quantizer_streams[static_cast<std::size_t>(j) * kernel_count + p]),
                               model.quantizer);
    }
  });

  // ---- barrier: every payload is written before anyone reads ----

  detail::for_each_node(node_count, exec, [&](int j) {
    NodeState& node = nodes[j];
    const Sample& s = samples[j];
    std::uint64_t bytes = 0;
    for (int p = 0; p < kernel_count; ++p) {
      node.hidden[p] += dequantize(decode_wire(wire[j][p], model.quantizer), model.quantizer);
      for (std::size_t k = 0; k < node.neighbors.size(); ++k) {
        const int i = node.neighbors[k];
        node.hidden_replica[p][k] +=
            dequantize(decode_wire(wire[i][p], model.quantizer), model.quantizer);
      }
      bytes += wire[j][p].size();

      if (model.eta != 0.0) {
        const Eigen::VectorXd grad = model.loss.gradient(node.theta[p], embedded[j][p], s.y);
        const double gnorm = grad.norm();
        if (gnorm > out.max_gradient_norm[j]) out.max_gradient_norm[j] = gnorm;
        node.theta[p] -= model.eta * grad;
      }
    }
    // each payload goes to every neighbor; the node's own copy is free
    out.bytes_sent[j] = bytes * static_cast<std::uint64_t>(node.neighbors.size());
  });

  for (const auto& node : nodes)
    for (int p = 0; p < kernel_count; ++p)
      if (!node.theta[p].allFinite() || !node.hidden[p].allFinite())
        throw ProtocolFault(round, node.id, "round produced non-finite state for kernel " +
                                               std::to_string(p));
  return out;
}

// Sum over nodes of the squared distance to the network-average model for
// kernel p.
inline double consensus_error(const std::vector<NodeState>& nodes, int p) {
  if (nodes.empty()) throw std::invalid_argument("consensus_error: no nodes");
  if (p < 0 || p >= static_cast<int>(nodes.front().theta.size()))
    throw std::invalid_argument("consensus_error: kernel index out of range");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nodes.front().theta[p].size());
  for (const auto& node : nodes) mean += node.theta[p];
  mean /= static_cast<double>(nodes.size());
  double s = 0.0;
  for (const auto& node : nodes) s += (node.theta[p] - mean).squaredNorm();
  return s;
}

inline void validate_config(const SimulationConfig& cfg, int input_dim) {
  if (cfg.nodes < 2) throw std::invalid_argument("config: need at least 2 nodes");
  if (cfg.rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
  if (cfg.rf_features < 1) throw std::invalid_argument("config: rf_features must be >= 1");
  if (cfg.kernel_sigmas.empty()) throw std::invalid_argument("config: need at least one kernel");
  for (double s : cfg.kernel_sigmas)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("config: kernel bandwidths must be positive");
  if (cfg.eta != 0.0) check_learning_rate(cfg.eta);  // eta == 0: consensus-only run
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
    throw std::invalid_argument("config: lambda must be finite and >= 0");
  if (cfg.quantizer_levels < 0)
    throw std::invalid_argument("config: quantizer levels must be >= 0 (0 = identity codec)");
  if (cfg.quantizer_levels > 0) {
    const double delta = compression_delta(2 * cfg.rf_features, cfg.quantizer_levels);
    if (!(delta > 0.0))
      throw std::invalid_argument(
          "config: quantizer with " + std::to_string(cfg.quantizer_levels) +
          " levels is too coarse for model dimension " + std::to_string(2 * cfg.rf_features) +
          " (contraction coefficient " + std::to_string(delta) + " <= 0)");
  }
  if (cfg.gamma.mode == GammaChoice::Mode::fixed &&
      (!(cfg.gamma.value > 0.0) || !std::isfinite(cfg.gamma.value)))
    throw std::invalid_argument("config: fixed gamma must be positive");
  if (input_dim < 1) throw std::invalid_argument("config: input dimension must be >= 1");
}

// Builds the shared per-run context: topology, mixing matrix, quantizer,
// resolved consensus step size, and one feature map per kernel (shared by all
// nodes, drawn from a stream derived from the run seed and the kernel index).
inline SharedModel make_shared_model(const SimulationConfig& cfg, int input_dim) {
  validate_config(cfg, input_dim);
  Topology topo = build_topology(cfg.topology, cfg.nodes, cfg.custom_edges);
  GossipMatrix gossip = metropolis_weights(topo);
  const int dim = 2 * cfg.rf_features;
  QuantizerSpec qspec = cfg.quantizer_levels > 0 ? make_quantizer_spec(dim, cfg.quantizer_levels)
                                                 : make_identity_spec(dim);
  double gamma = 0.0;
  switch (cfg.gamma.mode) {
    case GammaChoice::Mode::fixed:
      gamma = cfg.gamma.value;
      break;
    case GammaChoice::Mode::theory:
      gamma = consensus_step_size(gossip.rho, gossip.beta, qspec.delta).gamma;
      break;
    case GammaChoice::Mode::default_ratio:
      gamma = 0.9 * cfg.eta;
      break;
  }
  std::vector<FeatureMap> maps;
  maps.reserve(cfg.kernel_sigmas.size());
  for (std::size_t p = 0; p < cfg.kernel_sigmas.size(); ++p) {
    RandomStream stream(derive_seed(cfg.seed, StreamPurpose::feature_map, p));
    maps.push_back(
        sample_feature_map(GaussianKernelSpec{cfg.kernel_sigmas[p]}, cfg.rf_features, input_dim,
                           stream));
  }
  return SharedModel{std::move(topo), std::move(gossip), std::move(maps), KlrLoss(cfg.lambda),
                     qspec, cfg.eta, gamma};
}

inline std::vector<NodeState> make_nodes(const SharedModel& model) {
  const int dim = 2 * model.maps.front().feature_count();
  const int kernel_count = static_cast<int>(model.maps.size());
  std::vector<NodeState> nodes;
  nodes.reserve(model.topology.node_count());
  for (int j = 0; j < model.topology.node_count(); ++j)
    nodes.push_back(make_node_state(j, model.topology.neighbors(j), kernel_count, dim));
  return nodes;
}

inline std::vector<RandomStream> make_quantizer_streams(const SimulationConfig& cfg,
                                                        int kernel_count) {
  std::vector<RandomStream> streams;
  streams.reserve(static_cast<std::size_t>(cfg.nodes) * kernel_count);
  for (int j = 0; j < cfg.nodes; ++j)
    for (int p = 0; p < kernel_count; ++p)
      streams.emplace_back(derive_seed(cfg.seed, StreamPurpose::quantizer, j, p));
  return streams;
}

struct SimulationResult {
  MetricsLog log;
  std::vector<NodeState> final_nodes;
  double max_gradient_norm = 0.0;  // largest per-sample gradient norm seen
  double gamma = 0.0;              // resolved consensus step size
  double rho = 0.0;
  double beta = 0.0;
  double delta = 1.0;
};

inline SimulationResult run_simulation(const SimulationConfig& cfg, const Partition& data) {
  if (data.node_count != cfg.nodes)
    throw std::invalid_argument("run_simulation: partition was built for " +
                                std::to_string(data.node_count) + " nodes, config has " +
                                std::to_string(cfg.nodes));
  if (data.length < cfg.rounds)
    throw std::invalid_argument("run_simulation: partition provides " +
                                std::to_string(data.length) + " rounds, config needs " +
                                std::to_string(cfg.rounds));
  SharedModel model = make_shared_model(cfg, data.data->dim());
  std::vector<NodeState> nodes = make_nodes(model);
  std::vector<RandomStream> streams = make_quantizer_streams(cfg, static_cast<int>(model.maps.size()));
  const int kernel_count = static_cast<int>(model.maps.size());

  SimulationResult result;
  result.log = MetricsLog(cfg.rounds, cfg.nodes, kernel_count);
  result.gamma = model.gamma;
  result.rho = model.gossip.rho;
  result.beta = model.gossip.beta;
  result.delta = model.quantizer.delta;

  std::vector<Sample> samples(cfg.nodes);
  std::vector<std::uint64_t> bits(cfg.nodes, 0);
  std::vector<Eigen::VectorXd> means(kernel_count);

  for (int t = 0; t < cfg.rounds; ++t) {
    for (int j = 0; j < cfg.nodes; ++j) samples[j] = data.sample(j, t);
    RoundOutput round = run_round(nodes, model, samples, streams, cfg.execution, t);

    for (int p = 0; p < kernel_count; ++p) {
      means[p] = Eigen::VectorXd::Zero(nodes.front().theta[p].size());
      for (const auto& node : nodes) means[p] += node.theta[p];
      means[p] /= static_cast<double>(cfg.nodes);
    }
    for (int j = 0; j < cfg.nodes; ++j) {
      bits[j] += round.bytes_sent[j] * 8;
      result.log.combined_loss[result.log.idx(t, j)] = round.combined_loss[j];
      result.log.bits_cum[result.log.idx(t, j)] = bits[j];
      for (int p = 0; p < kernel_count; ++p) {
        const auto i = result.log.idx(t, j, p);
        result.log.kernel_loss[i] = round.kernel_loss[j][p];
        result.log.weight[i] = round.weights_used[j][p];
        result.log.consensus_dev[i] = (nodes[j].theta[p] - means[p]).norm();
      }
      if (round.max_gradient_norm[j] > result.max_gradient_norm)
        result.max_gradient_norm = round.max_gradient_norm[j];
    }
  }
  result.final_nodes = std::move(nodes);
  return result;
}

}  // namespace gqomkl
