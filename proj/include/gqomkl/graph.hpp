#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gqomkl {

enum class TopologyKind { complete, ring, path, custom };

inline const char* topology_kind_name(TopologyKind k) {
  switch (k) {
    case TopologyKind::complete: return "complete";
    case TopologyKind::ring: return "ring";
    case TopologyKind::path: return "path";
    case TopologyKind::custom: return "custom";
  }
  return "?";
}

// Undirected simple graph on nodes 0..J-1.  Construction normalises edges to
// (min, max), rejects self-loops/duplicates/out-of-range endpoints, and
// requires the graph to be connected, which the gossip protocol relies on.
class Topology {
public:
  Topology(int node_count, std::vector<std::pair<int, int>> edges)
      : node_count_(node_count) {
    if (node_count < 2)
      throw std::invalid_argument("topology: need at least 2 nodes, got " +
                                  std::to_string(node_count));
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= node_count || b >= node_count)
        throw std::invalid_argument("topology: edge (" + std::to_string(a) + "," +
                                    std::to_string(b) + ") out of range for " +
                                    std::to_string(node_count) + " nodes");
      if (a == b)
        throw std::invalid_argument("topology: self-loop at node " + std::to_string(a));
      auto e = std::minmax(a, b);
      if (!seen.insert(e).second)
        throw std::invalid_argument("topology: duplicate edge (" + std::to_string(e.first) +
                                    "," + std::to_string(e.second) + ")");
    }
    edges_.assign(seen.begin(), seen.end());
    adjacency_.assign(node_count_, {});
    for (auto [a, b] : edges_) {
      adjacency_[a].push_back(b);
      adjacency_[b].push_back(a);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    require_connected();
  }

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
  const std::vector<int>& neighbors(int j) const { return adjacency_.at(j); }
  int degree(int j) const { return static_cast<int>(adjacency_.at(j).size()); }

private:
  void require_connected() const {
    std::vector<char> visited(node_count_, 0);
    std::queue<int> frontier;
    frontier.push(0);
    visited[0] = 1;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : adjacency_[u])
        if (!visited[v]) {
          visited[v] = 1;
          frontier.push(v);
        }
    }
    int first_unreached = -1;
    for (int j = 0; j < node_count_; ++j)
      if (!visited[j]) {
        first_unreached = j;
        break;
      }
    if (first_unreached < 0) return;
    // report the whole component of the first unreached node
    std::vector<char> comp(node_count_, 0);
    std::queue<int> q2;
    q2.push(first_unreached);
    comp[first_unreached] = 1;
    while (!q2.empty()) {
      int u = q2.front();
      q2.pop();
      for (int v : adjacency_[u])
        if (!comp[v]) {
          comp[v] = 1;
          q2.push(v);
        }
    }
    std::string members;
    for (int j = 0; j < node_count_; ++j)
      if (comp[j]) members += (members.empty() ? "" : " ") + std::to_string(j);
    throw std::invalid_argument("topology: graph is disconnected; component {" + members +
                                "} is not reachable from node 0");
  }

  int node_count_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

inline Topology build_topology(TopologyKind kind, int node_count,
                               const std::vector<std::pair<int, int>>& custom_edges = {}) {
  if (node_count < 2)
    throw std::invalid_argument("build_topology: need at least 2 nodes, got " +
                                std::to_string(node_count));
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case TopologyKind::complete:
      for (int a = 0; a < node_count; ++a)
        for (int b = a + 1; b < node_count; ++b) edges.emplace_back(a, b);
      break;
    case TopologyKind::ring:
      for (int a = 0; a + 1 < node_count; ++a) edges.emplace_back(a, a + 1);
      if (node_count > 2) edges.emplace_back(node_count - 1, 0);  // J=2 ring == path
      break;
    case TopologyKind::path:
      for (int a = 0; a + 1 < node_count; ++a) edges.emplace_back(a, a + 1);
      break;
    case TopologyKind::custom:
      edges = custom_edges;
      break;
  }
  return Topology(node_count, edges);
}

// Mixing matrix plus the two spectral quantities the consensus step size
// depends on: rho = 1 - lambda_2(W) (spectral gap) and beta = ||I - W||_2.
struct GossipMatrix {
  Eigen::MatrixXd weights;
  double rho = 0.0;
  double beta = 0.0;
};

struct SpectralQuantities {
  double rho = 0.0;
  double beta = 0.0;
};

// Validates that W is square, symmetric, nonnegative and doubly stochastic
// (tolerance 1e-12), then reads rho and beta off its eigenvalues.
inline SpectralQuantities spectral_quantities(const Eigen::MatrixXd& w) {
  const auto n = w.rows();
  if (n < 2 || w.cols() != n)
    throw std::invalid_argument("spectral_quantities: matrix must be square with size >= 2");
  constexpr double tol = 1e-12;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(w(i, j)))
        throw std::invalid_argument("spectral_quantities: non-finite entry");
      if (w(i, j) < -tol)
        throw std::invalid_argument("spectral_quantities: negative entry at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (std::abs(w(i, j) - w(j, i)) > tol)
        throw std::invalid_argument("spectral_quantities: matrix is not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
    }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(w.row(i).sum() - 1.0) > tol)
      throw std::invalid_argument("spectral_quantities: row " + std::to_string(i) +
                                  " does not sum to 1");
    if (std::abs(w.col(i).sum() - 1.0) > tol)
      throw std::invalid_argument("spectral_quantities: column " + std::to_string(i) +
                                  " does not sum to 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_quantities: eigendecomposition failed");
  const Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  const double lambda_second = ev(n - 2);           // second largest
  SpectralQuantities out;
  out.rho = 1.0 - lambda_second;
  out.beta = std::max(std::abs(1.0 - ev(0)), std::abs(1.0 - ev(n - 1)));
  return out;
}

// Metropolis-Hastings weights: W_ij = 1 / (1 + max(deg_i, deg_j)) on edges,
// diagonal takes the leftover mass.  Symmetric and doubly stochastic by
// construction; this is re-checked rather than assumed.
inline GossipMatrix metropolis_weights(const Topology& topo) {
  const int n = topo.node_count();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : topo.edges()) {
    const double v = 1.0 / (1.0 + std::max(topo.degree(a), topo.degree(b)));
    w(a, b) = v;
    w(b, a) = v;
  }
  for (int j = 0; j < n; ++j) w(j, j) = 1.0 - (w.row(j).sum() - w(j, j));
  const SpectralQuantities sq = spectral_quantities(w);
  return GossipMatrix{std::move(w), sq.rho, sq.beta};
}

struct ConsensusStep {
  double gamma = 0.0;  // mixing step size
  double c = 0.0;      // contraction constant entering the regret bound
};

// Step size guaranteeing linear decay of consensus error under compressed
// gossip: gamma = rho^2 d / (16 rho + rho^2 + 4 beta^2 + 2 rho beta^2 - 8 rho d),
// c = rho^2 d / 82, where d is the quantizer's contraction coefficient.
inline ConsensusStep consensus_step_size(double rho, double beta, double delta) {
  constexpr double slack = 1e-9;
  if (!(rho > 0.0) || rho > 1.0 + slack)
    throw std::invalid_argument("consensus_step_size: rho must lie in (0,1], got " +
                                std::to_string(rho));
  if (beta < -slack || beta > 2.0 + slack)
    throw std::invalid_argument("consensus_step_size: beta must lie in [0,2], got " +
                                std::to_string(beta));
  if (!(delta > 0.0) || delta > 1.0 + slack)
    throw std::invalid_argument(
        "consensus_step_size: delta must lie in (0,1]; the quantizer is too coarse "
        "for this dimension (got delta = " + std::to_string(delta) + ")");
  rho = std::min(rho, 1.0);
  beta = std::min(std::max(beta, 0.0), 2.0);
  delta = std::min(delta, 1.0);
  const double denom =
      16.0 * rho + rho * rho + 4.0 * beta * beta + 2.0 * rho * beta * beta - 8.0 * rho * delta;
  ConsensusStep out;
  out.gamma = rho * rho * delta / denom;
  out.c = rho * rho * delta / 82.0;
  return out;
}

// Text format: first line is the node count, each following non-empty line is
// an undirected edge "i j".  '#' starts a comment.
inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_topology: cannot open " + path);
  std::string line;
  int line_no = 0;
  int node_count = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (node_count < 0) {
      if (!(ls >> node_count))
        continue;  // blank/comment lines before the header are fine
      std::string extra;
      if (ls >> extra)
        throw std::runtime_error("load_topology: " + path + ":" + std::to_string(line_no) +
                                 ": header line must contain only the node count");
      continue;
    }
    int a, b;
    if (!(ls >> a)) continue;  // blank line
    if (!(ls >> b))
      throw std::runtime_error("load_topology: " + path + ":" + std::to_string(line_no) +
                               ": expected 'i j' edge line");
    std::string extra;
    if (ls >> extra)
      throw std::runtime_error("load_topology: " + path + ":" + std::to_string(line_no) +
                               ": trailing tokens after edge");
    edges.emplace_back(a, b);
  }
  if (node_count < 0) throw std::runtime_error("load_topology: " + path + ": empty file");
  return Topology(node_count, edges);
}

inline void save_topology(const Topology& topo, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_topology: cannot open " + path);
  out << topo.node_count() << "\n";
  for (auto [a, b] : topo.edges()) out << a << " " << b << "\n";
  if (!out) throw std::runtime_error("save_topology: write failed for " + path);
}

}  // namespace gqomkl
