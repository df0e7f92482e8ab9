#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gqomkl/graph.hpp"
#include "support/oracles.hpp"

using namespace gqomkl;

TEST_CASE("standard topologies have the expected edges", "[graph]") {
  SECTION("complete graph on 4 nodes has 6 edges, all degrees 3") {
    const Topology t = build_topology(TopologyKind::complete, 4);
    REQUIRE(t.edges().size() == 6);
    for (int j = 0; j < 4; ++j) REQUIRE(t.degree(j) == 3);
  }
  SECTION("ring on 5 nodes has 5 edges, all degrees 2") {
    const Topology t = build_topology(TopologyKind::ring, 5);
    REQUIRE(t.edges().size() == 5);
    for (int j = 0; j < 5; ++j) REQUIRE(t.degree(j) == 2);
  }
  SECTION("ring on 2 nodes degenerates to the single edge") {
    const Topology t = build_topology(TopologyKind::ring, 2);
    REQUIRE(t.edges().size() == 1);
  }
  SECTION("path on 4 nodes has 3 edges and degree-1 endpoints") {
    const Topology t = build_topology(TopologyKind::path, 4);
    REQUIRE(t.edges().size() == 3);
    REQUIRE(t.degree(0) == 1);
    REQUIRE(t.degree(3) == 1);
    REQUIRE(t.degree(1) == 2);
  }
  SECTION("neighbor lists are sorted and symmetric") {
    const Topology t = build_topology(TopologyKind::custom, 5,
                                      {{4, 0}, {0, 2}, {2, 4}, {1, 2}, {3, 2}});
    for (int j = 0; j < 5; ++j) {
      const auto& nbrs = t.neighbors(j);
      REQUIRE(std::is_sorted(nbrs.begin(), nbrs.end()));
      for (int i : nbrs) {
        const auto& back = t.neighbors(i);
        REQUIRE(std::find(back.begin(), back.end(), j) != back.end());
      }
    }
  }
}

TEST_CASE("malformed topologies are rejected", "[graph]") {
  REQUIRE_THROWS_AS(build_topology(TopologyKind::complete, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(Topology(3, {{0, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(Topology(3, {{0, 1}, {1, 0}}), std::invalid_argument);  // duplicate
  REQUIRE_THROWS_AS(Topology(3, {{0, 3}}), std::invalid_argument);          // out of range
  SECTION("disconnected graphs name the offending component") {
    try {
      Topology(5, {{0, 1}, {2, 3}, {3, 4}});
      FAIL("expected a disconnect error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      REQUIRE(msg.find("disconnected") != std::string::npos);
      REQUIRE(msg.find("2 3 4") != std::string::npos);
    }
  }
}

TEST_CASE("Metropolis weights on the complete graph are uniform", "[graph]") {
  const GossipMatrix gm = metropolis_weights(build_topology(TopologyKind::complete, 4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) REQUIRE(gm.weights(i, j) == Catch::Approx(0.25).margin(1e-15));
  // spectral gap of the averaging matrix is total: rho = 1, beta = 1
  REQUIRE(gm.rho == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(gm.beta == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("Metropolis weights on the 4-ring have the known spectrum", "[graph]") {
  const GossipMatrix gm = metropolis_weights(build_topology(TopologyKind::ring, 4));
  // all degrees 2 -> edge weight 1/3, diagonal 1/3
  for (int j = 0; j < 4; ++j) REQUIRE(gm.weights(j, j) == Catch::Approx(1.0 / 3).margin(1e-15));
  REQUIRE(gm.weights(0, 1) == Catch::Approx(1.0 / 3).margin(1e-15));
  REQUIRE(gm.weights(0, 2) == 0.0);
  // eigenvalues are {1, 1/3, 1/3, -1/3}
  REQUIRE(gm.rho == Catch::Approx(2.0 / 3).margin(1e-12));
  REQUIRE(gm.beta == Catch::Approx(4.0 / 3).margin(1e-12));
}

TEST_CASE("two-node graphs mix in one step", "[graph]") {
  const GossipMatrix gm = metropolis_weights(build_topology(TopologyKind::path, 2));
  REQUIRE(gm.weights(0, 0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(gm.weights(0, 1) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(gm.rho == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(gm.beta == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("Metropolis weights are doubly stochastic with the edge sparsity pattern",
          "[graph]") {
  const int sizes[] = {2, 4, 7, 20};
  for (const TopologyKind kind : {TopologyKind::complete, TopologyKind::ring, TopologyKind::path}) {
    for (int n : sizes) {
      const Topology topo = build_topology(kind, n);
      const GossipMatrix gm = metropolis_weights(topo);
      for (int i = 0; i < n; ++i) {
        REQUIRE(std::abs(gm.weights.row(i).sum() - 1.0) < 1e-12);
        REQUIRE(std::abs(gm.weights.col(i).sum() - 1.0) < 1e-12);
        for (int j = 0; j < n; ++j) {
          REQUIRE(gm.weights(i, j) >= 0.0);
          if (i != j) {
            const auto& nbrs = topo.neighbors(i);
            const bool edge = std::find(nbrs.begin(), nbrs.end(), j) != nbrs.end();
            if (edge)
              REQUIRE(gm.weights(i, j) > 0.0);
            else
              REQUIRE(gm.weights(i, j) == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("spectral quantities agree with a power-iteration oracle", "[graph]") {
  auto check = [](const Topology& topo) {
    const GossipMatrix gm = metropolis_weights(topo);
    const double rho_oracle = 1.0 - oracle::second_eigenvalue(gm.weights);
    const double beta_oracle = oracle::largest_shift_eigenvalue(gm.weights);
    CAPTURE(topo.node_count());
    REQUIRE(gm.rho == Catch::Approx(rho_oracle).margin(1e-9));
    REQUIRE(gm.beta == Catch::Approx(beta_oracle).margin(1e-9));
  };
  check(build_topology(TopologyKind::ring, 6));
  check(build_topology(TopologyKind::path, 5));
  check(build_topology(TopologyKind::complete, 8));
  check(build_topology(TopologyKind::custom, 6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}}));
}

TEST_CASE("random connected graphs keep the invariants", "[graph]") {
  RandomStream rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_below(10));
    std::vector<std::pair<int, int>> edges;
    // random spanning tree first, then extra edges
    for (int v = 1; v < n; ++v)
      edges.emplace_back(v, static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(v))));
    std::set<std::pair<int, int>> have;
    for (auto [a, b] : edges) have.insert(std::minmax(a, b));
    for (int extra = 0; extra < n; ++extra) {
      const int a = static_cast<int>(rng.uniform_below(n));
      const int b = static_cast<int>(rng.uniform_below(n));
      if (a == b) continue;
      if (have.insert(std::minmax(a, b)).second) edges.push_back(std::minmax(a, b));
    }
    const Topology topo(n, edges);
    const GossipMatrix gm = metropolis_weights(topo);
    CAPTURE(n, edges.size());
    REQUIRE(gm.rho > 0.0);
    REQUIRE(gm.rho <= 1.0 + 1e-12);
    REQUIRE(gm.beta >= 0.0);
    REQUIRE(gm.beta <= 2.0 + 1e-12);
    for (int i = 0; i < n; ++i) REQUIRE(std::abs(gm.weights.row(i).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("spectral_quantities rejects invalid inputs", "[graph]") {
  Eigen::MatrixXd asym(2, 2);
  asym << 0.5, 0.5, 0.4, 0.6;
  REQUIRE_THROWS_AS(spectral_quantities(asym), std::invalid_argument);
  Eigen::MatrixXd bad_sum(2, 2);
  bad_sum << 0.5, 0.4, 0.4, 0.5;
  REQUIRE_THROWS_AS(spectral_quantities(bad_sum), std::invalid_argument);
  Eigen::MatrixXd negative(2, 2);
  negative << 1.5, -0.5, -0.5, 1.5;
  REQUIRE_THROWS_AS(spectral_quantities(negative), std::invalid_argument);
  SECTION("identity matrix passes validation but has zero gap") {
    const SpectralQuantities sq = spectral_quantities(Eigen::MatrixXd::Identity(3, 3));
    REQUIRE(sq.rho == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sq.beta == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("consensus step size matches hand-computed values", "[graph]") {
  SECTION("rho = beta = delta = 1 gives gamma = 1/15, c = 1/82") {
    const ConsensusStep s = consensus_step_size(1.0, 1.0, 1.0);
    // denominator: 16 + 1 + 4 + 2 - 8 = 15
    REQUIRE(s.gamma == Catch::Approx(1.0 / 15).epsilon(1e-15));
    REQUIRE(s.c == Catch::Approx(1.0 / 82).epsilon(1e-15));
  }
  SECTION("beta = 0 (identity-free graph limit) gives gamma = 1/9") {
    const ConsensusStep s = consensus_step_size(1.0, 0.0, 1.0);
    // denominator: 16 + 1 + 0 + 0 - 8 = 9
    REQUIRE(s.gamma == Catch::Approx(1.0 / 9).epsilon(1e-15));
  }
  SECTION("4-ring with a coarse codec, cross-checked term by term") {
    const double rho = 2.0 / 3, beta = 4.0 / 3, delta = 9.0 / 49;
    const ConsensusStep s = consensus_step_size(rho, beta, delta);
    const double denom = 16 * rho + rho * rho + 4 * beta * beta + 2 * rho * beta * beta -
                         8 * rho * delta;
    REQUIRE(s.gamma == Catch::Approx(rho * rho * delta / denom).epsilon(1e-15));
    REQUIRE(s.gamma > 0.0);
    REQUIRE(s.gamma < 1.0);
    REQUIRE(s.c == Catch::Approx(rho * rho * delta / 82.0).epsilon(1e-15));
  }
  SECTION("domain violations are rejected") {
    REQUIRE_THROWS_AS(consensus_step_size(0.0, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(consensus_step_size(1.5, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(consensus_step_size(1.0, 2.5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(consensus_step_size(1.0, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(consensus_step_size(1.0, 1.0, -0.2), std::invalid_argument);
  }
}

TEST_CASE("topology files round-trip", "[graph]") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gqomkl_graph_io";
  fs::create_directories(dir);
  const std::string path = (dir / "topo.txt").string();

  const Topology original = build_topology(TopologyKind::custom, 5,
                                           {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 3}});
  save_topology(original, path);
  const Topology loaded = load_topology(path);
  REQUIRE(loaded.node_count() == original.node_count());
  REQUIRE(loaded.edges() == original.edges());

  SECTION("parse errors carry the line number") {
    const std::string bad = (dir / "bad.txt").string();
    std::ofstream(bad) << "3\n0 1\n1\n";
    try {
      load_topology(bad);
      FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
      REQUIRE(std::string(e.what()).find(":3") != std::string::npos);
    }
    REQUIRE_THROWS_AS(load_topology((dir / "missing.txt").string()), std::runtime_error);
  }
  fs::remove_all(dir);
}
