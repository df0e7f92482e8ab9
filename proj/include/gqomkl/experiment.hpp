#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gqomkl/analysis.hpp"
#include "gqomkl/baselines.hpp"
#include "gqomkl/config.hpp"
#include "gqomkl/metrics.hpp"
#include "gqomkl/protocol.hpp"
#include "gqomkl/svg.hpp"

namespace gqomkl {

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
};

namespace detail {

struct PreparedExperiment {
  ExperimentConfig cfg;
  std::shared_ptr<const Dataset> dataset;
};

// Parse + validate + load data.  Throws std::invalid_argument for anything
// the user must fix; nothing is written before this returns.
inline PreparedExperiment prepare_experiment(const std::string& config_path,
                                             const CliOverrides& overrides) {
  ConfigParseResult parsed = parse_experiment_config(config_path);
  if (overrides.out_dir) parsed.config.out_dir = *overrides.out_dir;
  if (overrides.seeds) {
    if (overrides.seeds->empty())
      parsed.errors.push_back("--seeds: list is empty");
    else
      parsed.config.seeds = *overrides.seeds;
  }
  if (!parsed.errors.empty()) {
    std::string all;
    for (const auto& e : parsed.errors) all += e + "\n";
    all.pop_back();
    throw std::invalid_argument(all);
  }
  ExperimentConfig& cfg = parsed.config;

  Dataset raw;
  if (cfg.dataset == "banana") {
    raw = load_banana(cfg.data_path);
  } else if (cfg.dataset == "credit_card") {
    raw = load_credit_card(cfg.data_path);
  } else if (cfg.dataset == "mnist") {
    raw = load_mnist(cfg.mnist_images, cfg.mnist_labels);
    if (!cfg.mnist_test_images.empty())
      raw = concat(raw, load_mnist(cfg.mnist_test_images, cfg.mnist_test_labels));
  } else {  // synthetic
    raw = make_synthetic(cfg.synthetic_n, cfg.synthetic_d, cfg.synthetic_separation,
                         cfg.seeds.front());
  }
  if (cfg.standardize_features) raw = standardize(raw);
  auto dataset = std::make_shared<const Dataset>(std::move(raw));

  if (dataset->n() < cfg.sim.nodes)
    throw std::invalid_argument("dataset has " + std::to_string(dataset->n()) +
                                " samples, fewer than the " + std::to_string(cfg.sim.nodes) +
                                " nodes");
  const int max_rounds = dataset->n() / cfg.sim.nodes;
  if (cfg.rounds_from_data)
    cfg.sim.rounds = max_rounds;
  else if (cfg.sim.rounds > max_rounds)
    throw std::invalid_argument("rounds = " + std::to_string(cfg.sim.rounds) +
                                " exceeds floor(n / nodes) = " + std::to_string(max_rounds));
  if (cfg.sim.topology == TopologyKind::custom) {
    Topology topo = load_topology(cfg.topology_file);
    if (topo.node_count() != cfg.sim.nodes)
      throw std::invalid_argument("topology_file has " + std::to_string(topo.node_count()) +
                                  " nodes, config has " + std::to_string(cfg.sim.nodes));
    cfg.sim.custom_edges = topo.edges();
  }
  validate_config(cfg.sim, dataset->dim());
  return PreparedExperiment{std::move(cfg), std::move(dataset)};
}

inline std::string describe_sim(const SimulationConfig& sim) {
  std::ostringstream os;
  os << "nodes=" << sim.nodes << " rounds=" << sim.rounds << " rf_features=" << sim.rf_features
     << " kernels=";
  for (std::size_t p = 0; p < sim.kernel_sigmas.size(); ++p)
    os << (p ? "," : "") << sim.kernel_sigmas[p];
  os << " eta=" << sim.eta << " lambda=" << sim.lambda << " levels=";
  if (sim.quantizer_levels == 0)
    os << "identity";
  else
    os << sim.quantizer_levels;
  os << " topology=" << topology_kind_name(sim.topology);
  return os.str();
}

// mean, over seeds, of each variant's running-average-loss curve, re-derived
// from the CSV files the run just wrote
inline std::map<std::string, std::vector<double>> mean_curves_from_csv(
    const std::string& dir, const std::map<std::string, std::vector<std::string>>& files) {
  std::map<std::string, std::vector<double>> curves;
  for (const auto& [variant, paths] : files) {
    std::vector<double> mean;
    for (const auto& p : paths) {
      const MetricsLog log = read_metrics_csv(p);
      const std::vector<double> curve = log.running_average_loss();
      if (mean.empty()) mean.assign(curve.size(), 0.0);
      if (mean.size() != curve.size())
        throw std::runtime_error("inconsistent round counts between seed runs in " + dir);
      for (std::size_t t = 0; t < curve.size(); ++t) mean[t] += curve[t];
    }
    for (double& v : mean) v /= static_cast<double>(paths.size());
    curves[variant] = std::move(mean);
  }
  return curves;
}

inline std::vector<double> round_axis(std::size_t rounds) {
  std::vector<double> x(rounds);
  for (std::size_t t = 0; t < rounds; ++t) x[t] = static_cast<double>(t + 1);
  return x;
}

}  // namespace detail

// "run": the protocol on the configured graph plus every configured
// baseline, one run per seed.  Emits metrics_<seed>.csv for the main variant,
// metrics_<baseline>_<seed>.csv per baseline, a mean loss curve plot and a
// summary re-derived from those CSVs.
inline int cmd_run(const std::string& config_path, const CliOverrides& overrides) {
  detail::PreparedExperiment prep;
  try {
    prep = detail::prepare_experiment(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    const ExperimentConfig& cfg = prep.cfg;
    std::filesystem::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir + "/";

    std::map<std::string, std::vector<std::string>> files;  // variant -> csv per seed
    double resolved_gamma = 0.0, rho = 0.0, beta = 0.0, delta = 1.0;
    for (const std::uint64_t seed : cfg.seeds) {
      SimulationConfig sim = cfg.sim;
      sim.seed = seed;
      Partition part = make_partition(prep.dataset, sim.nodes, seed);
      SimulationResult main = run_simulation(sim, part);
      resolved_gamma = main.gamma;
      rho = main.rho;
      beta = main.beta;
      delta = main.delta;
      const std::string main_csv = dir + "metrics_" + std::to_string(seed) + ".csv";
      write_metrics_csv(main.log, main_csv);
      files["gossiped"].push_back(main_csv);
      for (const BaselineSpec& b : cfg.baselines) {
        SimulationResult res = run_baseline(b, sim, part);
        const std::string csv =
            dir + "metrics_" + baseline_name(b) + "_" + std::to_string(seed) + ".csv";
        write_metrics_csv(res.log, csv);
        files[baseline_name(b)].push_back(csv);
      }
    }

    const auto curves = detail::mean_curves_from_csv(cfg.out_dir, files);
    std::vector<Series> series;
    for (const auto& [variant, curve] : curves)
      series.push_back(Series{variant, detail::round_axis(curve.size()), curve});
    write_line_chart(dir + "loss_curve.svg", "Running average loss (" + cfg.dataset + ")",
                     "round", "average loss", series);

    std::ofstream sum(dir + "summary.txt");
    if (!sum) throw std::runtime_error("cannot open " + dir + "summary.txt");
    sum << "command: run\n"
        << "dataset: " << prep.dataset->provenance << "\n"
        << "config: " << detail::describe_sim(cfg.sim) << "\n"
        << "gamma: " << detail::format_double(resolved_gamma) << " (rho=" << rho
        << ", beta=" << beta << ", delta=" << delta << ")\n"
        << "seeds:";
    for (auto s : cfg.seeds) sum << " " << s;
    sum << "\n";
    for (const auto& [variant, curve] : curves)
      sum << "final average loss, " << variant << ": " << detail::format_double(curve.back())
          << " (mean over " << cfg.seeds.size() << " seed(s))\n";
    if (!sum) throw std::runtime_error("write failed for " + dir + "summary.txt");
    std::cout << "wrote " << files.size() * cfg.seeds.size() << " metric files, summary.txt and "
              << "loss_curve.svg to " << cfg.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return 2;
  }
}

// "sweep-topology": the same experiment on complete, ring and path graphs
// (same seeds, same data), reporting how the mean final loss orders.
inline int cmd_sweep_topology(const std::string& config_path, const CliOverrides& overrides) {
  detail::PreparedExperiment prep;
  try {
    prep = detail::prepare_experiment(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    const ExperimentConfig& cfg = prep.cfg;
    std::filesystem::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir + "/";
    const TopologyKind kinds[] = {TopologyKind::complete, TopologyKind::ring, TopologyKind::path};

    std::map<std::string, std::vector<std::string>> files;
    for (const std::uint64_t seed : cfg.seeds) {
      Partition part = make_partition(prep.dataset, cfg.sim.nodes, seed);
      for (const TopologyKind kind : kinds) {
        SimulationConfig sim = cfg.sim;
        sim.seed = seed;
        sim.topology = kind;
        sim.custom_edges.clear();
        SimulationResult res = run_simulation(sim, part);
        const std::string csv = dir + "metrics_" + topology_kind_name(kind) + "_" +
                                std::to_string(seed) + ".csv";
        write_metrics_csv(res.log, csv);
        files[topology_kind_name(kind)].push_back(csv);
      }
    }

    const auto curves = detail::mean_curves_from_csv(cfg.out_dir, files);
    std::vector<Series> series;
    for (const char* name : {"complete", "ring", "path"})
      series.push_back(Series{name, detail::round_axis(curves.at(name).size()), curves.at(name)});
    write_line_chart(dir + "topology_curves.svg",
                     "Running average loss by topology (" + cfg.dataset + ")", "round",
                     "average loss", series);

    const double fc = curves.at("complete").back();
    const double fr = curves.at("ring").back();
    const double fp = curves.at("path").back();
    std::ofstream sum(dir + "summary.txt");
    if (!sum) throw std::runtime_error("cannot open " + dir + "summary.txt");
    sum << "command: sweep-topology\n"
        << "dataset: " << prep.dataset->provenance << "\n"
        << "config: " << detail::describe_sim(cfg.sim) << "\nseeds:";
    for (auto s : cfg.seeds) sum << " " << s;
    sum << "\n"
        << "final average loss, complete: " << detail::format_double(fc) << "\n"
        << "final average loss, ring:     " << detail::format_double(fr) << "\n"
        << "final average loss, path:     " << detail::format_double(fp) << "\n"
        << "ordering complete <= ring <= path: " << ((fc <= fr && fr <= fp) ? "yes" : "no")
        << "\n"
        << "max relative spread: "
        << detail::format_double((std::max({fc, fr, fp}) - std::min({fc, fr, fp})) /
                                 std::max({fc, fr, fp}))
        << "\n";
    if (!sum) throw std::runtime_error("write failed for " + dir + "summary.txt");
    std::cout << "wrote metric files, summary.txt and topology_curves.svg to " << cfg.out_dir
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return 2;
  }
}

// "sweep-quantization": the configured experiment at several level counts
// plus the identity codec, reporting final-loss deviations and the bits each
// node transmitted.
inline int cmd_sweep_quantization(const std::string& config_path, const CliOverrides& overrides) {
  detail::PreparedExperiment prep;
  try {
    prep = detail::prepare_experiment(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    const ExperimentConfig& cfg = prep.cfg;
    std::filesystem::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir + "/";

    std::vector<std::pair<std::string, int>> variants;  // name, levels (0 = identity)
    for (int m : cfg.sweep_levels) variants.emplace_back("M" + std::to_string(m), m);
    variants.emplace_back("identity", 0);

    std::map<std::string, std::vector<std::string>> files;
    for (const std::uint64_t seed : cfg.seeds) {
      Partition part = make_partition(prep.dataset, cfg.sim.nodes, seed);
      for (const auto& [name, levels] : variants) {
        SimulationConfig sim = cfg.sim;
        sim.seed = seed;
        sim.quantizer_levels = levels;
        SimulationResult res = run_simulation(sim, part);
        const std::string csv = dir + "metrics_" + name + "_" + std::to_string(seed) + ".csv";
        write_metrics_csv(res.log, csv);
        files[name].push_back(csv);
      }
    }

    // mean final loss and mean cumulative bits per node, re-read from disk
    std::map<std::string, double> final_loss, bits_per_node;
    for (const auto& [name, paths] : files) {
      double loss_sum = 0.0, bits_sum = 0.0;
      for (const auto& p : paths) {
        const MetricsLog log = read_metrics_csv(p);
        loss_sum += log.final_average_loss();
        double node_bits = 0.0;
        for (int j = 0; j < log.nodes; ++j)
          node_bits += static_cast<double>(log.bits_cum[log.idx(log.rounds - 1, j)]);
        bits_sum += node_bits / log.nodes;
      }
      final_loss[name] = loss_sum / static_cast<double>(paths.size());
      bits_per_node[name] = bits_sum / static_cast<double>(paths.size());
    }

    const auto curves = detail::mean_curves_from_csv(cfg.out_dir, files);
    std::vector<Series> series;
    for (const auto& [name, levels] : variants)
      series.push_back(Series{name, detail::round_axis(curves.at(name).size()), curves.at(name)});
    write_line_chart(dir + "quantization_curves.svg",
                     "Running average loss by codec (" + cfg.dataset + ")", "round",
                     "average loss", series);

    std::ofstream sum(dir + "summary.txt");
    if (!sum) throw std::runtime_error("cannot open " + dir + "summary.txt");
    sum << "command: sweep-quantization\n"
        << "dataset: " << prep.dataset->provenance << "\n"
        << "config: " << detail::describe_sim(cfg.sim) << "\nseeds:";
    for (auto s : cfg.seeds) sum << " " << s;
    sum << "\n";
    double max_dev = 0.0;
    for (const auto& [name, levels] : variants) {
      const double dev = std::abs(final_loss[name] - final_loss["identity"]);
      if (name != "identity") max_dev = std::max(max_dev, dev);
      sum << "codec " << name << ": final average loss = " << detail::format_double(final_loss[name])
          << ", |deviation from identity| = " << detail::format_double(dev)
          << ", mean cumulative bits per node = " << detail::format_double(bits_per_node[name])
          << "\n";
    }
    sum << "max |final-loss deviation from identity| over level codecs: "
        << detail::format_double(max_dev) << "\n";
    if (!sum) throw std::runtime_error("write failed for " + dir + "summary.txt");
    std::cout << "wrote metric files, summary.txt and quantization_curves.svg to " << cfg.out_dir
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gqomkl
