#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gqomkl/baselines.hpp"
#include "gqomkl/protocol.hpp"

namespace gqomkl {

// Everything one CLI invocation needs: the protocol parameters plus dataset
// selection, seeds, baselines and output location.
struct ExperimentConfig {
  SimulationConfig sim;

  std::string dataset;  // banana | credit_card | mnist | synthetic
  std::string data_path;
  std::string mnist_images, mnist_labels;
  std::string mnist_test_images, mnist_test_labels;  // optional, concatenated
  int synthetic_n = 4000;
  int synthetic_d = 2;
  double synthetic_separation = 2.0;
  bool standardize_features = true;

  bool rounds_from_data = true;  // rounds omitted/0: use floor(n / J)
  std::string topology_file;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<BaselineSpec> baselines;
  std::vector<int> sweep_levels = {7, 15, 31};
  std::string out_dir = "results";
};

struct ConfigParseResult {
  ExperimentConfig config;
  std::vector<std::string> errors;  // empty means the config is usable
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  while (!parts.empty() && parts.back().empty()) parts.pop_back();
  return parts;
}

inline bool parse_int_value(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace detail

// Flat "key = value" file; '#' starts a comment.  All violations are
// collected rather than stopping at the first, so one failed invocation
// reports everything that needs fixing.
inline ConfigParseResult parse_experiment_config(const std::string& path) {
  ConfigParseResult result;
  ExperimentConfig& cfg = result.config;
  auto fail = [&](const std::string& msg) { result.errors.push_back(msg); };

  std::ifstream in(path);
  if (!in) {
    fail("cannot open config file " + path);
    return result;
  }

  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) {
      fail(path + ":" + std::to_string(line_no) + ": empty key");
      continue;
    }
    if (!kv.emplace(key, value).second)
      fail(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  std::set<std::string> known;
  auto take = [&](const std::string& key) -> const std::string* {
    known.insert(key);
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto take_double = [&](const std::string& key, double& out) {
    if (const std::string* v = take(key)) {
      double parsed;
      if (detail::parse_number(*v, parsed))
        out = parsed;
      else
        fail("key '" + key + "': expected a number, got '" + *v + "'");
      return true;
    }
    return false;
  };
  auto take_int = [&](const std::string& key, int& out, long long lo, long long hi) {
    if (const std::string* v = take(key)) {
      long long parsed;
      if (detail::parse_int_value(*v, parsed) && parsed >= lo && parsed <= hi)
        out = static_cast<int>(parsed);
      else
        fail("key '" + key + "': expected an integer in [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "], got '" + *v + "'");
      return true;
    }
    return false;
  };
  auto take_string = [&](const std::string& key, std::string& out) {
    if (const std::string* v = take(key)) {
      out = *v;
      return true;
    }
    return false;
  };
  auto take_bool = [&](const std::string& key, bool& out) {
    if (const std::string* v = take(key)) {
      if (*v == "true" || *v == "1")
        out = true;
      else if (*v == "false" || *v == "0")
        out = false;
      else
        fail("key '" + key + "': expected true/false, got '" + *v + "'");
    }
  };

  take_string("dataset", cfg.dataset);
  take_string("data_path", cfg.data_path);
  take_string("mnist_images", cfg.mnist_images);
  take_string("mnist_labels", cfg.mnist_labels);
  take_string("mnist_test_images", cfg.mnist_test_images);
  take_string("mnist_test_labels", cfg.mnist_test_labels);
  take_int("synthetic_n", cfg.synthetic_n, 2, 100000000);
  take_int("synthetic_d", cfg.synthetic_d, 1, 1000000);
  take_double("synthetic_separation", cfg.synthetic_separation);
  take_bool("standardize", cfg.standardize_features);

  cfg.sim.nodes = 20;
  take_int("nodes", cfg.sim.nodes, 2, 1000000);
  int rounds = 0;
  if (take_int("rounds", rounds, 0, 1000000000)) {
    cfg.sim.rounds = rounds;
    cfg.rounds_from_data = rounds == 0;
  }
  cfg.sim.rf_features = 20;
  take_int("rf_features", cfg.sim.rf_features, 1, 1000000);
  cfg.sim.kernel_sigmas = {1.0, 3.0, 5.0};
  if (const std::string* v = take("kernel_sigmas")) {
    cfg.sim.kernel_sigmas.clear();
    for (const std::string& part : detail::split_list(*v)) {
      double s;
      if (detail::parse_number(part, s) && s > 0.0)
        cfg.sim.kernel_sigmas.push_back(s);
      else
        fail("key 'kernel_sigmas': expected positive numbers, got '" + part + "'");
    }
    if (cfg.sim.kernel_sigmas.empty()) fail("key 'kernel_sigmas': list is empty");
  }
  take_double("eta", cfg.sim.eta);
  cfg.sim.lambda = 0.001;
  take_double("lambda", cfg.sim.lambda);
  if (const std::string* v = take("gamma")) {
    if (*v == "theory") {
      cfg.sim.gamma = GammaChoice::theory();
    } else {
      double g;
      if (detail::parse_number(*v, g) && g > 0.0)
        cfg.sim.gamma = GammaChoice::fixed(g);
      else
        fail("key 'gamma': expected a positive number or 'theory', got '" + *v + "'");
    }
  }
  cfg.sim.quantizer_levels = 7;
  if (const std::string* v = take("levels")) {
    if (*v == "identity") {
      cfg.sim.quantizer_levels = 0;
    } else {
      long long m;
      if (detail::parse_int_value(*v, m) && m >= 0 && m <= 0xFFFF)
        cfg.sim.quantizer_levels = static_cast<int>(m);
      else
        fail("key 'levels': expected 'identity' or an integer in [0, 65535], got '" + *v + "'");
    }
  }
  if (const std::string* v = take("topology")) {
    if (*v == "complete")
      cfg.sim.topology = TopologyKind::complete;
    else if (*v == "ring")
      cfg.sim.topology = TopologyKind::ring;
    else if (*v == "path")
      cfg.sim.topology = TopologyKind::path;
    else if (*v == "custom")
      cfg.sim.topology = TopologyKind::custom;
    else
      fail("key 'topology': expected complete|ring|path|custom, got '" + *v + "'");
  }
  take_string("topology_file", cfg.topology_file);
  if (const std::string* v = take("execution")) {
    if (*v == "sequential")
      cfg.sim.execution = Execution::sequential;
    else if (*v == "parallel")
      cfg.sim.execution = Execution::parallel;
    else
      fail("key 'execution': expected sequential|parallel, got '" + *v + "'");
  }
  if (const std::string* v = take("seeds")) {
    cfg.seeds.clear();
    for (const std::string& part : detail::split_list(*v)) {
      long long s;
      if (detail::parse_int_value(part, s) && s >= 0)
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      else
        fail("key 'seeds': expected nonnegative integers, got '" + part + "'");
    }
    if (cfg.seeds.empty()) fail("key 'seeds': list is empty");
  }
  if (const std::string* v = take("baselines")) {
    cfg.baselines.clear();
    for (const std::string& part : detail::split_list(*v)) {
      if (part == "complete_unquantized") {
        cfg.baselines.push_back({BaselineSpec::Kind::complete_unquantized, 0.0});
      } else if (part == "complete_quantized") {
        cfg.baselines.push_back({BaselineSpec::Kind::complete_quantized, 0.0});
      } else if (part.rfind("single_kernel:", 0) == 0) {
        double s;
        if (detail::parse_number(part.substr(14), s) && s > 0.0)
          cfg.baselines.push_back({BaselineSpec::Kind::single_kernel, s});
        else
          fail("key 'baselines': bad bandwidth in '" + part + "'");
      } else {
        fail("key 'baselines': unknown baseline '" + part +
             "' (expected single_kernel:<sigma>, complete_unquantized, complete_quantized)");
      }
    }
  }
  if (const std::string* v = take("sweep_levels")) {
    cfg.sweep_levels.clear();
    for (const std::string& part : detail::split_list(*v)) {
      long long m;
      if (detail::parse_int_value(part, m) && m >= 1 && m <= 0xFFFF)
        cfg.sweep_levels.push_back(static_cast<int>(m));
      else
        fail("key 'sweep_levels': expected integers >= 1, got '" + part + "'");
    }
    if (cfg.sweep_levels.empty()) fail("key 'sweep_levels': list is empty");
  }
  take_string("out_dir", cfg.out_dir);

  for (const auto& [key, value] : kv)
    if (!known.count(key)) fail("unknown key '" + key + "'");

  // cross-field checks
  const std::set<std::string> datasets = {"banana", "credit_card", "mnist", "synthetic"};
  if (cfg.dataset.empty())
    fail("key 'dataset' is required (banana|credit_card|mnist|synthetic)");
  else if (!datasets.count(cfg.dataset))
    fail("key 'dataset': unknown dataset '" + cfg.dataset + "'");
  if ((cfg.dataset == "banana" || cfg.dataset == "credit_card")) {
    if (cfg.data_path.empty())
      fail("dataset '" + cfg.dataset + "' requires key 'data_path'");
    else if (!std::filesystem::exists(cfg.data_path))
      fail("data_path '" + cfg.data_path + "' does not exist");
  }
  if (cfg.dataset == "mnist") {
    for (const auto& [k, v] :
         {std::pair<std::string, std::string>{"mnist_images", cfg.mnist_images},
          {"mnist_labels", cfg.mnist_labels}}) {
      if (v.empty())
        fail("dataset 'mnist' requires key '" + k + "'");
      else if (!std::filesystem::exists(v))
        fail(k + " '" + v + "' does not exist");
    }
    if (cfg.mnist_test_images.empty() != cfg.mnist_test_labels.empty())
      fail("mnist_test_images and mnist_test_labels must be given together");
    for (const auto& v : {cfg.mnist_test_images, cfg.mnist_test_labels})
      if (!v.empty() && !std::filesystem::exists(v)) fail("file '" + v + "' does not exist");
  }
  if (cfg.sim.topology == TopologyKind::custom) {
    if (cfg.topology_file.empty())
      fail("topology 'custom' requires key 'topology_file'");
    else if (!std::filesystem::exists(cfg.topology_file))
      fail("topology_file '" + cfg.topology_file + "' does not exist");
  }
  if (!(cfg.sim.eta > 0.0 && cfg.sim.eta < 1.0))
    fail("key 'eta': must lie in (0,1), got " + std::to_string(cfg.sim.eta));
  if (!(cfg.sim.lambda >= 0.0)) fail("key 'lambda': must be >= 0");
  if (cfg.sim.quantizer_levels > 0 && cfg.sim.rf_features >= 1) {
    const double delta = compression_delta(2 * cfg.sim.rf_features, cfg.sim.quantizer_levels);
    if (!(delta > 0.0))
      fail("key 'levels': " + std::to_string(cfg.sim.quantizer_levels) +
           " levels are too coarse for model dimension " + std::to_string(2 * cfg.sim.rf_features) +
           " (contraction coefficient " + std::to_string(delta) + " <= 0)");
  }
  for (int m : cfg.sweep_levels)
    if (cfg.sim.rf_features >= 1 && !(compression_delta(2 * cfg.sim.rf_features, m) > 0.0))
      fail("key 'sweep_levels': " + std::to_string(m) +
           " levels are too coarse for model dimension " + std::to_string(2 * cfg.sim.rf_features));
  if (cfg.out_dir.empty()) fail("key 'out_dir': must not be empty");
  return result;
}

}  // namespace gqomkl
