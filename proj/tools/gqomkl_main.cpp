#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gqomkl/experiment.hpp"

namespace {

// --seeds takes a single comma-separated token, e.g. --seeds 1,2,3
std::optional<std::vector<std::uint64_t>> parse_seed_list(const std::string& raw,
                                                          std::string& error) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : gqomkl::detail::split_list(raw)) {
    long long v;
    if (!gqomkl::detail::parse_int_value(part, v) || v < 0) {
      error = "--seeds: expected nonnegative integers, got '" + part + "'";
      return std::nullopt;
    }
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) {
    error = "--seeds: list is empty";
    return std::nullopt;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Decentralized online multi-kernel learning over a gossip network with "
      "quantized communication"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_raw;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config file (key = value lines)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seeds", seeds_raw, "comma-separated seed list (overrides config)");
  };

  CLI::App* run = app.add_subcommand("run", "run the protocol and configured baselines");
  add_common(run);
  CLI::App* sweep_topo =
      app.add_subcommand("sweep-topology", "compare complete, ring and path graphs");
  add_common(sweep_topo);
  CLI::App* sweep_quant =
      app.add_subcommand("sweep-quantization", "compare level codecs against identity");
  add_common(sweep_quant);

  CLI11_PARSE(app, argc, argv);

  gqomkl::CliOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (!seeds_raw.empty()) {
    std::string error;
    overrides.seeds = parse_seed_list(seeds_raw, error);
    if (!overrides.seeds) {
      std::cerr << error << "\n";
      return 1;
    }
  }

  if (run->parsed()) return gqomkl::cmd_run(config_path, overrides);
  if (sweep_topo->parsed()) return gqomkl::cmd_sweep_topology(config_path, overrides);
  if (sweep_quant->parsed()) return gqomkl::cmd_sweep_quantization(config_path, overrides);
  return 1;
}
