#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gqomkl {

// Per-round, per-node, per-kernel measurements of one simulation.  Times are
// 0-based in memory and 1-based in the CSV.  "Average loss up to t" always
// means the running mean of the combined loss over all nodes and rounds <= t.
struct MetricsLog {
  int rounds = 0;   // T
  int nodes = 0;    // J
  int kernels = 0;  // P

  std::vector<double> kernel_loss;    // [t*J*P + j*P + p]
  std::vector<double> weight;         // same layout; weight used at round t
  std::vector<double> consensus_dev;  // same layout; ||theta_p^j - mean_j theta_p|| after round t
  std::vector<double> combined_loss;  // [t*J + j]
  std::vector<std::uint64_t> bits_cum;  // [t*J + j]; total bits node j sent through round t

  MetricsLog() = default;
  MetricsLog(int rounds_, int nodes_, int kernels_)
      : rounds(rounds_), nodes(nodes_), kernels(kernels_) {
    if (rounds_ < 0 || nodes_ < 1 || kernels_ < 1)
      throw std::invalid_argument("metrics log: invalid shape");
    const std::size_t tjp = static_cast<std::size_t>(rounds_) * nodes_ * kernels_;
    const std::size_t tj = static_cast<std::size_t>(rounds_) * nodes_;
    kernel_loss.assign(tjp, 0.0);
    weight.assign(tjp, 0.0);
    consensus_dev.assign(tjp, 0.0);
    combined_loss.assign(tj, 0.0);
    bits_cum.assign(tj, 0);
  }

  std::size_t idx(int t, int j, int p) const {
    return (static_cast<std::size_t>(t) * nodes + j) * kernels + p;
  }
  std::size_t idx(int t, int j) const { return static_cast<std::size_t>(t) * nodes + j; }

  // network loss at round t (sum over nodes of the combined loss)
  double network_loss(int t) const {
    double s = 0.0;
    for (int j = 0; j < nodes; ++j) s += combined_loss[idx(t, j)];
    return s;
  }

  std::vector<double> network_loss_per_round() const {
    std::vector<double> out(rounds);
    for (int t = 0; t < rounds; ++t) out[t] = network_loss(t);
    return out;
  }

  // running mean of the combined loss over nodes and rounds <= t
  std::vector<double> running_average_loss() const {
    std::vector<double> out(rounds);
    double cum = 0.0;
    for (int t = 0; t < rounds; ++t) {
      cum += network_loss(t);
      out[t] = cum / (static_cast<double>(t + 1) * nodes);
    }
    return out;
  }

  double final_average_loss() const {
    if (rounds == 0) throw std::logic_error("final_average_loss: empty log");
    return running_average_loss().back();
  }

  // root-sum-square consensus deviation over kernels for node j at round t
  double node_consensus(int t, int j) const {
    double s = 0.0;
    for (int p = 0; p < kernels; ++p) {
      const double d = consensus_dev[idx(t, j, p)];
      s += d * d;
    }
    return std::sqrt(s);
  }

  bool operator==(const MetricsLog&) const = default;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw std::runtime_error("metrics csv: bad number '" + s + "' " + where);
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw std::runtime_error("metrics csv: bad integer '" + s + "' " + where);
  return v;
}

}  // namespace detail

// One row per (t, j, p) with the per-kernel loss, hedge weight and consensus
// deviation, plus one aggregate row per (t, j) with p = -1 carrying the
// combined loss, the root-sum-square consensus deviation over kernels and the
// node's cumulative transmitted bits.  Doubles are written round-trip exact.
inline void write_metrics_csv(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << "t,j,p,kernel_loss,weight,combined_loss,consensus_err,bits_cum\n";
  for (int t = 0; t < log.rounds; ++t) {
    for (int j = 0; j < log.nodes; ++j) {
      for (int p = 0; p < log.kernels; ++p) {
        out << (t + 1) << ',' << j << ',' << p << ','
            << detail::format_double(log.kernel_loss[log.idx(t, j, p)]) << ','
            << detail::format_double(log.weight[log.idx(t, j, p)]) << ",,"
            << detail::format_double(log.consensus_dev[log.idx(t, j, p)]) << ",\n";
      }
      out << (t + 1) << ',' << j << ",-1,,,"
          << detail::format_double(log.combined_loss[log.idx(t, j)]) << ','
          << detail::format_double(log.node_consensus(t, j)) << ','
          << log.bits_cum[log.idx(t, j)] << "\n";
    }
  }
  if (!out) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

inline MetricsLog read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_metrics_csv: " + path + " is empty");
  if (line != "t,j,p,kernel_loss,weight,combined_loss,consensus_err,bits_cum")
    throw std::runtime_error("read_metrics_csv: unexpected header in " + path);

  struct Row {
    int t, j, p;
    std::string fields[5];
  };
  std::vector<Row> rows;
  int max_t = 0, max_j = -1, max_p = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    const std::string where = "at " + path + ":" + std::to_string(line_no);
    if (cells.size() != 8)
      throw std::runtime_error("read_metrics_csv: expected 8 columns " + where);
    Row r;
    r.t = static_cast<int>(detail::parse_int(cells[0], where));
    r.j = static_cast<int>(detail::parse_int(cells[1], where));
    r.p = static_cast<int>(detail::parse_int(cells[2], where));
    for (int k = 0; k < 5; ++k) r.fields[k] = cells[3 + k];
    if (r.t < 1 || r.j < 0 || r.p < -1)
      throw std::runtime_error("read_metrics_csv: bad indices " + where);
    max_t = std::max(max_t, r.t);
    max_j = std::max(max_j, r.j);
    max_p = std::max(max_p, r.p);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("read_metrics_csv: no data rows in " + path);
  MetricsLog log(max_t, max_j + 1, max_p + 1);
  for (const auto& r : rows) {
    const std::string where = "for row (t=" + std::to_string(r.t) + ", j=" + std::to_string(r.j) +
                              ", p=" + std::to_string(r.p) + ") in " + path;
    if (r.p >= 0) {
      const auto i = log.idx(r.t - 1, r.j, r.p);
      log.kernel_loss[i] = detail::parse_double(r.fields[0], where);
      log.weight[i] = detail::parse_double(r.fields[1], where);
      log.consensus_dev[i] = detail::parse_double(r.fields[3], where);
    } else {
      const auto i = log.idx(r.t - 1, r.j);
      log.combined_loss[i] = detail::parse_double(r.fields[2], where);
      log.bits_cum[i] = static_cast<std::uint64_t>(detail::parse_int(r.fields[4], where));
    }
  }
  return log;
}

}  // namespace gqomkl
