#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gqomkl/rng.hpp"

namespace gqomkl {

struct Sample {
  Eigen::VectorXd x;
  double y = 0.0;
};

struct Dataset {
  Eigen::MatrixXd features;  // n x d
  Eigen::VectorXd labels;    // entries in {-1, +1}
  std::string name;
  std::string provenance;  // human-readable note about origin and mapping

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

namespace detail {

inline bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

// Map raw labels onto {-1, +1}.  Rules, in order: values already in
// {-1, +1} pass through; {0, 1} maps 1 -> +1 and 0 -> -1; any other pair of
// distinct values maps first-seen -> +1, second -> -1.  More than two
// distinct values is an error.
inline void remap_labels(Eigen::VectorXd& labels, const std::string& source,
                         std::string& note) {
  std::vector<double> distinct;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double v = labels(i);
    if (!std::isfinite(v)) throw std::runtime_error(source + ": non-finite label");
    if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) {
      distinct.push_back(v);
      if (distinct.size() > 2)
        throw std::runtime_error(source + ": more than two distinct label values");
    }
  }
  if (distinct.empty()) throw std::runtime_error(source + ": no labels");
  auto contains = [&](double v) {
    return std::find(distinct.begin(), distinct.end(), v) != distinct.end();
  };
  auto only_from = [&](std::initializer_list<double> allowed) {
    return std::all_of(distinct.begin(), distinct.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  double pos, neg;
  if (only_from({-1.0, 1.0})) {
    note = "labels already in {-1,+1}";
    return;
  }
  if (only_from({0.0, 1.0})) {
    pos = 1.0;
    neg = 0.0;
    note = "labels mapped 1 -> +1, 0 -> -1";
  } else {
    pos = distinct[0];
    neg = distinct.size() > 1 ? distinct[1] : pos;
    note = "labels mapped " + std::to_string(pos) + " -> +1, " + std::to_string(neg) + " -> -1";
  }
  (void)contains;
  for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = labels(i) == pos ? 1.0 : -1.0;
}

struct CsvTable {
  std::vector<std::string> header;  // empty if the file has no header
  std::vector<std::vector<double>> rows;
};

// Reads a numeric CSV; an optional leading line of non-numeric cells is kept
// as the header.  Every data row must have the same arity, all cells numeric.
inline CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  int line_no = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (!parse_number(cells[k], row[k])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        table.header = cells;
        continue;
      }
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (arity == 0)
      arity = row.size();
    else if (row.size() != arity)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(arity) + " columns, got " +
                               std::to_string(row.size()));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");
  if (table.rows[0].size() < 2)
    throw std::runtime_error(path + ": need at least one feature column plus a label column");
  return table;
}

inline Dataset table_to_dataset(CsvTable table, bool drop_id_column, const std::string& path,
                                const std::string& name) {
  std::size_t first_col = 0;
  std::string id_note;
  if (drop_id_column && !table.header.empty()) {
    std::string h0 = table.header[0];
    std::transform(h0.begin(), h0.end(), h0.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (h0 == "id" && table.rows[0].size() >= 3) {
      first_col = 1;
      id_note = "; dropped leading id column";
    }
  }
  const std::size_t cols = table.rows[0].size();
  const int n = static_cast<int>(table.rows.size());
  const int d = static_cast<int>(cols - 1 - first_col);
  if (d < 1) throw std::runtime_error(path + ": no feature columns left");
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) ds.features(i, k) = table.rows[i][first_col + k];
    ds.labels(i) = table.rows[i][cols - 1];
  }
  std::string label_note;
  remap_labels(ds.labels, path, label_note);
  ds.name = name;
  ds.provenance = name + " from " + path + " (n=" + std::to_string(n) +
                  ", d=" + std::to_string(d) + "; " + label_note + id_note + ")";
  return ds;
}

inline std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error(path + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace detail

// CSV with feature columns followed by one label column.
inline Dataset load_banana(const std::string& path) {
  return detail::table_to_dataset(detail::read_numeric_csv(path), false, path, "banana");
}

// Same layout; an initial "ID" column (when a header names it) is dropped,
// and the resulting feature count is recorded in the provenance note.
inline Dataset load_credit_card(const std::string& path) {
  return detail::table_to_dataset(detail::read_numeric_csv(path), true, path, "credit_card");
}

// IDX image/label pair.  Pixels land in [0,1]; digit 8 becomes +1, all other
// digits -1.
inline Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw std::runtime_error("cannot open " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw std::runtime_error("cannot open " + labels_path);

  const std::uint32_t img_magic = detail::read_u32_be(imgs, images_path);
  if (img_magic != 2051)
    throw std::runtime_error(images_path + ": bad magic " + std::to_string(img_magic) +
                             ", expected 2051 (idx3 images)");
  const std::uint32_t n_images = detail::read_u32_be(imgs, images_path);
  const std::uint32_t rows = detail::read_u32_be(imgs, images_path);
  const std::uint32_t cols = detail::read_u32_be(imgs, images_path);

  const std::uint32_t lab_magic = detail::read_u32_be(labs, labels_path);
  if (lab_magic != 2049)
    throw std::runtime_error(labels_path + ": bad magic " + std::to_string(lab_magic) +
                             ", expected 2049 (idx1 labels)");
  const std::uint32_t n_labels = detail::read_u32_be(labs, labels_path);
  if (n_images != n_labels)
    throw std::runtime_error("image/label count mismatch: " + std::to_string(n_images) +
                             " images vs " + std::to_string(n_labels) + " labels");
  if (n_images == 0) throw std::runtime_error(images_path + ": empty image set");
  const std::uint64_t d64 = std::uint64_t(rows) * cols;
  if (d64 == 0 || d64 > (1u << 20)) throw std::runtime_error(images_path + ": implausible image size");
  const int d = static_cast<int>(d64);

  Dataset ds;
  ds.features.resize(n_images, d);
  ds.labels.resize(n_images);
  std::vector<std::uint8_t> buf(d);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    imgs.read(reinterpret_cast<char*>(buf.data()), d);
    if (!imgs) throw std::runtime_error(images_path + ": truncated image data at image " +
                                        std::to_string(i));
    for (int k = 0; k < d; ++k) ds.features(i, k) = buf[k] / 255.0;
  }
  for (std::uint32_t i = 0; i < n_images; ++i) {
    std::uint8_t lab;
    labs.read(reinterpret_cast<char*>(&lab), 1);
    if (!labs) throw std::runtime_error(labels_path + ": truncated label data at label " +
                                        std::to_string(i));
    ds.labels(i) = lab == 8 ? 1.0 : -1.0;
  }
  ds.name = "mnist";
  ds.provenance = "mnist from " + images_path + " + " + labels_path + " (n=" +
                  std::to_string(n_images) + ", d=" + std::to_string(d) +
                  "; digit 8 -> +1, others -> -1)";
  return ds;
}

inline Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("concat: feature dimension mismatch");
  Dataset out;
  out.features.resize(a.n() + b.n(), a.dim());
  out.features.topRows(a.n()) = a.features;
  out.features.bottomRows(b.n()) = b.features;
  out.labels.resize(a.n() + b.n());
  out.labels.head(a.n()) = a.labels;
  out.labels.tail(b.n()) = b.labels;
  out.name = a.name;
  out.provenance = a.provenance + " ++ " + b.provenance;
  return out;
}

// Two spherical Gaussian clusters at +/- (separation/2) along the first axis,
// alternating labels so every prefix is nearly balanced.  separation = 0
// makes the classes indistinguishable.
inline Dataset make_synthetic(int n, int d, double separation, std::uint64_t seed) {
  if (n < 2 || d < 1) throw std::invalid_argument("make_synthetic: need n >= 2 and d >= 1");
  if (!(separation >= 0.0)) throw std::invalid_argument("make_synthetic: separation must be >= 0");
  RandomStream rng(derive_seed(seed, StreamPurpose::synthetic));
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double label = (i % 2 == 0) ? 1.0 : -1.0;
    ds.labels(i) = label;
    for (int k = 0; k < d; ++k) {
      double v = rng.gaussian();
      if (k == 0) v += label * separation / 2.0;
      ds.features(i, k) = v;
    }
  }
  ds.name = "synthetic";
  ds.provenance = "synthetic Gaussian pair (n=" + std::to_string(n) + ", d=" + std::to_string(d) +
                  ", separation=" + std::to_string(separation) + ", seed=" + std::to_string(seed) +
                  ")";
  return ds;
}

// Column-wise z-score with population variance; all-constant columns become 0.
inline Dataset standardize(const Dataset& ds) {
  if (ds.n() < 1) throw std::invalid_argument("standardize: empty dataset");
  Dataset out = ds;
  const double n = static_cast<double>(ds.n());
  for (int k = 0; k < ds.dim(); ++k) {
    const double mean = ds.features.col(k).mean();
    const double var = (ds.features.col(k).array() - mean).square().sum() / n;
    if (var < 1e-24) {
      out.features.col(k).setZero();
    } else {
      out.features.col(k) = (ds.features.col(k).array() - mean) / std::sqrt(var);
    }
  }
  out.provenance = ds.provenance + "; standardized";
  return out;
}

// Random equal split of one dataset into J parallel sample streams: a single
// shuffle deals sample order[t*J + j] to node j at round t, so streams are
// disjoint and every node gets T = floor(n/J) samples.
struct Partition {
  std::shared_ptr<const Dataset> data;
  std::vector<int> order;
  int node_count = 0;  // J
  int length = 0;      // T

  Sample sample(int j, int t) const {
    if (j < 0 || j >= node_count || t < 0 || t >= length)
      throw std::out_of_range("partition: sample index out of range");
    const int row = order[static_cast<std::size_t>(t) * node_count + j];
    return Sample{data->features.row(row).transpose(), data->labels(row)};
  }
};

inline Partition make_partition(std::shared_ptr<const Dataset> data, int node_count,
                                std::uint64_t seed) {
  if (!data) throw std::invalid_argument("make_partition: null dataset");
  if (node_count < 1) throw std::invalid_argument("make_partition: need at least one node");
  if (data->n() < node_count)
    throw std::invalid_argument("make_partition: dataset has " + std::to_string(data->n()) +
                                " samples for " + std::to_string(node_count) + " nodes");
  Partition part;
  part.data = std::move(data);
  part.node_count = node_count;
  part.length = part.data->n() / node_count;
  part.order.resize(part.data->n());
  for (std::size_t i = 0; i < part.order.size(); ++i) part.order[i] = static_cast<int>(i);
  RandomStream rng(derive_seed(seed, StreamPurpose::shuffle));
  for (std::size_t i = part.order.size() - 1; i > 0; --i) {
    const auto k = rng.uniform_below(i + 1);
    std::swap(part.order[i], part.order[k]);
  }
  return part;
}

// The samples a J-node, T-round run actually consumes, flattened in round
// order; this is the dataset the batch comparator should be fit on.
inline Dataset used_samples(const Partition& part) {
  Dataset out;
  const int total = part.node_count * part.length;
  if (total == 0) throw std::invalid_argument("used_samples: empty partition");
  out.features.resize(total, part.data->dim());
  out.labels.resize(total);
  for (int i = 0; i < total; ++i) {
    out.features.row(i) = part.data->features.row(part.order[i]);
    out.labels(i) = part.data->labels(part.order[i]);
  }
  out.name = part.data->name;
  out.provenance = part.data->provenance + "; first " + std::to_string(total) +
                   " samples in partition order";
  return out;
}

}  // namespace gqomkl
