#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gqomkl/rng.hpp"

namespace gqomkl {

// Contraction coefficient of the randomized level quantizer on vectors of
// length n with M levels: delta = 1 - min(n / M^2, sqrt(n) / M).  Positive
// delta is required for compressed gossip to contract; callers must check.
inline double compression_delta(int dimension, int levels) {
  if (dimension < 1) throw std::invalid_argument("compression_delta: dimension must be >= 1");
  if (levels < 1) throw std::invalid_argument("compression_delta: levels must be >= 1");
  const double n = static_cast<double>(dimension);
  const double m = static_cast<double>(levels);
  return 1.0 - std::min(n / (m * m), std::sqrt(n) / m);
}

// levels == 0 denotes the lossless identity codec (delta = 1): payloads carry
// the raw vector.  levels >= 1 is the randomized level quantizer.
struct QuantizerSpec {
  int levels = 0;          // M
  int bits_per_level = 0;  // smallest b with 2^b - 1 >= M
  int dimension = 0;       // n
  double delta = 1.0;

  bool identity() const { return levels == 0; }
};

inline QuantizerSpec make_identity_spec(int dimension) {
  if (dimension < 1) throw std::invalid_argument("quantizer: dimension must be >= 1");
  QuantizerSpec spec;
  spec.dimension = dimension;
  spec.delta = 1.0;
  return spec;
}

inline QuantizerSpec make_quantizer_spec(int dimension, int levels) {
  if (dimension < 1) throw std::invalid_argument("quantizer: dimension must be >= 1");
  if (levels < 1) throw std::invalid_argument("quantizer: levels must be >= 1");
  if (levels > 0xFFFF) throw std::invalid_argument("quantizer: levels must fit in 16 bits");
  QuantizerSpec spec;
  spec.levels = levels;
  spec.dimension = dimension;
  spec.bits_per_level = std::bit_width(static_cast<unsigned>(levels));
  spec.delta = compression_delta(dimension, levels);
  if (!(spec.delta > 0.0))
    throw std::invalid_argument(
        "quantizer: " + std::to_string(levels) + " levels are too coarse for dimension " +
        std::to_string(dimension) + " (contraction coefficient " + std::to_string(spec.delta) +
        " <= 0); increase the level count");
  return spec;
}

struct QuantizedVector {
  bool identity = false;
  double norm = 0.0;                  // Euclidean norm of the source vector
  std::vector<std::uint8_t> signs;    // 1 = negative
  std::vector<std::uint16_t> levels;  // each in [0, M]
  std::vector<double> raw;            // identity codec payload

  bool operator==(const QuantizedVector&) const = default;
};

// Randomized rounding onto the grid {0, 1/M, ..., 1} scaled by the norm:
// element v_i maps to norm * sign(v_i) * L_i / M where L_i is
// floor(M|v_i|/norm) or the next level up, chosen so the result is unbiased.
inline QuantizedVector quantize(const Eigen::VectorXd& v, const QuantizerSpec& spec,
                                RandomStream& rng) {
  if (v.size() != spec.dimension)
    throw std::invalid_argument("quantize: vector has length " + std::to_string(v.size()) +
                                ", spec expects " + std::to_string(spec.dimension));
  if (!v.allFinite()) throw std::invalid_argument("quantize: vector has non-finite entries");
  QuantizedVector q;
  if (spec.identity()) {
    q.identity = true;
    q.raw.assign(v.data(), v.data() + v.size());
    return q;
  }
  const int n = spec.dimension;
  const int m = spec.levels;
  q.signs.assign(n, 0);
  q.levels.assign(n, 0);
  const double norm = v.norm();
  q.norm = norm;
  if (norm == 0.0) return q;  // zero vector -> zero encoding, no random draws
  for (int i = 0; i < n; ++i) {
    const double r = std::min(static_cast<double>(m) * std::abs(v(i)) / norm,
                              static_cast<double>(m));
    const double lower = std::floor(r);
    const double u = rng.uniform();  // one draw per element, taken unconditionally
    int level = static_cast<int>(lower);
    if (u < r - lower) ++level;
    if (level > m) level = m;
    q.levels[i] = static_cast<std::uint16_t>(level);
    q.signs[i] = v(i) < 0.0 ? 1 : 0;
  }
  return q;
}

inline Eigen::VectorXd dequantize(const QuantizedVector& q, const QuantizerSpec& spec) {
  if (spec.identity() != q.identity)
    throw std::invalid_argument("dequantize: payload and spec disagree about the codec");
  if (q.identity) {
    if (static_cast<int>(q.raw.size()) != spec.dimension)
      throw std::invalid_argument("dequantize: raw payload has wrong length");
    Eigen::VectorXd v(spec.dimension);
    std::memcpy(v.data(), q.raw.data(), q.raw.size() * sizeof(double));
    return v;
  }
  const int n = spec.dimension;
  if (static_cast<int>(q.levels.size()) != n || static_cast<int>(q.signs.size()) != n)
    throw std::invalid_argument("dequantize: payload has wrong length");
  if (!std::isfinite(q.norm) || q.norm < 0.0)
    throw std::invalid_argument("dequantize: invalid norm");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    if (q.levels[i] > spec.levels)
      throw std::invalid_argument("dequantize: level " + std::to_string(q.levels[i]) +
                                  " exceeds maximum " + std::to_string(spec.levels));
    const double mag = q.norm * (static_cast<double>(q.levels[i]) / spec.levels);
    v(i) = q.signs[i] ? -mag : mag;
  }
  return v;
}

// Payload size in bytes: the level codec sends an 8-byte norm plus
// ceil(n (1 + b) / 8) packed sign/level bits; the identity codec sends 8n.
inline std::size_t wire_size(const QuantizerSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.dimension);
  if (spec.identity()) return 8 * n;
  const std::size_t bits = n * (1 + static_cast<std::size_t>(spec.bits_per_level));
  return 8 + (bits + 7) / 8;
}

namespace detail {

inline void store_f64_le(double value, std::uint8_t* out) {
  const auto u = std::bit_cast<std::uint64_t>(value);
  for (int k = 0; k < 8; ++k) out[k] = static_cast<std::uint8_t>(u >> (8 * k));
}

inline double load_f64_le(const std::uint8_t* in) {
  std::uint64_t u = 0;
  for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(in[k]) << (8 * k);
  return std::bit_cast<double>(u);
}

}  // namespace detail

// Little-endian norm, then per element one sign bit followed by
// bits_per_level level bits (most significant first), packed MSB-first into
// consecutive bytes.  The identity codec is 8n bytes of little-endian doubles.
inline std::vector<std::uint8_t> encode_wire(const QuantizedVector& q,
                                             const QuantizerSpec& spec) {
  if (spec.identity() != q.identity)
    throw std::invalid_argument("encode_wire: payload and spec disagree about the codec");
  std::vector<std::uint8_t> out(wire_size(spec), 0);
  if (q.identity) {
    if (static_cast<int>(q.raw.size()) != spec.dimension)
      throw std::invalid_argument("encode_wire: raw payload has wrong length");
    for (int i = 0; i < spec.dimension; ++i) detail::store_f64_le(q.raw[i], out.data() + 8 * i);
    return out;
  }
  const int n = spec.dimension;
  if (static_cast<int>(q.levels.size()) != n || static_cast<int>(q.signs.size()) != n)
    throw std::invalid_argument("encode_wire: payload has wrong length");
  detail::store_f64_le(q.norm, out.data());
  std::size_t bit = 64;
  auto put_bit = [&](int v) {
    if (v) out[bit >> 3] |= static_cast<std::uint8_t>(0x80u >> (bit & 7));
    ++bit;
  };
  for (int i = 0; i < n; ++i) {
    if (q.levels[i] > spec.levels)
      throw std::invalid_argument("encode_wire: level exceeds maximum");
    put_bit(q.signs[i] ? 1 : 0);
    for (int k = spec.bits_per_level - 1; k >= 0; --k) put_bit((q.levels[i] >> k) & 1);
  }
  return out;
}

inline QuantizedVector decode_wire(std::span<const std::uint8_t> bytes,
                                   const QuantizerSpec& spec) {
  const std::size_t expected = wire_size(spec);
  if (bytes.size() != expected)
    throw std::invalid_argument("decode_wire: payload is " + std::to_string(bytes.size()) +
                                " bytes, expected " + std::to_string(expected));
  QuantizedVector q;
  if (spec.identity()) {
    q.identity = true;
    q.raw.resize(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) q.raw[i] = detail::load_f64_le(bytes.data() + 8 * i);
    for (double x : q.raw)
      if (!std::isfinite(x)) throw std::invalid_argument("decode_wire: non-finite entry");
    return q;
  }
  const int n = spec.dimension;
  q.norm = detail::load_f64_le(bytes.data());
  if (!std::isfinite(q.norm) || q.norm < 0.0)
    throw std::invalid_argument("decode_wire: invalid norm");
  q.signs.assign(n, 0);
  q.levels.assign(n, 0);
  std::size_t bit = 64;
  auto get_bit = [&]() {
    const int v = (bytes[bit >> 3] >> (7 - (bit & 7))) & 1;
    ++bit;
    return v;
  };
  for (int i = 0; i < n; ++i) {
    q.signs[i] = static_cast<std::uint8_t>(get_bit());
    std::uint16_t level = 0;
    for (int k = 0; k < spec.bits_per_level; ++k)
      level = static_cast<std::uint16_t>((level << 1) | get_bit());
    if (level > spec.levels)
      throw std::invalid_argument("decode_wire: level " + std::to_string(level) +
                                  " exceeds maximum " + std::to_string(spec.levels));
    q.levels[i] = level;
  }
  return q;
}

}  // namespace gqomkl
