#pragma once

/**
 * @file topology.hpp
 * @brief Hanoi networks of degree three (HN3) and four (HN4).
 *
 * A Hanoi network of size N = 2^n is a periodic ring over the vertices
 * 1..N plus long-range edges that join vertices of equal hierarchy. A vertex
 * x is written x = 2^i (2j + 1), where i is the hierarchy level and j the
 * position inside that level. The two top levels (i = n-1 and i = n) hold a
 * single vertex each, and their long-range ports loop back onto themselves.
 *
 * Coin ports follow a fixed convention:
 *   port 0      ring edge toward x+1
 *   port 1      ring edge toward x-1
 *   port 2(,3)  long-range edge(s)
 *   port d      lackadaisical self-loop (engine only)
 */

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hanoi_walk {

enum class NetworkKind { HN3, HN4 };

inline std::string_view to_string(NetworkKind kind) {
  return kind == NetworkKind::HN3 ? "hn3" : "hn4";
}

inline NetworkKind parse_network_kind(std::string_view text) {
  if (text == "hn3" || text == "HN3") return NetworkKind::HN3;
  if (text == "hn4" || text == "HN4") return NetworkKind::HN4;
  throw std::invalid_argument("unknown network kind '" + std::string(text) + "' (expected hn3 or hn4)");
}

/// Number of non-loop ports per vertex.
constexpr int degree_of(NetworkKind kind) { return kind == NetworkKind::HN3 ? 3 : 4; }

inline constexpr int kMinSizeExponent = 2;
inline constexpr int kMaxSizeExponent = 30;

/// Vertex index in 1..N.
using Vertex = std::int64_t;

class NetworkSpec {
 public:
  NetworkSpec(NetworkKind kind, int n) : kind_(kind), n_(n) {
    if (n < kMinSizeExponent || n > kMaxSizeExponent) {
      throw std::domain_error("size exponent n=" + std::to_string(n) + " outside [" +
                              std::to_string(kMinSizeExponent) + ", " +
                              std::to_string(kMaxSizeExponent) + "]");
    }
  }

  NetworkKind kind() const { return kind_; }
  int n() const { return n_; }
  Vertex vertex_count() const { return Vertex{1} << n_; }
  int degree() const { return degree_of(kind_); }

  bool contains(Vertex x) const { return x >= 1 && x <= vertex_count(); }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

 private:
  NetworkKind kind_;
  int n_;
};

struct HierCoord {
  int level = 0;           // i
  std::int64_t position = 0;  // j

  friend bool operator==(const HierCoord&, const HierCoord&) = default;
};

struct PortState {
  int port = 0;
  Vertex vertex = 1;

  friend bool operator==(const PortState&, const PortState&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const HierCoord& c) {
  return os << "(i=" << c.level << ", j=" << c.position << ")";
}

inline std::ostream& operator<<(std::ostream& os, const PortState& s) {
  return os << "(port " << s.port << ", x=" << s.vertex << ")";
}

namespace detail {

inline void check_exponent(int n) {
  if (n < 1 || n > kMaxSizeExponent) {
    throw std::domain_error("size exponent n=" + std::to_string(n) + " out of range");
  }
}

inline void check_vertex(const NetworkSpec& spec, Vertex x) {
  if (!spec.contains(x)) {
    throw std::domain_error("vertex " + std::to_string(x) + " outside 1.." +
                            std::to_string(spec.vertex_count()));
  }
}

/// Ring neighbor with 0 -> N and N+1 -> 1.
inline Vertex ring_wrap(Vertex x, Vertex count) {
  if (x < 1) return x + count;
  if (x > count) return x - count;
  return x;
}

}  // namespace detail

/// Largest position index at hierarchy level i: floor(2^(n-i-1) - 1/2).
inline std::int64_t j_max(int level, int n) {
  detail::check_exponent(n);
  if (level < 0 || level > n) {
    throw std::domain_error("hierarchy level " + std::to_string(level) + " outside [0, " +
                            std::to_string(n) + "]");
  }
  // 2^(n-i-1) - 1/2 floors to 2^(n-i-1) - 1 for i <= n-1, and to 0 for i = n.
  if (level >= n - 1) return 0;
  return (std::int64_t{1} << (n - level - 1)) - 1;
}

/// Splits x = 2^i (2j + 1); x = 2^n lands on (n, 0).
inline HierCoord decompose(Vertex x, int n) {
  detail::check_exponent(n);
  if (x < 1 || x > (Vertex{1} << n)) {
    throw std::domain_error("vertex " + std::to_string(x) + " outside 1..2^" + std::to_string(n));
  }
  int level = 0;
  while ((x & 1) == 0) {
    x >>= 1;
    ++level;
  }
  return {level, (x - 1) / 2};
}

inline Vertex compose(HierCoord c, int n) {
  const std::int64_t top = j_max(c.level, n);
  if (c.position < 0 || c.position > top) {
    throw std::domain_error("position j=" + std::to_string(c.position) + " outside [0, " +
                            std::to_string(top) + "] at level " + std::to_string(c.level));
  }
  return (Vertex{1} << c.level) * (2 * c.position + 1);
}

/// True for the two vertices whose long-range ports are self-loops.
inline bool is_terminal(const NetworkSpec& spec, Vertex x) {
  return x == spec.vertex_count() || x == spec.vertex_count() / 2;
}

/**
 * Returns true iff x is 2^(n-1) or 2^n. Their long-range edges close on
 * themselves, so no amplitude reaches them through the hierarchy and a
 * walk search cannot amplify them.
 */
inline bool is_unfindable_target(const NetworkSpec& spec, Vertex x) {
  detail::check_vertex(spec, x);
  return is_terminal(spec, x);
}

/**
 * Image of the basis state (port, vertex) under the flip-flop shift.
 *
 * The shift moves the walker along the edge named by the port and relabels
 * the port with the direction pointing back, so the map is an involution on
 * the d*N non-loop basis states. The loop port is handled by the engine.
 */
inline PortState flip_flop_target(const NetworkSpec& spec, PortState s) {
  const int d = spec.degree();
  if (s.port < 0 || s.port >= d) {
    throw std::invalid_argument("flip_flop_target: port " + std::to_string(s.port) +
                                " is not a network edge (valid 0.." + std::to_string(d - 1) + ")");
  }
  detail::check_vertex(spec, s.vertex);
  const Vertex count = spec.vertex_count();

  switch (s.port) {
    case 0:
      return {1, detail::ring_wrap(s.vertex + 1, count)};
    case 1:
      return {0, detail::ring_wrap(s.vertex - 1, count)};
    default:
      break;
  }

  if (is_terminal(spec, s.vertex)) return s;

  const int n = spec.n();
  HierCoord c = decompose(s.vertex, n);
  if (spec.kind() == NetworkKind::HN3) {
    c.position += (c.position % 2 == 0) ? 1 : -1;
    return {2, compose(c, n)};
  }

  const std::int64_t period = j_max(c.level, n) + 1;
  if (s.port == 2) {
    c.position = (c.position + 1) % period;
    return {3, compose(c, n)};
  }
  c.position = (c.position - 1 + period) % period;
  return {2, compose(c, n)};
}

/// The d non-loop (port, destination) pairs leaving x, ordered by port.
inline std::vector<PortState> neighbors(const NetworkSpec& spec, Vertex x) {
  detail::check_vertex(spec, x);
  std::vector<PortState> out;
  out.reserve(static_cast<std::size_t>(spec.degree()));
  for (int port = 0; port < spec.degree(); ++port) {
    out.push_back({port, flip_flop_target(spec, {port, x}).vertex});
  }
  return out;
}

/// Adjacency dump: header `source,port,target`, one row per (vertex, port).
inline void write_edges_csv(std::ostream& os, const NetworkSpec& spec) {
  os << "source,port,target\n";
  for (Vertex x = 1; x <= spec.vertex_count(); ++x) {
    for (const PortState& e : neighbors(spec, x)) {
      os << x << ',' << e.port << ',' << e.vertex << '\n';
    }
  }
}

}  // namespace hanoi_walk
