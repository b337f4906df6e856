#pragma once

/**
 * @file engine.hpp
 * @brief Coined quantum-walk evolution on Hanoi networks.
 *
 * The walker lives in (coin port) x (vertex) space. One step applies the
 * oracle-marked Grover coin (C at every vertex, -C at the target) and the
 * flip-flop shift, in the order chosen by Order. In lackadaisical mode every
 * vertex carries an extra loop port of weight l that the shift leaves alone.
 *
 * Amplitudes are stored port-major: all N vertices of port 0, then port 1,
 * and so on. Index of (port, x) is port * N + (x - 1).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hanoi_walk/topology.hpp"

namespace hanoi_walk {

using Amplitude = std::complex<double>;

enum class CoinMode { Regular, Lackadaisical };

enum class Order {
  ShiftAfterCoin,  // U = S C
  CoinAfterShift,  // U = C S
};

inline std::string_view to_string(CoinMode mode) {
  return mode == CoinMode::Regular ? "regular" : "lackadaisical";
}

inline std::string_view to_string(Order order) {
  return order == Order::ShiftAfterCoin ? "shift-after-coin" : "coin-after-shift";
}

inline CoinMode parse_coin_mode(std::string_view text) {
  if (text == "regular") return CoinMode::Regular;
  if (text == "lackadaisical" || text == "lazy") return CoinMode::Lackadaisical;
  throw std::invalid_argument("unknown coin mode '" + std::string(text) + "'");
}

inline Order parse_order(std::string_view text) {
  if (text == "sc" || text == "shift-after-coin") return Order::ShiftAfterCoin;
  if (text == "cs" || text == "coin-after-shift") return Order::CoinAfterShift;
  throw std::invalid_argument("unknown operator order '" + std::string(text) + "'");
}

struct CoinSpec {
  CoinMode mode = CoinMode::Regular;
  double loop_weight = 0.0;

  static CoinSpec regular() { return {CoinMode::Regular, 0.0}; }
  static CoinSpec lackadaisical(double l) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw std::domain_error("loop weight must be finite and non-negative, got " + std::to_string(l));
    }
    return {CoinMode::Lackadaisical, l};
  }

  bool has_loop() const { return mode == CoinMode::Lackadaisical; }
  int dimension(int degree) const { return has_loop() ? degree + 1 : degree; }
};

/// U = S C for regular walks, U = C S for lackadaisical walks.
inline Order default_order(CoinMode mode) {
  return mode == CoinMode::Regular ? Order::ShiftAfterCoin : Order::CoinAfterShift;
}

struct EvolutionConfig {
  NetworkSpec network;
  CoinSpec coin;
  Vertex target;
  Order order;

  EvolutionConfig(NetworkSpec net, CoinSpec c, Vertex t)
      : EvolutionConfig(net, c, t, default_order(c.mode)) {}

  EvolutionConfig(NetworkSpec net, CoinSpec c, Vertex t, Order o)
      : network(net), coin(c), target(t), order(o) {
    if (!network.contains(target)) {
      throw std::domain_error("target " + std::to_string(target) + " outside 1.." +
                              std::to_string(network.vertex_count()));
    }
  }

  int coin_dimension() const { return coin.dimension(network.degree()); }
};

class StateVector {
 public:
  StateVector(int ports, std::size_t vertices)
      : ports_(ports), vertices_(vertices), amps_(static_cast<std::size_t>(ports) * vertices) {}

  int ports() const { return ports_; }
  std::size_t vertices() const { return vertices_; }
  std::size_t size() const { return amps_.size(); }

  Amplitude& at(int port, Vertex x) { return amps_[index(port, x)]; }
  const Amplitude& at(int port, Vertex x) const { return amps_[index(port, x)]; }

  std::span<Amplitude> amplitudes() { return amps_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }

  double squared_norm() const {
    double sum = 0.0;
    for (const Amplitude& a : amps_) sum += std::norm(a);
    return sum;
  }

  bool matches(const EvolutionConfig& config) const {
    return ports_ == config.coin_dimension() &&
           vertices_ == static_cast<std::size_t>(config.network.vertex_count());
  }

  void swap(StateVector& other) noexcept {
    std::swap(ports_, other.ports_);
    std::swap(vertices_, other.vertices_);
    amps_.swap(other.amps_);
  }

 private:
  std::size_t index(int port, Vertex x) const {
    if (port < 0 || port >= ports_ || x < 1 || static_cast<std::size_t>(x) > vertices_) {
      throw std::out_of_range("amplitude index (port " + std::to_string(port) + ", x=" +
                              std::to_string(x) + ") out of range");
    }
    return static_cast<std::size_t>(port) * vertices_ + static_cast<std::size_t>(x - 1);
  }

  int ports_;
  std::size_t vertices_;
  std::vector<Amplitude> amps_;
};

/// Reference coin state |psi_c> (uniform, or sqrt(l)-weighted loop entry), real and normalized.
inline std::vector<double> coin_reference_state(const CoinSpec& coin, int degree) {
  const int dim = coin.dimension(degree);
  const double denom = coin.has_loop() ? degree + coin.loop_weight : degree;
  std::vector<double> psi(static_cast<std::size_t>(dim), 1.0 / std::sqrt(denom));
  if (coin.has_loop()) psi.back() = std::sqrt(coin.loop_weight / denom);
  return psi;
}

/// Dense Grover coin 2|psi_c><psi_c| - I, row-major dim x dim.
inline std::vector<double> grover_coin(const CoinSpec& coin, int degree) {
  const std::vector<double> psi = coin_reference_state(coin, degree);
  const std::size_t dim = psi.size();
  std::vector<double> m(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      m[r * dim + c] = 2.0 * psi[r] * psi[c] - (r == c ? 1.0 : 0.0);
    }
  }
  return m;
}

inline StateVector uniform_initial_state(const EvolutionConfig& config) {
  const std::vector<double> psi = coin_reference_state(config.coin, config.network.degree());
  const auto count = static_cast<std::size_t>(config.network.vertex_count());
  const double vertex_amp = 1.0 / std::sqrt(static_cast<double>(count));
  StateVector state(config.coin_dimension(), count);
  auto amps = state.amplitudes();
  for (std::size_t port = 0; port < psi.size(); ++port) {
    const Amplitude value{psi[port] * vertex_amp, 0.0};
    for (std::size_t v = 0; v < count; ++v) amps[port * count + v] = value;
  }
  return state;
}

/// Sum over ports of |amplitude(port, t)|^2.
inline double target_probability(const StateVector& state, Vertex t) {
  if (t < 1 || static_cast<std::size_t>(t) > state.vertices()) {
    throw std::domain_error("vertex " + std::to_string(t) + " outside state range");
  }
  double p = 0.0;
  for (int port = 0; port < state.ports(); ++port) p += std::norm(state.at(port, t));
  return p;
}

/**
 * Precomputed evolution operator for one configuration.
 *
 * Holds the shift as a gather table over the non-loop planes and the coin
 * reference state, so a step is one vertex-local reflection pass plus one
 * gather. Construction is O(dN); stepping allocates nothing after the first
 * call. The gather buffer is owned by the Walk, so give each thread its own.
 */
class Walk {
 public:
  explicit Walk(EvolutionConfig config)
      : config_(std::move(config)),
        reference_(coin_reference_state(config_.coin, config_.network.degree())) {
    const NetworkSpec& net = config_.network;
    const auto count = static_cast<std::size_t>(net.vertex_count());
    const int d = net.degree();
    source_.resize(static_cast<std::size_t>(d) * count);
    // The flip-flop shift is an involution, so the image of a basis state is
    // also the source feeding it.
    for (int port = 0; port < d; ++port) {
      for (std::size_t v = 0; v < count; ++v) {
        const PortState img = flip_flop_target(net, {port, static_cast<Vertex>(v + 1)});
        source_[static_cast<std::size_t>(port) * count + v] =
            static_cast<std::size_t>(img.port) * count + static_cast<std::size_t>(img.vertex - 1);
      }
    }
  }

  const EvolutionConfig& config() const { return config_; }

  StateVector initial_state() const { return uniform_initial_state(config_); }

  /// C at every vertex, -C at the target.
  void apply_oracle_coin(StateVector& state) const {
    require_match(state);
    const std::size_t count = state.vertices();
    const std::size_t dim = reference_.size();
    const std::size_t target = static_cast<std::size_t>(config_.target - 1);
    auto amps = state.amplitudes();
    Amplitude* data = amps.data();

    if (!config_.coin.has_loop()) {
      // Uniform reference: C v = (2/d) sum(v) - v.
      const double scale = 2.0 / static_cast<double>(dim);
      for (std::size_t v = 0; v < count; ++v) {
        Amplitude sum{0.0, 0.0};
        for (std::size_t p = 0; p < dim; ++p) sum += data[p * count + v];
        const Amplitude mean = scale * sum;
        for (std::size_t p = 0; p < dim; ++p) data[p * count + v] = mean - data[p * count + v];
      }
    } else {
      const double* w = reference_.data();
      for (std::size_t v = 0; v < count; ++v) {
        Amplitude overlap{0.0, 0.0};
        for (std::size_t p = 0; p < dim; ++p) overlap += w[p] * data[p * count + v];
        overlap *= 2.0;
        for (std::size_t p = 0; p < dim; ++p) {
          data[p * count + v] = w[p] * overlap - data[p * count + v];
        }
      }
    }
    for (std::size_t p = 0; p < dim; ++p) data[p * count + target] = -data[p * count + target];
  }

  /// Flip-flop permutation on edge ports; the loop plane stays in place.
  void apply_shift(StateVector& state) const {
    require_match(state);
    const std::size_t moved = source_.size();
    scratch_.resize(moved);
    auto amps = state.amplitudes();
    for (std::size_t k = 0; k < moved; ++k) scratch_[k] = amps[source_[k]];
    std::copy(scratch_.begin(), scratch_.end(), amps.begin());
  }

  void step(StateVector& state) const {
    if (config_.order == Order::ShiftAfterCoin) {
      apply_oracle_coin(state);
      apply_shift(state);
    } else {
      apply_shift(state);
      apply_oracle_coin(state);
    }
  }

 private:
  void require_match(const StateVector& state) const {
    if (!state.matches(config_)) {
      throw std::invalid_argument("state dimensions (" + std::to_string(state.ports()) + " ports, " +
                                  std::to_string(state.vertices()) +
                                  " vertices) do not match the evolution config");
    }
  }

  EvolutionConfig config_;
  std::vector<double> reference_;
  std::vector<std::size_t> source_;
  mutable std::vector<Amplitude> scratch_;
};

// Value-returning forms for one-off use; loops should hold a Walk.

inline StateVector apply_oracle_coin(StateVector state, const EvolutionConfig& config) {
  Walk(config).apply_oracle_coin(state);
  return state;
}

inline StateVector apply_shift(StateVector state, const EvolutionConfig& config) {
  Walk(config).apply_shift(state);
  return state;
}

inline StateVector step(StateVector state, const EvolutionConfig& config) {
  Walk(config).step(state);
  return state;
}

}  // namespace hanoi_walk
