#pragma once

/**
 * @file experiments.hpp
 * @brief Search runs: probability traces, first peaks, amplification
 * accounting, loop-weight sweeps and size-scaling series.
 *
 * "Running time" is always a step count. All routines are deterministic;
 * the optional random-target rule draws from an explicitly seeded engine.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hanoi_walk/engine.hpp"
#include "hanoi_walk/topology.hpp"

namespace hanoi_walk {

/// Raised when a search targets 2^(n-1) or 2^n without an explicit override.
class UnfindableTargetError : public std::domain_error {
 public:
  UnfindableTargetError(Vertex target, const NetworkSpec& spec)
      : std::domain_error("target " + std::to_string(target) + " is unfindable on " +
                          std::string(to_string(spec.kind())) + " n=" + std::to_string(spec.n()) +
                          ": its long-range ports are self-loops, so no probability flows in "
                          "(pass the override to run it anyway)") {}
};

/// Raised when the trace ends before a first peak is confirmed.
class TraceTooShortError : public std::runtime_error {
 public:
  TraceTooShortError(std::size_t last_rising, std::size_t length)
      : std::runtime_error("trace too short: still rising at index " + std::to_string(last_rising) +
                           " of " + std::to_string(length) + " samples"),
        last_rising_(last_rising) {}

  std::size_t last_rising_index() const { return last_rising_; }

 private:
  std::size_t last_rising_;
};

using ProbabilityTrace = std::vector<double>;

struct PeakResult {
  std::size_t t_peak = 0;
  double p_peak = 0.0;
};

/**
 * First-peak detection rule.
 *
 * Index t is the first peak when trace[t] is at least every earlier value
 * and at least every value in (t, t + L], with
 * L = max(min_window, ceil(relative_lookahead * t)).
 *
 * Coined-walk traces jitter from step to step on top of a slow envelope, so
 * a lookahead that scales with t is needed to reach the envelope maximum.
 * relative_lookahead = 0 gives the plain fixed-window rule.
 */
struct PeakOptions {
  std::size_t min_window = 10;
  double relative_lookahead = 1.0;

  std::size_t lookahead(std::size_t t) const {
    const auto scaled = static_cast<std::size_t>(std::ceil(relative_lookahead * static_cast<double>(t)));
    return std::max(min_window, scaled);
  }
};

inline void validate(const PeakOptions& options) {
  if (options.min_window < 1) throw std::invalid_argument("peak window must be >= 1");
  if (!(options.relative_lookahead >= 0.0) || !std::isfinite(options.relative_lookahead)) {
    throw std::invalid_argument("relative lookahead must be finite and >= 0");
  }
}

inline PeakResult find_first_peak(const ProbabilityTrace& trace, const PeakOptions& options) {
  validate(options);
  if (trace.size() <= options.min_window) {
    throw std::invalid_argument("trace length " + std::to_string(trace.size()) +
                                " must exceed the peak window " + std::to_string(options.min_window));
  }
  double running_max = -std::numeric_limits<double>::infinity();
  std::size_t last_rising = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t] < running_max) continue;
    running_max = trace[t];
    last_rising = t;
    const std::size_t horizon = t + options.lookahead(t);
    if (horizon >= trace.size()) break;
    bool dominates = true;
    for (std::size_t k = t + 1; k <= horizon; ++k) {
      if (trace[k] > trace[t]) {
        dominates = false;
        break;
      }
    }
    if (dominates) return {t, trace[t]};
  }
  throw TraceTooShortError(last_rising, trace.size());
}

inline PeakResult find_first_peak(const ProbabilityTrace& trace, std::size_t window) {
  return find_first_peak(trace, PeakOptions{window, 1.0});
}

/// 50 * ceil(N^0.7) + 1000.
inline std::size_t default_max_steps(const NetworkSpec& spec) {
  const double n_pow = std::pow(static_cast<double>(spec.vertex_count()), 0.7);
  return 50 * static_cast<std::size_t>(std::ceil(n_pow)) + 1000;
}

struct TraceOptions {
  std::size_t max_steps = 0;  // 0 selects default_max_steps
  bool allow_unfindable = false;
};

namespace detail {

inline std::size_t resolve_max_steps(const EvolutionConfig& config, std::size_t max_steps) {
  return max_steps == 0 ? default_max_steps(config.network) : max_steps;
}

inline void guard_target(const EvolutionConfig& config, bool allow_unfindable) {
  if (!allow_unfindable && is_unfindable_target(config.network, config.target)) {
    throw UnfindableTargetError(config.target, config.network);
  }
}

}  // namespace detail

/// p(t) for t = 0..max_steps, starting from the uniform state.
inline ProbabilityTrace run_trace(const EvolutionConfig& config, const TraceOptions& options = {}) {
  detail::guard_target(config, options.allow_unfindable);
  const std::size_t steps = detail::resolve_max_steps(config, options.max_steps);
  const Walk walk(config);
  StateVector state = walk.initial_state();
  ProbabilityTrace trace;
  trace.reserve(steps + 1);
  trace.push_back(target_probability(state, config.target));
  for (std::size_t t = 0; t < steps; ++t) {
    walk.step(state);
    trace.push_back(target_probability(state, config.target));
  }
  return trace;
}

/**
 * Streams the walk and stops as soon as the first peak is confirmed.
 *
 * Gives the same result as find_first_peak(run_trace(config, {max_steps}))
 * while evolving only up to the end of the peak's lookahead.
 */
inline PeakResult search_first_peak(const EvolutionConfig& config, const TraceOptions& options = {},
                                    const PeakOptions& peak = {}) {
  validate(peak);
  detail::guard_target(config, options.allow_unfindable);
  const std::size_t steps = detail::resolve_max_steps(config, options.max_steps);
  if (steps + 1 <= peak.min_window) {
    throw std::invalid_argument("max_steps too small for the peak window");
  }
  const Walk walk(config);
  StateVector state = walk.initial_state();
  ProbabilityTrace trace{target_probability(state, config.target)};

  std::size_t candidate = 0;
  while (true) {
    const std::size_t horizon = candidate + peak.lookahead(candidate);
    if (horizon > steps) throw TraceTooShortError(candidate, steps + 1);
    bool overtaken = false;
    while (trace.size() <= horizon) {
      walk.step(state);
      trace.push_back(target_probability(state, config.target));
      // Ties never dethrone the candidate: any tie fails its own window
      // whenever the candidate does.
      if (trace.back() > trace[candidate]) {
        overtaken = true;
        break;
      }
    }
    if (!overtaken) return {candidate, trace[candidate]};
    candidate = trace.size() - 1;
  }
}

struct AmplifiedResult {
  std::uint64_t rounds = 1;
  std::uint64_t total_steps = 0;
  double raw_scaling = 0.0;
};

/// Grover round count ceil(pi / (4 asin(sqrt(p)))) applied to the first peak.
inline AmplifiedResult amplified_time(const PeakResult& peak) {
  if (!(peak.p_peak > 0.0) || peak.p_peak > 1.0 + 1e-12) {
    throw std::domain_error("amplification needs 0 < p_peak <= 1, got " + std::to_string(peak.p_peak));
  }
  const double p = std::min(peak.p_peak, 1.0);
  const double rounds_real = std::numbers::pi / (4.0 * std::asin(std::sqrt(p)));
  // Absorb rounding noise at exact integers (p = 1, p = 1/2).
  const auto rounds = static_cast<std::uint64_t>(std::max(1.0, std::ceil(rounds_real - 1e-12)));
  return {rounds, rounds * peak.t_peak, static_cast<double>(peak.t_peak) / std::sqrt(p)};
}

struct SweepPoint {
  double Nl = 0.0;
  double l = 0.0;
  std::size_t t_peak = 0;
  double p_peak = 0.0;
};

/**
 * Runs the worker over indices [0, count) on up to `jobs` threads and
 * returns once all are done. Each index is handled exactly once; results
 * must be stored by index so the caller sees input order.
 */
inline void for_each_cell(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& work) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto runner = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(runner);
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline unsigned default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

struct SweepOptions {
  TraceOptions trace;
  PeakOptions peak;
  unsigned jobs = 1;
};

inline SweepPoint sweep_point(const NetworkSpec& network, Vertex target, double Nl, const SweepOptions& options) {
  if (!(Nl > 0.0) || !std::isfinite(Nl)) {
    throw std::domain_error("sweep values Nl must be positive, got " + std::to_string(Nl));
  }
  const double l = Nl / static_cast<double>(network.vertex_count());
  const EvolutionConfig config(network, CoinSpec::lackadaisical(l), target);
  const PeakResult peak = search_first_peak(config, options.trace, options.peak);
  return {Nl, l, peak.t_peak, peak.p_peak};
}

/// One lackadaisical first-peak run per grid value, with l = Nl / N.
inline std::vector<SweepPoint> sweep_loop_weight(const NetworkSpec& network, Vertex target,
                                                 const std::vector<double>& grid,
                                                 const SweepOptions& options = {}) {
  for (double Nl : grid) {
    if (!(Nl > 0.0) || !std::isfinite(Nl)) {
      throw std::domain_error("sweep values Nl must be positive, got " + std::to_string(Nl));
    }
  }
  detail::guard_target(EvolutionConfig(network, CoinSpec::lackadaisical(0.0), target),
                       options.trace.allow_unfindable);
  std::vector<SweepPoint> points(grid.size());
  for_each_cell(grid.size(), options.jobs,
                [&](std::size_t i) { points[i] = sweep_point(network, target, grid[i], options); });
  return points;
}

/// Nl of the point with largest p_peak; ties go to the smaller Nl.
inline double optimal_loop_weight(const std::vector<SweepPoint>& points) {
  if (points.empty()) throw std::invalid_argument("optimal_loop_weight: no sweep points");
  const SweepPoint* best = &points.front();
  for (const SweepPoint& p : points) {
    if (p.p_peak > best->p_peak || (p.p_peak == best->p_peak && p.Nl < best->Nl)) best = &p;
  }
  return best->Nl;
}

/// Inclusive arithmetic grid; the end point is kept when it lands within rounding of the last step.
inline std::vector<double> linear_grid(double first, double last, double step) {
  if (!(step > 0.0) || !std::isfinite(first) || !std::isfinite(last) || last < first) {
    throw std::invalid_argument("malformed grid range");
  }
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(first + static_cast<double>(k) * step);
  return grid;
}

/// Nl from 0.5 to 6.0 in steps of 0.05.
inline std::vector<double> default_sweep_grid() { return linear_grid(0.5, 6.0, 0.05); }

/**
 * Golden-section search for max p_peak on [lo, hi], stopping when the
 * bracket is narrower than `resolution`. Every evaluated point is returned
 * so callers can merge it into the sweep table.
 */
inline std::vector<SweepPoint> refine_loop_weight(const NetworkSpec& network, Vertex target, double lo, double hi,
                                                  double resolution, const SweepOptions& options = {}) {
  if (!(lo > 0.0) || !(hi > lo) || !(resolution > 0.0)) {
    throw std::invalid_argument("refine_loop_weight: need 0 < lo < hi and resolution > 0");
  }
  constexpr double kInvPhi = 0.6180339887498949;
  std::vector<SweepPoint> evaluated;
  auto eval = [&](double Nl) {
    evaluated.push_back(sweep_point(network, target, Nl, options));
    return evaluated.back().p_peak;
  };
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > resolution) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  return evaluated;
}

/// Coarse grid plus one golden-section pass around the coarse argmax, sorted by Nl.
inline std::vector<SweepPoint> sweep_and_refine(const NetworkSpec& network, Vertex target,
                                                const std::vector<double>& grid, double resolution,
                                                const SweepOptions& options = {}) {
  std::vector<SweepPoint> points = sweep_loop_weight(network, target, grid, options);
  if (grid.size() >= 2 && resolution > 0.0) {
    const double best = optimal_loop_weight(points);
    const auto it = std::find(grid.begin(), grid.end(), best);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin());
    const double lo = grid[k == 0 ? 0 : k - 1];
    const double hi = grid[std::min(k + 1, grid.size() - 1)];
    if (hi > lo) {
      std::vector<SweepPoint> extra = refine_loop_weight(network, target, lo, hi, resolution, options);
      points.insert(points.end(), extra.begin(), extra.end());
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const SweepPoint& x, const SweepPoint& y) { return x.Nl < y.Nl; });
  return points;
}

inline constexpr double kDefaultOptimalNlHN3 = 2.52;
inline constexpr double kDefaultOptimalNlHN4 = 3.48;

inline double default_optimal_Nl(NetworkKind kind) {
  return kind == NetworkKind::HN3 ? kDefaultOptimalNlHN3 : kDefaultOptimalNlHN4;
}

struct TargetRule {
  enum class Kind { Fixed, RandomFindable } kind = Kind::Fixed;
  Vertex vertex = 4;
  std::uint64_t seed = 0;

  static TargetRule fixed(Vertex v) { return {Kind::Fixed, v, 0}; }
  static TargetRule random_findable(std::uint64_t seed) { return {Kind::RandomFindable, 0, seed}; }

  /// Random targets are drawn per n from mt19937_64(seed + n), skipping the two unfindable vertices.
  Vertex pick(const NetworkSpec& spec) const {
    if (kind == Kind::Fixed) return vertex;
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(spec.n()));
    std::uniform_int_distribution<Vertex> dist(1, spec.vertex_count() - 2);
    Vertex x = dist(rng);
    // Map 1..N-2 onto the findable vertices by skipping N/2.
    if (x >= spec.vertex_count() / 2) ++x;
    return x;
  }
};

struct ScalingOptions {
  CoinMode mode = CoinMode::Regular;
  std::optional<double> optimal_Nl;  // lackadaisical only; defaults per kind
  std::optional<Order> order;
  TargetRule target = TargetRule::fixed(4);
  TraceOptions trace;
  PeakOptions peak;
  unsigned jobs = 1;
};

struct ScalingRow {
  NetworkKind kind = NetworkKind::HN3;
  CoinMode mode = CoinMode::Regular;
  int n = 0;
  Vertex N = 0;
  Vertex target = 0;
  double l = 0.0;
  std::size_t t_peak = 0;
  double p_peak = 0.0;
  std::uint64_t rounds = 0;
  std::uint64_t total_steps = 0;
  double raw_scaling = 0.0;
  std::optional<std::string> error;  // set when this cell failed

  bool ok() const { return !error.has_value(); }
};

inline ScalingRow scaling_cell(NetworkKind kind, int n, const ScalingOptions& options) {
  ScalingRow row;
  row.kind = kind;
  row.mode = options.mode;
  row.n = n;
  try {
    const NetworkSpec net(kind, n);
    row.N = net.vertex_count();
    row.target = options.target.pick(net);
    CoinSpec coin = CoinSpec::regular();
    if (options.mode == CoinMode::Lackadaisical) {
      const double Nl = options.optimal_Nl.value_or(default_optimal_Nl(kind));
      row.l = Nl / static_cast<double>(row.N);
      coin = CoinSpec::lackadaisical(row.l);
    }
    const EvolutionConfig config(net, coin, row.target, options.order.value_or(default_order(options.mode)));
    const PeakResult peak = search_first_peak(config, options.trace, options.peak);
    const AmplifiedResult amp = amplified_time(peak);
    row.t_peak = peak.t_peak;
    row.p_peak = peak.p_peak;
    row.rounds = amp.rounds;
    row.total_steps = amp.total_steps;
    row.raw_scaling = amp.raw_scaling;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// One independent row per n in [n_min, n_max]; a failed cell carries its error instead of aborting the series.
inline std::vector<ScalingRow> scaling_series(NetworkKind kind, int n_min, int n_max, const ScalingOptions& options = {}) {
  if (n_min < kMinSizeExponent || n_max > 20 || n_min > n_max) {
    throw std::invalid_argument("scaling range must satisfy 2 <= n_min <= n_max <= 20");
  }
  validate(options.peak);
  const auto count = static_cast<std::size_t>(n_max - n_min + 1);
  std::vector<ScalingRow> rows(count);
  for_each_cell(count, options.jobs, [&](std::size_t i) {
    rows[i] = scaling_cell(kind, n_min + static_cast<int>(i), options);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output. Floating-point values use 17 significant digits.

inline std::string format_real(double value) {
  std::ostringstream os;
  os << std::setprecision(17) << value;
  return os.str();
}

inline void write_trace_csv(std::ostream& os, const ProbabilityTrace& trace) {
  os << "t,probability\n";
  for (std::size_t t = 0; t < trace.size(); ++t) os << t << ',' << format_real(trace[t]) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << "Nl,l,t_peak,p_peak\n";
  for (const SweepPoint& p : points) {
    os << format_real(p.Nl) << ',' << format_real(p.l) << ',' << p.t_peak << ',' << format_real(p.p_peak) << '\n';
  }
}

inline constexpr const char* kScalingCsvHeader = "kind,mode,n,N,l,t_peak,p_peak,rounds,total_steps,raw_scaling";

inline void write_scaling_row(std::ostream& os, const ScalingRow& r) {
  os << to_string(r.kind) << ',' << to_string(r.mode) << ',' << r.n << ',' << r.N << ',' << format_real(r.l) << ','
     << r.t_peak << ',' << format_real(r.p_peak) << ',' << r.rounds << ',' << r.total_steps << ','
     << format_real(r.raw_scaling) << '\n';
}

/// Failed rows are skipped; the caller reports them.
inline void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  os << kScalingCsvHeader << '\n';
  for (const ScalingRow& r : rows) {
    if (r.ok()) write_scaling_row(os, r);
  }
}

}  // namespace hanoi_walk
