// Command-line front end: trace, sweep, scaling, fit and edges pipelines.
//
// Exit status: 0 success, 2 usage, 3 unfindable target refused, 4 I/O failure,
// 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hanoi_walk/hanoi_walk.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hanoi_walk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRefused = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir() {
  if (const char* dir = std::getenv("HANOI_WALK_OUT_DIR"); dir != nullptr && *dir != '\0') return dir;
  return fs::current_path();
}

fs::path resolve_output(const std::string& requested, const std::string& fallback_name) {
  if (!requested.empty()) return requested;
  return output_dir() / fallback_name;
}

/// foo.csv -> foo<suffix>
fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

fs::path manifest_path(const fs::path& path) {
  fs::path out = path;
  out += ".manifest.json";
  return out;
}

// Writes to a temp file then renames, so a failed run never leaves a torn file.
void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_manifest(const fs::path& data_path, const std::string& command, const json& parameters) {
  RunManifest m;
  m.command = command;
  m.parameters = parameters;
  m.timestamp = RunManifest::now_utc();
  write_file(manifest_path(data_path), dump(m.to_json()));
}

// ---------------------------------------------------------------------------
// Shared walk flags.

struct WalkFlags {
  std::string kind;
  int n = 0;
  std::string mode = "regular";
  std::optional<double> l;
  std::optional<double> Nl;
  Vertex target = 4;
  std::string order;
  bool force = false;
  std::size_t window = 10;
  double lookahead = 1.0;
};

void add_walk_flags(CLI::App* cmd, WalkFlags& f, bool with_mode) {
  cmd->add_option("--kind", f.kind, "Network kind: hn3 or hn4")->required();
  cmd->add_option("--n", f.n, "Size exponent, N = 2^n")->required();
  if (with_mode) {
    cmd->add_option("--mode", f.mode, "regular or lackadaisical");
    cmd->add_option("--l", f.l, "Self-loop weight (lackadaisical)");
    cmd->add_option("--Nl", f.Nl, "Scaled self-loop weight, l = Nl / N (lackadaisical)");
    cmd->add_option("--order", f.order, "Operator order: sc (U = S C) or cs (U = C S)");
  }
  cmd->add_option("--target", f.target, "Target vertex");
  cmd->add_flag("--force", f.force, "Allow the unfindable targets 2^(n-1) and 2^n");
  cmd->add_option("--window", f.window, "Minimum first-peak lookahead window");
  cmd->add_option("--lookahead", f.lookahead, "First-peak lookahead as a multiple of t (0 = fixed window)");
}

NetworkSpec network_from(const WalkFlags& f) {
  try {
    return NetworkSpec(parse_network_kind(f.kind), f.n);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

PeakOptions peak_from(const WalkFlags& f) {
  PeakOptions p{f.window, f.lookahead};
  try {
    validate(p);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return p;
}

CoinSpec coin_from(const WalkFlags& f, const NetworkSpec& net) {
  CoinMode mode;
  try {
    mode = parse_coin_mode(f.mode);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (mode == CoinMode::Regular) {
    if (f.l || f.Nl) throw UsageError("--l/--Nl only apply to --mode lackadaisical");
    return CoinSpec::regular();
  }
  if (f.l && f.Nl) throw UsageError("give either --l or --Nl, not both");
  if (!f.l && !f.Nl) throw UsageError("--mode lackadaisical requires --l or --Nl");
  const double l = f.l ? *f.l : *f.Nl / static_cast<double>(net.vertex_count());
  try {
    return CoinSpec::lackadaisical(l);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

Order order_from(const WalkFlags& f, CoinMode mode) {
  if (f.order.empty()) return default_order(mode);
  try {
    return parse_order(f.order);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

void require_target(const NetworkSpec& net, Vertex target) {
  if (!net.contains(target)) {
    throw UsageError("--target " + std::to_string(target) + " outside 1.." + std::to_string(net.vertex_count()));
  }
}

// ---------------------------------------------------------------------------
// trace

struct TraceFlags {
  WalkFlags walk;
  std::size_t max_steps = 0;
  std::string out;
};

int run_trace_cmd(const TraceFlags& f) {
  const NetworkSpec net = network_from(f.walk);
  const CoinSpec coin = coin_from(f.walk, net);
  const Order order = order_from(f.walk, coin.mode);
  const PeakOptions peak_opts = peak_from(f.walk);
  require_target(net, f.walk.target);
  const EvolutionConfig config(net, coin, f.walk.target, order);
  const std::size_t max_steps = f.max_steps == 0 ? default_max_steps(net) : f.max_steps;

  const ProbabilityTrace trace = run_trace(config, {max_steps, f.walk.force});

  std::ostringstream csv;
  write_trace_csv(csv, trace);

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["kind"] = std::string(to_string(net.kind()));
  summary["mode"] = std::string(to_string(coin.mode));
  summary["n"] = net.n();
  summary["N"] = net.vertex_count();
  summary["target"] = config.target;
  summary["l"] = coin.loop_weight;
  summary["order"] = std::string(to_string(order));
  summary["max_steps"] = max_steps;
  try {
    const PeakResult peak = find_first_peak(trace, peak_opts);
    const AmplifiedResult amp = amplified_time(peak);
    summary["t_peak"] = peak.t_peak;
    summary["p_peak"] = peak.p_peak;
    summary["rounds"] = amp.rounds;
    summary["total_steps"] = amp.total_steps;
    summary["raw_scaling"] = amp.raw_scaling;
  } catch (const TraceTooShortError& e) {
    summary["t_peak"] = nullptr;
    summary["p_peak"] = nullptr;
    summary["error"] = e.what();
  }

  const fs::path out = resolve_output(
      f.out, "trace_" + std::string(to_string(net.kind())) + "_n" + std::to_string(net.n()) + "_" +
                 std::string(to_string(coin.mode)) + "_t" + std::to_string(config.target) + ".csv");
  write_file(out, csv.str());
  write_file(sibling(out, ".summary.json"), dump(summary));

  json params;
  params["kind"] = std::string(to_string(net.kind()));
  params["n"] = net.n();
  params["mode"] = std::string(to_string(coin.mode));
  params["l"] = coin.loop_weight;
  params["target"] = config.target;
  params["order"] = std::string(to_string(order));
  params["max_steps"] = max_steps;
  params["window"] = peak_opts.min_window;
  params["lookahead"] = peak_opts.relative_lookahead;
  params["force"] = f.walk.force;
  write_manifest(out, "trace", params);

  std::cout << dump(summary);
  return summary.contains("error") ? kExitUsage : kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
  WalkFlags walk;
  double Nl_min = 0.5;
  double Nl_max = 6.0;
  double step = 0.05;
  double resolution = 0.005;
  std::size_t max_steps = 0;
  unsigned jobs = default_jobs();
  std::string out;
};

int run_sweep_cmd(const SweepFlags& f) {
  const NetworkSpec net = network_from(f.walk);
  const PeakOptions peak_opts = peak_from(f.walk);
  require_target(net, f.walk.target);
  if (!(f.Nl_min > 0.0) || f.Nl_max < f.Nl_min || !(f.step > 0.0) || f.resolution < 0.0) {
    throw UsageError("sweep range needs 0 < Nl-min <= Nl-max, step > 0 and resolution >= 0");
  }
  const std::vector<double> grid = linear_grid(f.Nl_min, f.Nl_max, f.step);

  SweepOptions options;
  options.trace = {f.max_steps, f.walk.force};
  options.peak = peak_opts;
  options.jobs = std::max(1u, f.jobs);
  const std::vector<SweepPoint> points = sweep_and_refine(net, f.walk.target, grid, f.resolution, options);

  const double best = optimal_loop_weight(points);
  const auto it = std::find_if(points.begin(), points.end(), [&](const SweepPoint& p) { return p.Nl == best; });

  std::ostringstream csv;
  write_sweep_csv(csv, points);
  json optimum;
  optimum["schema_version"] = kSchemaVersion;
  optimum["kind"] = std::string(to_string(net.kind()));
  optimum["n"] = net.n();
  optimum["N"] = net.vertex_count();
  optimum["target"] = f.walk.target;
  optimum["optimal_Nl"] = best;
  optimum["optimal_l"] = it->l;
  optimum["p_peak_at_opt"] = it->p_peak;
  optimum["t_peak_at_opt"] = it->t_peak;

  const fs::path out = resolve_output(f.out, "sweep_" + std::string(to_string(net.kind())) + "_n" +
                                                 std::to_string(net.n()) + "_t" + std::to_string(f.walk.target) +
                                                 ".csv");
  write_file(out, csv.str());
  write_file(sibling(out, ".optimum.json"), dump(optimum));

  json params;
  params["kind"] = std::string(to_string(net.kind()));
  params["n"] = net.n();
  params["target"] = f.walk.target;
  params["Nl_min"] = f.Nl_min;
  params["Nl_max"] = f.Nl_max;
  params["step"] = f.step;
  params["resolution"] = f.resolution;
  params["max_steps"] = f.max_steps;
  params["window"] = peak_opts.min_window;
  params["lookahead"] = peak_opts.relative_lookahead;
  params["force"] = f.walk.force;
  write_manifest(out, "sweep", params);

  std::cout << dump(optimum);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingFlags {
  WalkFlags walk;
  int n_min = 5;
  int n_max = 13;
  std::optional<std::uint64_t> random_target_seed;
  std::size_t max_steps = 0;
  unsigned jobs = default_jobs();
  std::string out;
};

int run_scaling_cmd(const ScalingFlags& f) {
  NetworkKind kind;
  CoinMode mode;
  try {
    kind = parse_network_kind(f.walk.kind);
    mode = parse_coin_mode(f.walk.mode);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (f.n_min < kMinSizeExponent || f.n_max > 20 || f.n_min > f.n_max) {
    throw UsageError("scaling needs 2 <= n-min <= n-max <= 20");
  }
  if (mode == CoinMode::Regular && f.walk.Nl) throw UsageError("--Nl only applies to --mode lackadaisical");
  if (f.walk.l) throw UsageError("scaling takes --Nl (l = Nl / N varies with n), not --l");
  if (f.walk.Nl && !(*f.walk.Nl > 0.0)) throw UsageError("--Nl must be positive");

  ScalingOptions options;
  options.mode = mode;
  if (mode == CoinMode::Lackadaisical) options.optimal_Nl = f.walk.Nl.value_or(default_optimal_Nl(kind));
  options.order = order_from(f.walk, mode);
  options.target = f.random_target_seed ? TargetRule::random_findable(*f.random_target_seed)
                                        : TargetRule::fixed(f.walk.target);
  options.trace = {f.max_steps, f.walk.force};
  options.peak = peak_from(f.walk);
  options.jobs = std::max(1u, f.jobs);

  json params;
  params["kind"] = std::string(to_string(kind));
  params["mode"] = std::string(to_string(mode));
  params["Nl"] = options.optimal_Nl ? json(*options.optimal_Nl) : json(nullptr);
  params["order"] = std::string(to_string(*options.order));
  if (f.random_target_seed) {
    params["target_rule"] = "random-findable";
    params["seed"] = *f.random_target_seed;
  } else {
    params["target_rule"] = "fixed";
    params["target"] = f.walk.target;
  }
  params["max_steps"] = f.max_steps;
  params["window"] = options.peak.min_window;
  params["lookahead"] = options.peak.relative_lookahead;
  params["force"] = f.walk.force;

  const fs::path out = resolve_output(
      f.out, "scaling_" + std::string(to_string(kind)) + "_" + std::string(to_string(mode)) + ".csv");

  // Resume: reuse rows from an existing file whose manifest matches.
  std::map<int, ScalingRow> have;
  if (fs::exists(out) && fs::exists(manifest_path(out))) {
    try {
      const RunManifest old = RunManifest::from_json(json::parse(read_file(manifest_path(out))));
      json old_params = old.parameters;
      old_params.erase("n_min");
      old_params.erase("n_max");
      if (old.command == "scaling" && old_params == params) {
        std::istringstream is(read_file(out));
        for (ScalingRow& r : read_scaling_csv(is)) have[r.n] = r;
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      std::cerr << "ignoring unreadable previous output: " << e.what() << "\n";
      have.clear();
    }
  }

  std::vector<int> missing;
  for (int n = f.n_min; n <= f.n_max; ++n) {
    if (!have.count(n)) missing.push_back(n);
  }
  if (missing.empty()) {
    std::cerr << "scaling: all rows n=" << f.n_min << ".." << f.n_max << " already present in " << out.string()
              << "\n";
    return kExitOk;
  }

  std::vector<ScalingRow> fresh(missing.size());
  for_each_cell(missing.size(), options.jobs,
                [&](std::size_t i) { fresh[i] = scaling_cell(kind, missing[i], options); });

  bool any_failed = false;
  for (const ScalingRow& r : fresh) {
    if (r.ok()) {
      have[r.n] = r;
      std::cerr << "n=" << r.n << " t_peak=" << r.t_peak << " p_peak=" << format_real(r.p_peak) << "\n";
    } else {
      any_failed = true;
      std::cerr << "n=" << r.n << " failed: " << *r.error << "\n";
    }
  }

  std::vector<ScalingRow> rows;
  for (const auto& [n, r] : have) rows.push_back(r);
  std::ostringstream csv;
  write_scaling_csv(csv, rows);
  write_file(out, csv.str());
  params["n_min"] = rows.empty() ? f.n_min : rows.front().n;
  params["n_max"] = rows.empty() ? f.n_max : rows.back().n;
  write_manifest(out, "scaling", params);
  return any_failed ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitFlags {
  std::string model;
  std::string in;
  std::string column;
  int min_n = 0;
  std::string out;
};

int run_fit_cmd(const FitFlags& f) {
  FitModel model;
  try {
    model = parse_fit_model(f.model);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::istringstream is(read_file(f.in));
  CsvTable table;
  try {
    table = read_csv(is);
  } catch (const std::exception& e) {
    throw UsageError(std::string("malformed CSV: ") + e.what());
  }

  FitInput input;
  FitResult result;
  try {
    input = fit_points_from_table(table, f.column, f.min_n);
    result = fit(model, input.points);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  const json j = fit_to_json(result, input.min_n, input.max_n);
  const fs::path in_path(f.in);
  const fs::path out = resolve_output(
      f.out, in_path.stem().string() + "_" + f.column + "_" + std::string(to_string(model)) + ".fit.json");
  write_file(out, dump(j));

  json params;
  params["model"] = std::string(to_string(model));
  params["in"] = f.in;
  params["column"] = f.column;
  params["min_n"] = f.min_n;
  write_manifest(out, "fit", params);

  std::cout << dump(j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// edges

struct EdgesFlags {
  std::string kind;
  int n = 0;
  std::string out;
};

int run_edges_cmd(const EdgesFlags& f) {
  WalkFlags w;
  w.kind = f.kind;
  w.n = f.n;
  const NetworkSpec net = network_from(w);
  std::ostringstream csv;
  write_edges_csv(csv, net);
  const fs::path out =
      resolve_output(f.out, "edges_" + std::string(to_string(net.kind())) + "_n" + std::to_string(net.n()) + ".csv");
  write_file(out, csv.str());
  json params;
  params["kind"] = std::string(to_string(net.kind()));
  params["n"] = net.n();
  write_manifest(out, "edges", params);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coined quantum-walk search on Hanoi networks (HN3/HN4)"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TraceFlags trace;
  auto* trace_cmd = app.add_subcommand("trace", "Target probability trace and first peak for one configuration");
  add_walk_flags(trace_cmd, trace.walk, true);
  trace_cmd->add_option("--max-steps", trace.max_steps, "Steps to simulate (default 50*ceil(N^0.7)+1000)");
  trace_cmd->add_option("--out", trace.out, "Trace CSV path");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Lackadaisical first-peak probability over a grid of Nl");
  add_walk_flags(sweep_cmd, sweep.walk, false);
  sweep_cmd->add_option("--Nl-min", sweep.Nl_min, "Smallest Nl");
  sweep_cmd->add_option("--Nl-max", sweep.Nl_max, "Largest Nl");
  sweep_cmd->add_option("--step", sweep.step, "Grid spacing");
  sweep_cmd->add_option("--resolution", sweep.resolution, "Golden-section refinement resolution (0 disables)");
  sweep_cmd->add_option("--max-steps", sweep.max_steps, "Step cap per run");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads");
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV path");

  ScalingFlags scaling;
  auto* scaling_cmd = app.add_subcommand("scaling", "First-peak statistics for N = 2^n over a range of n");
  scaling_cmd->add_option("--kind", scaling.walk.kind, "Network kind: hn3 or hn4")->required();
  scaling_cmd->add_option("--mode", scaling.walk.mode, "regular or lackadaisical");
  scaling_cmd->add_option("--n-min", scaling.n_min, "Smallest size exponent");
  scaling_cmd->add_option("--n-max", scaling.n_max, "Largest size exponent");
  scaling_cmd->add_option("--Nl", scaling.walk.Nl, "Scaled loop weight (default 2.52 for hn3, 3.48 for hn4)");
  scaling_cmd->add_option("--l", scaling.walk.l, "Rejected: use --Nl");
  scaling_cmd->add_option("--order", scaling.walk.order, "Operator order: sc or cs");
  scaling_cmd->add_option("--target", scaling.walk.target, "Fixed target vertex");
  scaling_cmd->add_option("--random-target-seed", scaling.random_target_seed,
                          "Draw a findable target per n from this seed instead");
  scaling_cmd->add_flag("--force", scaling.walk.force, "Allow unfindable targets");
  scaling_cmd->add_option("--window", scaling.walk.window, "Minimum first-peak lookahead window");
  scaling_cmd->add_option("--lookahead", scaling.walk.lookahead, "First-peak lookahead as a multiple of t");
  scaling_cmd->add_option("--max-steps", scaling.max_steps, "Step cap per run");
  scaling_cmd->add_option("--jobs", scaling.jobs, "Worker threads");
  scaling_cmd->add_option("--out", scaling.out, "Scaling CSV path");

  FitFlags fitf;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit of one scaling column against N");
  fit_cmd->add_option("--model", fitf.model, "power, power-sqrt-log, power-log or inverse-power")->required();
  fit_cmd->add_option("--in", fitf.in, "Scaling CSV")->required();
  fit_cmd->add_option("--column", fitf.column, "Column to fit, e.g. t_peak")->required();
  fit_cmd->add_option("--min-n", fitf.min_n, "Drop rows with n below this");
  fit_cmd->add_option("--out", fitf.out, "Fit JSON path");

  EdgesFlags edges;
  auto* edges_cmd = app.add_subcommand("edges", "Adjacency dump as source,port,target CSV");
  edges_cmd->add_option("--kind", edges.kind, "Network kind: hn3 or hn4")->required();
  edges_cmd->add_option("--n", edges.n, "Size exponent")->required();
  edges_cmd->add_option("--out", edges.out, "Edges CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (trace_cmd->parsed()) return run_trace_cmd(trace);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep);
    if (scaling_cmd->parsed()) return run_scaling_cmd(scaling);
    if (fit_cmd->parsed()) return run_fit_cmd(fitf);
    if (edges_cmd->parsed()) return run_edges_cmd(edges);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnfindableTargetError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
