#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "memix/error.hpp"
#include "memix/futuremap.hpp"
#include "memix/io.hpp"
#include "memix/model.hpp"
#include "memix/simulator.hpp"
#include "memix/trace.hpp"
#include "memix/workload.hpp"

namespace memix::cli {

namespace {

Trace read_any_trace(const std::string& path) {
  if (path.ends_with(".csv")) return load_trace_csv(path);
  return load_trace(path);
}

void write_trace_any(const Trace& t, const std::string& path) {
  if (path.ends_with(".csv")) {
    save_trace_csv(t, path);
  } else {
    save_trace(t, path);
  }
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::shared_ptr<const RetentionModel> load_model(const std::string& path) {
  if (path.empty()) return nullptr;
  auto m = load_weights(path);
  return std::make_shared<const RetentionModel>(std::move(m.config), std::move(m.weights));
}

unsigned sweep_threads(unsigned requested) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("MEMIX_SIM_THREADS")) {
    try {
      const auto cap = std::stoul(env);
      if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      throw ConfigError("MEMIX_SIM_THREADS must be a positive integer");
    }
  }
  return n;
}

struct GenArgs {
  std::string workload;
  WorkloadParams params;
  std::uint64_t seed = 1;
  std::string out;
};

struct MissLogArgs {
  std::string trace;
  double capacity = 0.3;
  std::string out;
};

// Options shared by run and sweep.
struct SimArgs {
  std::string trace;
  std::string weights;
  SimConfig config;
};

struct RunArgs {
  SimArgs sim;
  std::string policy = "none";
  std::string out;
  std::string candidates_log;
};

struct SweepArgs {
  SimArgs sim;
  std::vector<double> capacities{0.3, 0.5, 0.7, 0.9};
  std::vector<std::string> policies{"none", "readahead", "memix"};
  unsigned threads = 0;
  std::string out;
};

struct BenchArgs {
  std::string weights;
  std::size_t tokens = 10000;
  std::size_t warmup = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

struct DumpArgs {
  std::string trace;
  double capacity = 0.3;
  std::uint32_t vocab = kDefaultVocab;
  std::string out;
};

void add_sim_options(CLI::App* cmd, SimArgs& a) {
  auto& c = a.config;
  cmd->add_option("--trace", a.trace, "Full-access trace (MXT1, or .csv)")->required();
  cmd->add_option("--weights", a.weights, "Model weights (MXW1); required for the memix policy");
  cmd->add_option("--t-local", c.t_local_ns, "Local access cost in ns")->capture_default_str();
  cmd->add_option("--t-far", c.t_far_ns, "Far-memory fetch cost in ns")->capture_default_str();
  cmd->add_option("--t-inf", c.t_inf_ns, "Inference cost per miss in ns (memix)")->capture_default_str();
  cmd->add_option("--max-inflight", c.max_inflight_prefetch, "Outstanding prefetch limit")->capture_default_str();
  cmd->add_option("--readahead-window", c.readahead_window, "Readahead window in pages")->capture_default_str();
  cmd->add_option("--history", c.predictor.history, "Predictor history length")->capture_default_str();
  cmd->add_option("--top-n", c.predictor.top_n, "Ordinals considered per miss")->capture_default_str();
  cmd->add_option("--min-prob", c.predictor.min_prob, "Probability floor for prefetching")->capture_default_str();
  cmd->add_option("--depth", c.predictor.depth, "Chained prediction depth")->capture_default_str();
  cmd->add_option("--futuremap-capacity", c.futuremap_capacity, "Maximum number of future maps")
      ->capture_default_str();
  cmd->add_flag("--check-invariants", c.check_invariants, "Verify simulator invariants after every access");
}

PolicyKind policy_or_throw(const std::string& name) {
  auto p = parse_policy(name);
  if (!p) throw ConfigError("unknown policy '" + name + "'");
  return *p;
}

int do_gen(const GenArgs& a, std::ostream& out) {
  auto w = parse_workload(a.workload);
  if (!w) throw ConfigError("unknown workload '" + a.workload + "'");
  const auto t = gen_synthetic(*w, a.params, a.seed);
  write_trace_any(t, a.out);
  out << "wrote " << t.events.size() << " events to " << a.out << '\n';
  return kOk;
}

int do_misslog(const MissLogArgs& a, std::ostream& out) {
  const auto t = read_any_trace(a.trace);
  if (t.kind != TraceKind::full_access) throw ConfigError("misslog needs a full-access trace");
  if (!(a.capacity > 0.0 && a.capacity <= 1.0)) throw ConfigError("capacity must lie in (0, 1]");
  const auto log = collect_miss_log(t, a.capacity);
  save_trace(log, a.out);
  out << "wrote " << log.events.size() << " misses to " << a.out << '\n';
  return kOk;
}

int do_run(RunArgs a, std::ostream& out) {
  a.sim.config.policy = policy_or_throw(a.policy);
  auto model = load_model(a.sim.weights);
  if (a.sim.config.policy == PolicyKind::memix && !model) throw ConfigError("--weights is required for memix");
  const auto trace = read_any_trace(a.sim.trace);

  std::ostringstream candidates;
  SimHooks hooks;
  if (!a.candidates_log.empty()) {
    candidates << "miss_vpn,candidate_vpn,prob\n";
    hooks.candidate_log = &candidates;
  }
  const auto report = run(trace, a.sim.config, model, hooks);
  emit(a.out, to_json(report).dump(2) + "\n", out);
  if (!a.candidates_log.empty()) write_file_atomic(a.candidates_log, candidates.str());
  return kOk;
}

int do_sweep(SweepArgs a, std::ostream& out) {
  std::vector<PolicyKind> policies;
  for (const auto& p : a.policies) policies.push_back(policy_or_throw(p));
  auto model = load_model(a.sim.weights);
  if (!model && std::find(policies.begin(), policies.end(), PolicyKind::memix) != policies.end()) {
    throw ConfigError("--weights is required when sweeping the memix policy");
  }
  for (double c : a.capacities) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("capacities must lie in (0, 1]");
  }
  const auto trace = read_any_trace(a.sim.trace);
  const auto rows = sweep(trace, a.capacities, policies, a.sim.config, model, sweep_threads(a.threads));
  emit(a.out, sweep_csv(rows), out);
  return kOk;
}

int do_bench(const BenchArgs& a, std::ostream& out) {
  std::shared_ptr<const RetentionModel> model = load_model(a.weights);
  if (!model) {
    ModelConfig cfg;
    model = std::make_shared<const RetentionModel>(cfg, ModelWeights::random(cfg, a.seed));
  }
  std::mt19937_64 rng(a.seed);
  std::vector<TokenPair> stream(a.tokens + a.warmup);
  for (auto& t : stream) {
    t.addr = static_cast<Token>(rng() % model->vocab());
    t.pc = static_cast<Token>(rng() % model->vocab());
  }
  const auto st = bench_inference(*model, stream, a.warmup);
  nlohmann::json j = {{"samples", st.samples},
                      {"mean_ns", st.mean_ns},
                      {"p50_ns", st.p50_ns},
                      {"p99_ns", st.p99_ns},
                      {"max_ns", st.max_ns},
                      {"parameters", model->config().parameter_count()}};
  emit(a.out, j.dump(2) + "\n", out);
  return kOk;
}

int do_inspect(const std::string& path, std::ostream& out) {
  const auto m = load_weights(path);
  nlohmann::json j = {{"vocab", m.config.vocab},
                      {"hidden", m.config.hidden},
                      {"layers", m.config.layers()},
                      {"ffn_mult", m.config.ffn_mult},
                      {"decay", m.config.decay},
                      {"parameter_count", m.weights.parameter_count()}};
  out << j.dump(2) << '\n';
  return kOk;
}

int do_dump(const DumpArgs& a, std::ostream& out) {
  auto trace = read_any_trace(a.trace);
  if (trace.kind == TraceKind::full_access) {
    if (!(a.capacity > 0.0 && a.capacity <= 1.0)) throw ConfigError("capacity must lie in (0, 1]");
    trace = collect_miss_log(trace, a.capacity);
  }
  FutureMapStore store(a.vocab);
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    store.observe_transition(trace.events[i - 1].vpn, trace.events[i].vpn);
  }
  emit(a.out, store.to_json().dump() + "\n", out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"memix: far-memory prefetching simulator and tools"};
  app.name(args.empty() ? "memix" : args.front());
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style config file; command-line flags take precedence");
  app.allow_config_extras(false);
  app.footer(
      "Exit codes: 0 success, 1 usage error, 2 I/O or file-format error, 3 validation error.\n"
      "MEMIX_SIM_THREADS caps the number of sweep worker threads.");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic full-access trace");
  gen_cmd->add_option("--workload", gen.workload, "seq | stride | linked | tree | graph")->required();
  gen_cmd->add_option("--pages", gen.params.footprint_pages, "Footprint in pages (node count)")->required();
  gen_cmd->add_option("--iters", gen.params.iterations, "Iterations over the workload")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Layout / walk seed")->capture_default_str();
  gen_cmd->add_option("--base", gen.params.base_vpn, "Base vpn")->capture_default_str();
  gen_cmd->add_option("--stride", gen.params.stride, "Stride in pages (stride workload)")->capture_default_str();
  gen_cmd->add_option("--max-degree", gen.params.max_out_degree, "Max out-degree (graph workload)")
      ->capture_default_str();
  gen_cmd->add_option("--walk-length", gen.params.walk_length, "Accesses per iteration for tree/graph (0 = pages)")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output trace path (.csv for text)")->required();

  MissLogArgs ml;
  auto* ml_cmd = app.add_subcommand("misslog", "Record the miss stream of a no-prefetch run for training");
  ml_cmd->add_option("--trace", ml.trace, "Full-access trace")->required();
  ml_cmd->add_option("--capacity", ml.capacity, "Local memory fraction")->required();
  ml_cmd->add_option("--out", ml.out, "Output miss log (MXT1)")->required();

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Simulate one policy at one capacity; prints a JSON report");
  add_sim_options(run_cmd, ra.sim);
  run_cmd->add_option("--policy", ra.policy, "none | readahead | stride | leap | memix | oracle")
      ->capture_default_str();
  run_cmd->add_option("--capacity", ra.sim.config.capacity_fraction, "Local memory fraction")->capture_default_str();
  run_cmd->add_option("--out", ra.out, "Report path (default stdout)");
  run_cmd->add_option("--candidates-log", ra.candidates_log, "CSV of memix prefetch candidates");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Policies x capacities; prints a CSV table");
  add_sim_options(sweep_cmd, sa.sim);
  sweep_cmd->add_option("--capacities", sa.capacities, "Capacity fractions")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--policies", sa.policies, "Policies")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--threads", sa.threads, "Worker threads (0 = hardware)")->capture_default_str();
  sweep_cmd->add_option("--out", sa.out, "CSV path (default stdout)");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Per-token inference latency");
  bench_cmd->add_option("--weights", ba.weights, "Weights (default: random default-shape model)");
  bench_cmd->add_option("--tokens", ba.tokens, "Timed tokens")->capture_default_str();
  bench_cmd->add_option("--warmup", ba.warmup, "Untimed warm-up tokens")->capture_default_str();
  bench_cmd->add_option("--seed", ba.seed, "Token stream seed")->capture_default_str();
  bench_cmd->add_option("--out", ba.out, "JSON path (default stdout)");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect-weights", "Print the shape of a weights file");
  inspect_cmd->add_option("--weights", inspect_path, "Weights file")->required();

  DumpArgs da;
  auto* dump_cmd = app.add_subcommand("dump-futuremaps", "Replay a miss stream and dump its future maps as JSON");
  dump_cmd->add_option("--trace", da.trace, "Miss log, or full-access trace (misses derived at --capacity)")
      ->required();
  dump_cmd->add_option("--capacity", da.capacity, "Capacity used to derive misses")->capture_default_str();
  dump_cmd->add_option("--vocab", da.vocab, "Vocabulary size K")->capture_default_str();
  dump_cmd->add_option("--out", da.out, "JSON path (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("memix");

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return do_gen(gen, out);
    if (*ml_cmd) return do_misslog(ml, out);
    if (*run_cmd) return do_run(ra, out);
    if (*sweep_cmd) return do_sweep(sa, out);
    if (*bench_cmd) return do_bench(ba, out);
    if (*inspect_cmd) return do_inspect(inspect_path, out);
    if (*dump_cmd) return do_dump(da, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kUsage;
}

}  // namespace memix::cli
