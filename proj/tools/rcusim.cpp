#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "rcusim/errors.hpp"
#include "rcusim/harness.hpp"
#include "rcusim/trace.hpp"

namespace {

using namespace rcusim;

struct RunArgs {
  std::string scenario = "prove";
  unsigned readers = 1;
  std::string mode = "exhaustive";
  std::string memory_model = "sc";
  std::string tick_model = "nondeterministic";
  std::string placement = "separate";
  std::string prune = "on";
  std::string ladder = "on";
  std::uint64_t seed = 1;
  std::size_t max_steps = 400;
  std::uint64_t max_schedules = 20'000'000;
  std::uint64_t runs = 0;  // 0: mode default
  std::uint32_t timeout_ms = 2000;
  unsigned ticks = 2;
  unsigned ctx_switches = 1;
  int threads = 1;
  std::string trace_path;
  std::string counterexample_path;
  std::string format = "table";
};

void print(const RunReport& r, const std::string& format) {
  if (format == "jsonl") {
    std::cout << format_jsonl(r) << '\n';
    return;
  }
  std::cout << format_table({r});
  if (r.counterexample) std::cout << "counterexample: " << *r.counterexample << '\n';
  if (!r.violation.empty()) std::cout << "stopped on: " << r.violation << '\n';
  if (!r.caveat.empty()) std::cout << "caveat: " << r.caveat << '\n';
  std::cout << "wall time: " << r.wall_seconds << " s\n";
}

int cmd_run(const RunArgs& a) {
  Scenario s = make_scenario(a.scenario, a.readers);
  s.mode = parse_mode(a.mode);
  s.memory_model = parse_memory_model(a.memory_model);
  s.tick_model = parse_tick_model(a.tick_model);
  s.placement = parse_placement(a.placement);
  s.prune = a.prune == "on";
  s.budget_ladder = a.ladder == "on";
  s.seed = a.seed;
  s.max_steps = a.max_steps;
  s.max_schedules = a.max_schedules;
  s.runs = a.runs ? a.runs : (s.mode == Mode::kNative ? 200 : 1000);
  s.timeout_ms = a.timeout_ms;
  s.ticks_per_cpu = a.ticks;
  s.ctx_switches_per_cpu = a.ctx_switches;
  s.threads = a.threads;

  std::ofstream trace_file;
  std::unique_ptr<TraceSink> sink;
  if (!a.trace_path.empty()) {
    trace_file.open(a.trace_path);
    if (!trace_file) throw ConfigError("cannot open trace file " + a.trace_path);
    sink = std::make_unique<TraceSink>(&trace_file);
  }
  const RunReport r = run_scenario(s, sink.get());
  if (r.counterexample && !a.counterexample_path.empty()) {
    std::ofstream out(a.counterexample_path);
    write_schedule(out, s, decode_path(*r.counterexample));
  }
  print(r, a.format);
  return exit_code(r);
}

int cmd_replay(const std::string& schedule, const std::string& trace_path, const std::string& format) {
  std::ifstream in(schedule);
  if (!in) throw ConfigError("cannot open schedule " + schedule);
  const ScheduleFile f = read_schedule(in);
  std::ofstream trace_file;
  TraceSink sink(nullptr);
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    sink = TraceSink(&trace_file);
  }
  const RunReport r = replay(f, &sink);
  print(r, format);
  return exit_code(r);
}

int cmd_audit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace " + path);
  const AuditResult a = audit_trace(in);
  std::cout << "records: " << a.records << ", node-lock acquisitions: " << a.lock_acquires << '\n';
  for (const auto& p : a.problems) std::cout << "problem: " << p << '\n';
  std::cout << (a.ok() ? "audit passed" : "audit FAILED") << '\n';
  return a.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree RCU model: exhaustive, random and native exploration of the litmus scenarios"};
  app.require_subcommand(1);

  RunArgs a;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("--scenario", a.scenario, "prove, prove-gp, bug1 .. bug7")
      ->check(CLI::IsMember({"prove", "prove-gp", "bug1", "bug2", "bug3", "bug4", "bug5", "bug6", "bug7"}));
  run->add_option("--readers", a.readers)->check(CLI::Range(1, 2));
  run->add_option("--mode", a.mode)->check(CLI::IsMember({"exhaustive", "random", "native"}));
  run->add_option("--memory-model", a.memory_model)->check(CLI::IsMember({"sc", "tso", "pso"}));
  run->add_option("--tick-model", a.tick_model, "nondeterministic or fixed")
      ->check(CLI::IsMember({"nondeterministic", "fixed"}));
  run->add_option("--reader-placement", a.placement)->check(CLI::IsMember({"separate", "shared"}));
  run->add_option("--prune", a.prune, "visited-state pruning")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--ladder", a.ladder, "raise event budgets gradually in exhaustive mode")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--seed", a.seed);
  run->add_option("--max-steps", a.max_steps);
  run->add_option("--max-schedules", a.max_schedules);
  run->add_option("--runs", a.runs, "random schedules or native runs");
  run->add_option("--timeout-ms", a.timeout_ms, "native per-run timeout");
  run->add_option("--ticks", a.ticks, "injected ticks per CPU");
  run->add_option("--ctx-switches", a.ctx_switches, "injected context switches per CPU");
  run->add_option("--threads", a.threads, "OpenMP threads for exhaustive search")->check(CLI::PositiveNumber);
  run->add_option("--trace", a.trace_path, "write a JSONL trace");
  run->add_option("--counterexample", a.counterexample_path, "write the counterexample schedule");
  run->add_option("--format", a.format)->check(CLI::IsMember({"table", "jsonl"}));

  std::string schedule, replay_trace, replay_format = "table";
  auto* rep = app.add_subcommand("replay", "replay a stored schedule");
  rep->add_option("--schedule", schedule)->required();
  rep->add_option("--trace", replay_trace);
  rep->add_option("--format", replay_format)->check(CLI::IsMember({"table", "jsonl"}));

  std::string audit_path;
  auto* aud = app.add_subcommand("audit", "check lock order and counters in a trace");
  aud->add_option("--trace", audit_path)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(a);
    if (*rep) return cmd_replay(schedule, replay_trace, replay_format);
    return cmd_audit(audit_path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
