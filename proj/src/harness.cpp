#include "rcusim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <json.hpp>

#include "rcusim/errors.hpp"
#include "rcusim/native.hpp"

namespace rcusim {

std::string_view property_name(Property p) {
  return p == Property::kLitmusAssertion ? "litmus-assertion" : "gp-completes";
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kExhaustive: return "exhaustive";
    case Mode::kRandom: return "random";
    case Mode::kNative: return "native";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "exhaustive") return Mode::kExhaustive;
  if (s == "random") return Mode::kRandom;
  if (s == "native") return Mode::kNative;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

std::string_view tick_model_name(TickModel t) {
  return t == TickModel::kNondeterministic ? "nondeterministic" : "fixed";
}

TickModel parse_tick_model(std::string_view s) {
  if (s == "nondeterministic") return TickModel::kNondeterministic;
  if (s == "fixed") return TickModel::kFixed;
  throw ConfigError("unknown tick model '" + std::string(s) + "'");
}

std::string_view placement_name(ReaderPlacement p) {
  return p == ReaderPlacement::kSeparate ? "separate" : "shared";
}

ReaderPlacement parse_placement(std::string_view s) {
  if (s == "separate") return ReaderPlacement::kSeparate;
  if (s == "shared") return ReaderPlacement::kShared;
  throw ConfigError("unknown reader placement '" + std::string(s) + "'");
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSafe: return "SAFE";
    case Outcome::kAssertionViolated: return "ASSERTION_VIOLATED";
    case Outcome::kGpHung: return "GP_HUNG";
    case Outcome::kGpCompleted: return "GP_COMPLETED";
    case Outcome::kBudgetExhausted: return "BUDGET_EXHAUSTED";
    case Outcome::kBugMissed: return "BUG_MISSED";
  }
  return "?";
}

Scenario make_scenario(std::string_view name, unsigned readers) {
  if (readers != 1 && readers != 2) throw ConfigError("readers must be 1 or 2");
  Scenario s;
  s.name = std::string(name);
  s.readers = readers;
  if (name == "prove") {
    s.property = Property::kLitmusAssertion;
  } else if (name == "prove-gp") {
    s.property = Property::kGpCompletes;
  } else if (name.starts_with("bug")) {
    s.fault = FaultPlan(parse_fault_variant(name));
    s.property = s.fault.expected_class() == ExpectedClass::kSafetyViolation ? Property::kLitmusAssertion
                                                                              : Property::kGpCompletes;
  } else {
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

std::string config_text(const Scenario& s) {
  std::ostringstream o;
  o << "scenario=" << s.name << ";readers=" << s.readers
    << ";fault=" << fault_variant_name(s.fault.variant()) << ";property=" << property_name(s.property)
    << ";memory=" << memory_model_name(s.memory_model) << ";ticks=" << tick_model_name(s.tick_model)
    << ";placement=" << placement_name(s.placement)
    << ";instrumented=" << static_cast<unsigned>(s.instrumented) << ";max_steps=" << s.max_steps
    << ";tick_budget=" << s.ticks_per_cpu << ";ctxsw_budget=" << s.ctx_switches_per_cpu
    << ";hooks=" << RCUSIM_FAULT_HOOKS;
  return o.str();
}

std::string config_digest(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_text(s))));
  return buf;
}

namespace {

Program reader_program() {
  return {ins::simple(Op::kAcquireCpu),
          ins::simple(Op::kReadLock),
          ins::load(CellId::litmus(0), kRegX),
          ins::load(CellId::litmus(1), kRegY),
          ins::simple(Op::kReadUnlock),
          ins::simple(Op::kContextSwitch),
          ins::simple(Op::kReleaseCpu)};
}

Program updater_program(TickModel model) {
  if (model == TickModel::kFixed) {
    // The flag is armed only after the direct-call pass, as in the stubbed
    // model where the boot-time grace period may already be over by then.
    return {ins::simple(Op::kAcquireCpu),    ins::store(CellId::litmus(0), 1),
            ins::sync_entry(6),              ins::simple(Op::kContextSwitch),
            ins::simple(Op::kSyncArm),       ins::simple(Op::kSyncWait),
            ins::store(CellId::litmus(1), 1), ins::simple(Op::kReleaseCpu)};
  }
  return {ins::simple(Op::kAcquireCpu),    ins::store(CellId::litmus(0), 1),
          ins::sync_entry(7),              ins::simple(Op::kSyncArm),
          ins::simple(Op::kSyncEnqueue),   ins::simple(Op::kContextSwitch),
          ins::simple(Op::kSyncWait),      ins::store(CellId::litmus(1), 1),
          ins::simple(Op::kReleaseCpu)};
}

constexpr std::size_t kUpdaterCpu = 1;

}  // namespace

SimWorld build_world(const Scenario& s) {
  WorldConfig wc;
  const bool third_cpu = s.readers == 2 && s.placement == ReaderPlacement::kSeparate;
  wc.cpus = third_cpu ? 3 : 2;
  wc.memory_model = s.memory_model;
  wc.instrumented = s.instrumented;
  wc.faults = s.fault;
  if (s.tick_model == TickModel::kFixed) {
    wc.rcu = RcuConfig{.gp_init_notify = GpInitNotify::kAllCpus, .cleanup_wakes_waiter = true};
    wc.ticks_per_cpu = 0;
    wc.ctx_switches_per_cpu = 0;
  } else {
    wc.ticks_per_cpu = s.ticks_per_cpu;
    wc.ctx_switches_per_cpu = s.ctx_switches_per_cpu;
  }
  SimWorld w(wc);
  w.add_thread("reader0", 0, reader_program());
  w.add_thread("updater", kUpdaterCpu, updater_program(s.tick_model));
  if (s.readers == 2) w.add_thread("reader1", third_cpu ? 2 : 0, reader_program());
  if (s.tick_model == TickModel::kFixed) w.boot_grace_period(kUpdaterCpu);
  return w;
}

bool litmus_violated(const SimWorld& w) {
  for (const VThread& t : w.threads()) {
    if (!t.name.starts_with("reader") || !t.done()) continue;
    if (t.regs[kRegY] == 1 && t.regs[kRegX] == 0) return true;
  }
  return false;
}

std::vector<Outcome> expected_outcomes(const Scenario& s) {
  switch (s.fault.variant()) {
    case FaultVariant::kNone:
      return {s.property == Property::kLitmusAssertion ? Outcome::kSafe : Outcome::kGpCompleted};
    case FaultVariant::kBug1:
      return {Outcome::kAssertionViolated};
    case FaultVariant::kBug7:
      if (s.readers == 2 && s.tick_model == TickModel::kNondeterministic) {
        return {Outcome::kAssertionViolated};
      }
      if (s.readers == 1 && s.tick_model == TickModel::kFixed) return {Outcome::kBugMissed};
      return {Outcome::kAssertionViolated, Outcome::kBugMissed};
    default:
      return {Outcome::kGpHung};
  }
}

bool RunReport::expected() const {
  const auto ok = expected_outcomes(scenario);
  return std::find(ok.begin(), ok.end(), outcome) != ok.end();
}

int exit_code(const RunReport& r) {
  if (r.expected()) return 0;
  return r.outcome == Outcome::kBudgetExhausted ? 2 : 1;
}

namespace {

/// Stop predicate of the property, plus a label for what tripped it.
struct Judge {
  const Scenario& s;

  std::string_view stop_reason(const SimWorld& w) const {
    if (s.property == Property::kGpCompletes) return w.gp_completed() ? "grace period completed" : "";
    if (w.all_threads_done() && litmus_violated(w)) return "r2 == 1 && r1 == 0";
    if (s.fault.variant() == FaultVariant::kNone) {
      const SafetyMonitor& m = w.monitor();
      if (m.breaches() > 0) return "pre-existing reader outlived a grace period";
      if (m.violated()) return "ghost monitor invariant";
      if (m.diagnostics() > 0) return "diagnostic without an injected fault";
    }
    return "";
  }
};

Outcome classify_search(const Scenario& s, const ExploreStats& st) {
  if (s.property == Property::kGpCompletes) {
    if (st.stopped) return Outcome::kGpCompleted;
    if (st.schedule_budget_hit || st.truncated > 0) return Outcome::kBudgetExhausted;
    return st.complete == 0 ? Outcome::kGpHung : Outcome::kSafe;
  }
  if (st.stopped) return Outcome::kAssertionViolated;
  if (st.schedule_budget_hit || st.truncated > 0) return Outcome::kBudgetExhausted;
  if (s.fault.expected_class() == ExpectedClass::kSafetyViolation) return Outcome::kBugMissed;
  return Outcome::kSafe;
}

Outcome classify_native(const Scenario& s, const NativeStats& n) {
  if (s.property == Property::kGpCompletes) {
    if (n.failing > 0) return Outcome::kGpCompleted;
    return n.timeout == s.runs ? Outcome::kGpHung : Outcome::kSafe;
  }
  if (n.failing > 0) return Outcome::kAssertionViolated;
  if (s.fault.expected_class() == ExpectedClass::kSafetyViolation) return Outcome::kBugMissed;
  return Outcome::kSafe;
}

}  // namespace

Outcome judge_world(const Scenario& s, const SimWorld& w) {
  Judge judge{s};
  if (!judge.stop_reason(w).empty()) {
    return s.property == Property::kGpCompletes ? Outcome::kGpCompleted : Outcome::kAssertionViolated;
  }
  if (s.property == Property::kGpCompletes) return Outcome::kGpHung;
  return Outcome::kSafe;
}

RunReport run_scenario(const Scenario& s, TraceSink* trace) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport r;
  r.scenario = s;
  r.caveat = std::string(s.fault.caveat());

  if (s.mode == Mode::kNative) {
    if (s.tick_model != TickModel::kNondeterministic) {
      throw ConfigError("native mode runs real ticks; the fixed tick model is virtual only");
    }
    r.native = run_native(s);
    r.outcome = classify_native(s, r.native);
  } else {
    const SimWorld root = build_world(s);
    const Judge judge{s};
    std::string reason;
    const Visitor visit = [&judge](const SimWorld& w, NodeKind) {
      return !judge.stop_reason(w).empty();
    };
    ExploreLimits limits{.max_steps = s.max_steps, .max_schedules = s.max_schedules, .prune = s.prune};
    if (s.mode == Mode::kRandom) {
      SimWorld traced = root;
      traced.set_trace(trace);
      r.explore = explore_random(traced, limits, visit, s.seed, s.runs);
    } else {
      const unsigned top = std::max(s.ticks_per_cpu, s.ctx_switches_per_cpu);
      const unsigned first = s.budget_ladder && s.tick_model == TickModel::kNondeterministic ? 0 : top;
      for (unsigned level = first; level <= top; ++level) {
        Scenario pass = s;
        pass.ticks_per_cpu = std::min(level, s.ticks_per_cpu);
        pass.ctx_switches_per_cpu = std::min(level, s.ctx_switches_per_cpu);
        const SimWorld pass_root = level == top ? root : build_world(pass);
        ExploreStats st = s.threads > 1 ? explore_parallel(pass_root, limits, visit, s.threads)
                                        : explore_dfs(pass_root, limits, visit);
        if (st.stopped && level != top) {
          st.stop_path = path_indices(root, path_choices(pass_root, st.stop_path));
        }
        const bool stop = st.stopped || st.schedule_budget_hit;
        if (level == top || stop) {
          // Earlier passes only add to the effort counters.
          const ExploreStats earlier = r.explore;
          r.explore = st;
          r.explore.merge(earlier);
          r.explore.truncated = st.truncated;
          r.explore.deadlocks = st.deadlocks;
          r.explore.complete = st.complete;
          break;
        }
        r.explore.merge(st);
      }
    }
    r.outcome = classify_search(s, r.explore);
    if (r.explore.stopped) {
      r.counterexample = encode_path(r.explore.stop_path);
      const SimWorld end = replay_path(root, r.explore.stop_path,
                                       s.mode == Mode::kRandom ? nullptr : trace);
      r.violation = std::string(judge.stop_reason(end));
    }
    const std::size_t key_bytes = root.state_key().size();
    r.peak_memory_estimate = (s.prune ? r.explore.states * 64 : 0) + s.max_steps * key_bytes * 4;
  }
  if (trace) r.trace_hash = trace->hash();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_schedule(std::ostream& out, const Scenario& s, const std::vector<std::uint32_t>& path) {
  nlohmann::ordered_json j;
  j["scenario"] = s.name;
  j["readers"] = s.readers;
  j["memory_model"] = memory_model_name(s.memory_model);
  j["tick_model"] = tick_model_name(s.tick_model);
  j["placement"] = placement_name(s.placement);
  j["instrumented"] = s.instrumented;
  j["max_steps"] = s.max_steps;
  j["ticks_per_cpu"] = s.ticks_per_cpu;
  j["ctx_switches_per_cpu"] = s.ctx_switches_per_cpu;
  out << "config " << j.dump() << '\n';
  out << "digest " << config_digest(s) << '\n';
  out << "choices " << encode_path(path) << '\n';
}

ScheduleFile read_schedule(std::istream& in) {
  ScheduleFile f;
  bool have_config = false, have_digest = false, have_choices = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string value = space == std::string::npos ? "" : line.substr(space + 1);
    if (key == "config") {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(value);
        f.scenario = make_scenario(j.at("scenario").get<std::string>(), j.at("readers").get<unsigned>());
        f.scenario.memory_model = parse_memory_model(j.at("memory_model").get<std::string>());
        f.scenario.tick_model = parse_tick_model(j.at("tick_model").get<std::string>());
        f.scenario.placement = parse_placement(j.at("placement").get<std::string>());
        f.scenario.instrumented = j.at("instrumented").get<InstrumentedKinds>();
        f.scenario.max_steps = j.at("max_steps").get<std::size_t>();
        f.scenario.ticks_per_cpu = j.at("ticks_per_cpu").get<unsigned>();
        f.scenario.ctx_switches_per_cpu = j.at("ctx_switches_per_cpu").get<unsigned>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad schedule config: ") + e.what());
      }
      have_config = true;
    } else if (key == "digest") {
      f.digest = value;
      have_digest = true;
    } else if (key == "choices") {
      f.path = decode_path(value);
      have_choices = true;
    } else {
      throw ConfigError("unexpected schedule line '" + key + "'");
    }
  }
  if (!have_config || !have_digest || !have_choices) {
    throw ConfigError("schedule file needs config, digest and choices lines");
  }
  return f;
}

RunReport replay(const ScheduleFile& f, TraceSink* trace) {
  if (config_digest(f.scenario) != f.digest) {
    throw ConfigError("schedule digest " + f.digest + " does not match configuration digest " +
                      config_digest(f.scenario));
  }
  const auto t0 = std::chrono::steady_clock::now();
  RunReport r;
  r.scenario = f.scenario;
  r.caveat = std::string(f.scenario.fault.caveat());
  const SimWorld end = replay_path(build_world(f.scenario), f.path, trace);
  r.outcome = judge_world(f.scenario, end);
  r.explore.schedules = 1;
  r.explore.states = f.path.size() + 1;
  r.counterexample = encode_path(f.path);
  r.violation = std::string(Judge{f.scenario}.stop_reason(end));
  if (trace) r.trace_hash = trace->hash();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_table(const std::vector<RunReport>& reports) {
  std::ostringstream o;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-3s %-10s %-4s %12s %10s %10s %10s  %-20s %s\n", "scenario",
                "rd", "mode", "mem", "schedules", "successful", "failing", "timeout", "outcome",
                "expected");
  o << line;
  for (const RunReport& r : reports) {
    const auto& s = r.scenario;
    const bool native = s.mode == Mode::kNative;
    std::snprintf(line, sizeof line, "%-10s %-3u %-10s %-4s %12llu %10s %10s %10s  %-20s %s\n",
                  s.name.c_str(), s.readers, std::string(mode_name(s.mode)).c_str(),
                  std::string(memory_model_name(s.memory_model)).c_str(),
                  static_cast<unsigned long long>(native ? s.runs : r.explore.schedules),
                  native ? std::to_string(r.native.successful).c_str() : "-",
                  native ? std::to_string(r.native.failing).c_str() : "-",
                  native ? std::to_string(r.native.timeout).c_str() : "-",
                  std::string(outcome_name(r.outcome)).c_str(), r.expected() ? "yes" : "NO");
    o << line;
  }
  return o.str();
}

std::string format_jsonl(const RunReport& r) {
  nlohmann::ordered_json j;
  const auto& s = r.scenario;
  j["scenario"] = s.name;
  j["readers"] = s.readers;
  j["fault"] = fault_variant_name(s.fault.variant());
  j["property"] = property_name(s.property);
  j["mode"] = mode_name(s.mode);
  j["memory_model"] = memory_model_name(s.memory_model);
  j["tick_model"] = tick_model_name(s.tick_model);
  j["outcome"] = outcome_name(r.outcome);
  j["expected"] = r.expected();
  if (s.mode == Mode::kNative) {
    j["runs"] = s.runs;
    j["successful"] = r.native.successful;
    j["failing"] = r.native.failing;
    j["timeout"] = r.native.timeout;
  } else {
    j["schedules_explored"] = r.explore.schedules;
    j["states"] = r.explore.states;
    j["pruned"] = r.explore.pruned;
    j["deadlocks"] = r.explore.deadlocks;
    j["truncated"] = r.explore.truncated;
  }
  if (r.counterexample) j["counterexample"] = *r.counterexample;
  if (!r.violation.empty()) j["violation"] = r.violation;
  j["wall_time_s"] = r.wall_seconds;
  j["peak_memory_estimate"] = r.peak_memory_estimate;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.trace_hash));
  j["trace_hash"] = hash;
  j["config_digest"] = config_digest(s);
  if (!r.caveat.empty()) j["caveat"] = r.caveat;
  return j.dump();
}

}  // namespace rcusim
