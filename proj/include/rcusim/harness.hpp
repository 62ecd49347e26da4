#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcusim/explore.hpp"
#include "rcusim/faults.hpp"
#include "rcusim/sim.hpp"
#include "rcusim/trace.hpp"

namespace rcusim {

enum class Property : std::uint8_t {
  kLitmusAssertion,         // after both sides finish: r2 == 0 || r1 == 1
  kGpCompletes,  // some schedule ends a grace period and wakes the updater
};

enum class Mode : std::uint8_t { kExhaustive, kRandom, kNative };

/// Where ticks and context switches come from.
enum class TickModel : std::uint8_t {
  kNondeterministic,  // explorer injects them anywhere, within per-CPU budgets
  kFixed,     // only the fixed direct calls; grace period kicked off at boot
};

/// With two readers: their own CPU each (three CPUs) or both on CPU 0.
enum class ReaderPlacement : std::uint8_t { kSeparate, kShared };

enum class Outcome : std::uint8_t {
  kSafe,
  kAssertionViolated,
  kGpHung,
  kGpCompleted,
  kBudgetExhausted,
  kBugMissed,
};

std::string_view property_name(Property p);
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view s);
std::string_view tick_model_name(TickModel t);
TickModel parse_tick_model(std::string_view s);
std::string_view placement_name(ReaderPlacement p);
ReaderPlacement parse_placement(std::string_view s);
std::string_view outcome_name(Outcome o);

inline constexpr std::string_view kScenarioNames[] = {"prove", "prove-gp", "bug1", "bug2", "bug3",
                                                      "bug4",  "bug5",     "bug6", "bug7"};

struct Scenario {
  std::string name = "prove";
  unsigned readers = 1;
  FaultPlan fault;
  Property property = Property::kLitmusAssertion;
  MemoryModel memory_model = MemoryModel::kSC;
  Mode mode = Mode::kExhaustive;
  TickModel tick_model = TickModel::kNondeterministic;
  ReaderPlacement placement = ReaderPlacement::kSeparate;
  InstrumentedKinds instrumented = kAllCellKinds;
  std::uint64_t seed = 1;
  std::size_t max_steps = 400;
  std::uint64_t max_schedules = 20'000'000;
  std::uint64_t runs = 200;
  std::uint32_t timeout_ms = 2000;
  bool prune = true;
  /// Exhaustive search raises the tick and context-switch budgets one step at
  /// a time, so schedules needing few events are found first. The last pass
  /// always uses the full budgets.
  bool budget_ladder = true;
  int threads = 1;  // exhaustive: 1 = serial search, more = OpenMP search
  unsigned ticks_per_cpu = 2;
  unsigned ctx_switches_per_cpu = 1;
  std::uint32_t native_max_delay_us = 5000;
  std::uint32_t native_tick_us = 1000;
};

/// Scenario with the fault plan and property of a named row. Throws
/// ConfigError for unknown names or reader counts other than 1 and 2.
Scenario make_scenario(std::string_view name, unsigned readers = 1);

/// Canonical text of every setting that shapes the explored world.
std::string config_text(const Scenario& s);
/// Hex digest of config_text.
std::string config_digest(const Scenario& s);

/// The litmus world: reader(s) on CPU 0 (and 2), updater on CPU 1.
SimWorld build_world(const Scenario& s);

/// Register of reader thread holding each load.
inline constexpr std::uint8_t kRegX = 0;
inline constexpr std::uint8_t kRegY = 1;

/// True when a finished reader saw the new y but the old x.
bool litmus_violated(const SimWorld& w);

/// Outcomes that count as matching the row's expectation.
std::vector<Outcome> expected_outcomes(const Scenario& s);

struct NativeStats {
  std::uint64_t successful = 0;
  std::uint64_t failing = 0;
  std::uint64_t timeout = 0;
  std::uint64_t ghost_breaches = 0;
};

struct RunReport {
  Scenario scenario;
  Outcome outcome = Outcome::kSafe;
  ExploreStats explore;
  NativeStats native;
  std::optional<std::string> counterexample;  // encoded choice path
  std::string violation;                      // what stopped the search
  double wall_seconds = 0.0;
  std::size_t peak_memory_estimate = 0;       // bytes
  std::uint64_t trace_hash = 0;
  std::string caveat;

  bool expected() const;
};

/// Runs a scenario in its mode. Tracing, when a sink is given, covers the
/// random schedules themselves or, for exhaustive runs, the replayed
/// counterexample.
RunReport run_scenario(const Scenario& s, TraceSink* trace = nullptr);

struct ScheduleFile {
  Scenario scenario;
  std::string digest;
  std::vector<std::uint32_t> path;
};

void write_schedule(std::ostream& out, const Scenario& s, const std::vector<std::uint32_t>& path);
/// Throws ConfigError on malformed input.
ScheduleFile read_schedule(std::istream& in);

/// Replays a stored schedule. Throws ConfigError when the embedded digest does
/// not match the embedded configuration.
RunReport replay(const ScheduleFile& f, TraceSink* trace = nullptr);

/// Outcome of a single finished (or abandoned) schedule.
Outcome judge_world(const Scenario& s, const SimWorld& w);

std::string format_table(const std::vector<RunReport>& reports);
std::string format_jsonl(const RunReport& r);

/// Process exit code: 0 expected, 1 unexpected, 2 budget exhausted.
int exit_code(const RunReport& r);

}  // namespace rcusim
