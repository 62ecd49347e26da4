#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcusim/env.hpp"
#include "rcusim/faults.hpp"
#include "rcusim/monitor.hpp"
#include "rcusim/qs.hpp"
#include "rcusim/state.hpp"
#include "rcusim/trace.hpp"

namespace rcusim {

enum class MemoryModel : std::uint8_t { kSC, kTSO, kPSO };

std::string_view memory_model_name(MemoryModel m);
/// "sc", "tso" or "pso". Throws ConfigError otherwise.
MemoryModel parse_memory_model(std::string_view name);

/// Instructions of a virtual thread. Each one is a single scheduler step.
enum class Op : std::uint8_t {
  kNop,
  kLoad,           // regs[reg] := cell
  kStore,          // cell := value
  kFence,          // drain this CPU's store buffer
  kLock,           // test-and-set on a program-level spinlock; blocks while held
  kUnlock,
  kAcquireCpu,     // take the CPU's exclusive-run token; blocks while held
  kReleaseCpu,
  kReadLock,
  kReadUnlock,
  kSyncEntry,      // synchronize entry check; jumps to target under Bug 1
  kSyncArm,        // wait flag := 1
  kSyncEnqueue,    // queue wakeme, request (and maybe start) a grace period
  kSyncWait,       // blocks until the wait flag reads 0
  kContextSwitch,  // note_context_switch, then a full softirq pass on this CPU
};

std::string_view op_name(Op op);

struct Instr {
  Op op = Op::kNop;
  CellId cell{};
  int value = 0;
  std::uint8_t reg = 0;
  std::uint16_t target = 0;
  std::uint16_t lock = 0;
};

using Program = std::vector<Instr>;

namespace ins {
inline Instr nop() { return {}; }
inline Instr load(CellId c, std::uint8_t reg) { return {.op = Op::kLoad, .cell = c, .reg = reg}; }
inline Instr store(CellId c, int v) { return {.op = Op::kStore, .cell = c, .value = v}; }
inline Instr fence() { return {.op = Op::kFence}; }
inline Instr lock(std::uint16_t id) { return {.op = Op::kLock, .lock = id}; }
inline Instr unlock(std::uint16_t id) { return {.op = Op::kUnlock, .lock = id}; }
inline Instr simple(Op op) { return {.op = op}; }
inline Instr sync_entry(std::uint16_t skip_to) { return {.op = Op::kSyncEntry, .target = skip_to}; }
}  // namespace ins

inline constexpr std::size_t kRegisters = 4;
inline constexpr std::size_t kProgramLocks = 4;

struct VThread {
  std::string name;
  std::size_t cpu = 0;
  std::shared_ptr<const Program> program;
  std::size_t pc = 0;
  std::array<int, kRegisters> regs{};

  bool done() const { return pc >= program->size(); }
  const Instr& current() const { return (*program)[pc]; }
};

/// A scheduler decision.
struct Choice {
  enum class Kind : std::uint8_t { kThread, kSoftirq, kTick, kCtxSwitch, kFlush };
  Kind kind = Kind::kThread;
  std::uint16_t who = 0;  // thread id, or CPU for every other kind
  bool per_cell = false;  // PSO flush of a single cell's queue
  CellId cell{};

  bool operator==(const Choice&) const = default;
};

std::string describe(const Choice& c);

/// Bit set over CellId::Kind naming the cells routed through store buffers.
using InstrumentedKinds = std::uint8_t;
constexpr InstrumentedKinds instrument(CellId::Kind k) {
  return static_cast<InstrumentedKinds>(1u << static_cast<unsigned>(k));
}
inline constexpr InstrumentedKinds kAllCellKinds =
    instrument(CellId::Kind::kLitmus) | instrument(CellId::Kind::kWaitFlag) |
    instrument(CellId::Kind::kPassedQuiesce) | instrument(CellId::Kind::kQsPending);

struct WorldConfig {
  std::size_t cpus = 2;
  std::size_t leaf_fanout = 16;
  std::size_t interior_fanout = 64;
  std::size_t blimit = SegmentedCallbackList::kDefaultBlimit;
  std::size_t litmus_cells = 2;
  MemoryModel memory_model = MemoryModel::kSC;
  InstrumentedKinds instrumented = kAllCellKinds;
  FaultPlan faults;
  RcuConfig rcu;
  unsigned ticks_per_cpu = 0;         // explorer-injected scheduling-clock interrupts
  unsigned ctx_switches_per_cpu = 0;  // explorer-injected context switches
};

/// The modeled kernel environment: virtual CPUs with exclusive-run tokens,
/// interrupt state, spinlocks, shared cells behind an optional store-buffer
/// layer, virtual threads, and the ghost monitor. A plain value: copying it
/// forks the whole execution, which is what the explorers rely on.
class SimWorld {
 public:
  explicit SimWorld(WorldConfig config);

  std::size_t add_thread(std::string name, std::size_t cpu, Program program);

  /// Starts a grace period from outside any thread (boot-time kick).
  void boot_grace_period(std::size_t cpu);

  /// Scheduler decisions available now, in a fixed deterministic order.
  std::vector<Choice> enabled() const;
  /// Executes one decision. Throws ModelError if it is not enabled.
  void step(const Choice& choice);

  /// Raises a tick on cpu. Runs it now if interrupts are enabled and no
  /// softirq pass is active there; otherwise it is queued, never dropped.
  void inject_tick(std::size_t cpu);
  /// local_irq_save / local_irq_restore.
  void irq_save(std::size_t cpu);
  void irq_restore(std::size_t cpu);

  bool all_threads_done() const;
  std::uint64_t steps() const { return steps_; }
  bool gp_completed() const;

  const WorldConfig& config() const { return config_; }
  const RcuUniverse& universe() const { return u_; }
  const SafetyMonitor& monitor() const { return monitor_; }
  const std::vector<VThread>& threads() const { return threads_; }
  bool softirq_running(std::size_t cpu) const { return softirq_[cpu].running(); }
  bool irqs_disabled(std::size_t cpu) const { return irq_depth_[cpu] > 0; }
  unsigned pending_ticks(std::size_t cpu) const { return pending_ticks_[cpu]; }
  unsigned ticks_left(std::size_t cpu) const { return ticks_left_[cpu]; }
  int cpu_holder(std::size_t cpu) const { return cpu_holder_[cpu]; }
  int lock_holder(std::size_t lock) const { return lock_holder_[lock]; }

  /// Globally visible value of a cell (ignores store buffers).
  int memory(CellId cell) const;
  /// Value cpu would read now (own buffered store first).
  int view(std::size_t cpu, CellId cell) const;
  /// Pending stores of cpu, oldest first.
  const std::vector<std::pair<CellId, int>>& store_buffer(std::size_t cpu) const {
    return buffers_[cpu];
  }
  bool instrumented(CellId cell) const {
    return config_.memory_model != MemoryModel::kSC &&
           (config_.instrumented & instrument(cell.kind)) != 0;
  }

  /// Structural audit of the world and its universe. Throws InvariantViolation.
  void check() const;

  /// Canonical byte encoding of everything that influences the future.
  std::string state_key() const;

  /// Attaches a trace sink (not owned). Copies share the pointer, so detach
  /// before forking.
  void set_trace(TraceSink* sink) { trace_ = sink; }

 private:
  friend class WorldEnv;

  void run_tick(std::size_t cpu);
  void start_softirq(std::size_t cpu);
  void finish_softirq(std::size_t cpu);
  bool thread_enabled(std::size_t tid) const;
  bool sleeping(std::size_t cpu) const;
  void exec_thread(std::size_t tid);
  void flush_all(std::size_t cpu);
  void flush_one(std::size_t cpu, bool per_cell, CellId cell);
  void write_memory(CellId cell, int value);
  void emit(std::string_view op, std::size_t cpu, std::initializer_list<TraceArg> args = {});

  WorldConfig config_;
  RcuUniverse u_;
  std::vector<VThread> threads_;
  std::vector<int> cpu_holder_;
  std::vector<int> irq_depth_;
  std::vector<SoftirqActivity> softirq_;
  std::vector<unsigned> ticks_left_;
  std::vector<unsigned> ctx_left_;
  std::vector<unsigned> pending_ticks_;
  std::vector<int> lock_holder_;  // rcu_node locks first, then program locks
  std::vector<int> litmus_;
  int wait_flag_ = 0;
  std::vector<std::vector<std::pair<CellId, int>>> buffers_;
  SafetyMonitor monitor_;
  std::uint64_t steps_ = 0;
  TraceSink* trace_ = nullptr;
};

}  // namespace rcusim
