#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "rcusim/cbs.hpp"
#include "rcusim/faults.hpp"
#include "rcusim/state.hpp"

namespace rcusim {

/// A shared memory location that may be routed through the memory-model layer.
/// Litmus cells are the test program's variables; the others alias RCU fields.
struct CellId {
  enum class Kind : std::uint8_t { kLitmus, kWaitFlag, kPassedQuiesce, kQsPending };
  Kind kind = Kind::kLitmus;
  std::uint16_t index = 0;

  static constexpr CellId litmus(std::size_t i) { return {Kind::kLitmus, static_cast<std::uint16_t>(i)}; }
  static constexpr CellId wait_flag() { return {Kind::kWaitFlag, 0}; }
  static constexpr CellId passed_quiesce(std::size_t cpu) {
    return {Kind::kPassedQuiesce, static_cast<std::uint16_t>(cpu)};
  }
  static constexpr CellId qs_pending(std::size_t cpu) {
    return {Kind::kQsPending, static_cast<std::uint16_t>(cpu)};
  }

  constexpr bool operator==(const CellId&) const = default;
  constexpr auto operator<=>(const CellId&) const = default;
};

std::string cell_name(CellId cell);

struct TraceArg {
  std::string_view key;
  std::int64_t value;
};

/// Everything the RCU core needs from its surroundings: locks, shared-cell
/// accesses, tracing, and the ghost monitor. Implemented by the virtual world
/// (deterministic, single controller) and by the native runner (real threads).
class Env {
 public:
  virtual ~Env() = default;

  /// raw_spin_lock_irqsave on an rcu_node lock.
  virtual void spin_acquire(std::size_t cpu, std::size_t lock) = 0;
  virtual void spin_release(std::size_t cpu, std::size_t lock) = 0;

  virtual int load(std::size_t cpu, CellId cell) = 0;
  virtual void store(std::size_t cpu, CellId cell, int value) = 0;
  /// Full barrier: drains the CPU's pending stores.
  virtual void fence(std::size_t cpu) = 0;

  virtual bool tracing() const = 0;
  virtual void trace(std::string_view op, std::size_t cpu, std::initializer_list<TraceArg> args) = 0;

  // Ghost monitor.
  virtual void on_read_lock(std::size_t cpu) = 0;
  virtual void on_read_unlock(std::size_t cpu) = 0;
  virtual int reader_depth(std::size_t cpu) const = 0;
  virtual void on_gp_start(std::uint64_t gp) = 0;
  virtual void on_gp_end(std::uint64_t gp) = 0;
  virtual void on_gp_state(GpState from, GpState to) = 0;
  virtual void on_qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp) = 0;
  virtual void on_callback_invoked(std::size_t cpu, const Callback& cb) = 0;
  virtual void on_diagnostic(std::string message) = 0;
};

/// Which CPUs gp_init brings up to date while it walks the tree.
enum class GpInitNotify : std::uint8_t {
  kInitiatingCpu,  // only the CPU running the driver; others notice on their next tick
  kAllCpus,        // every CPU, so no softirq pass is needed to notice the start
};

struct RcuConfig {
  GpInitNotify gp_init_notify = GpInitNotify::kInitiatingCpu;
  /// When set, cleanup clears the wait flag directly (the stubbed-callback
  /// model) instead of relying on wakeme_after_rcu being invoked.
  bool cleanup_wakes_waiter = false;

  bool operator==(const RcuConfig&) const = default;
};

/// Handle passed to every RCU operation.
struct RcuContext {
  RcuUniverse& u;
  Env& env;
  const FaultPlan& faults;
  const RcuConfig& config;

  void emit(std::string_view op, std::size_t cpu, std::initializer_list<TraceArg> args = {}) {
    if (env.tracing()) env.trace(op, cpu, args);
  }
};

}  // namespace rcusim
