#pragma once

#include <cstddef>
#include <cstdint>

#include "rcusim/env.hpp"

namespace rcusim {

/// rcu_sched_qs: passed_quiesce := 1.
void record_qs(RcuContext& ctx, std::size_t cpu);

/// Voluntary context switch. Throws ModelError inside a read-side section.
void note_context_switch(RcuContext& ctx, std::size_t cpu);

/// __note_gp_changes. The caller holds the CPU's leaf lock.
void note_gp_changes(RcuContext& ctx, std::size_t cpu);

/// One in-flight walk of report_qs_rnp; advanced one tree level per step.
struct RnpWalk {
  std::size_t node = 0;
  ChildSet mask;
  std::uint64_t gp_at_entry = 0;
  bool active = false;

  bool operator==(const RnpWalk&) const = default;
};

/// Starts a walk at start_node. Returns an inactive walk under Bug 6.
RnpWalk begin_report_qs_rnp(RcuContext& ctx, std::size_t start_node, ChildSet mask,
                            std::uint64_t gp_at_entry);
/// Processes one node of the walk (lock, check, clear, release). When the root
/// empties, report_qs_rsp runs inside this step. Returns walk.active.
bool step_report_qs_rnp(RcuContext& ctx, std::size_t cpu, RnpWalk& walk);
/// Runs a whole walk.
void report_qs_rnp(RcuContext& ctx, std::size_t cpu, std::size_t start_node, ChildSet mask,
                   std::uint64_t gp_at_entry);

/// Verifies the quiescent state is for the current grace period and, if the
/// leaf still wants it, starts the walk. Returns the (possibly inactive) walk.
RnpWalk begin_report_qs_rdp(RcuContext& ctx, std::size_t cpu);
void report_qs_rdp(RcuContext& ctx, std::size_t cpu);

/// Grace period over at the root: runs the driver's cleanup directly.
void report_qs_rsp(RcuContext& ctx, std::size_t cpu);

/// rcu_check_quiescent_state: note_gp_changes under the leaf lock, then a
/// report if qs_pending and passed_quiesce are both set.
void check_quiescent_state(RcuContext& ctx, std::size_t cpu);

/// rcu_process_callbacks split at its lock boundaries so an explorer can
/// interleave other CPUs between the phases.
struct SoftirqActivity {
  enum class Phase : std::uint8_t { kIdle, kNoteChanges, kReport, kWalk, kStartGpAndInvoke };
  Phase phase = Phase::kIdle;
  RnpWalk walk;

  bool running() const { return phase != Phase::kIdle; }
  bool operator==(const SoftirqActivity&) const = default;
};

SoftirqActivity begin_process_callbacks();
/// Executes one phase. Returns false once the handler has finished.
bool step_process_callbacks(RcuContext& ctx, std::size_t cpu, SoftirqActivity& act);
/// Runs the whole handler.
void process_callbacks(RcuContext& ctx, std::size_t cpu);

/// invoke_rcu_callbacks: takes at most blimit DONE callbacks and runs them.
void invoke_callbacks(RcuContext& ctx, std::size_t cpu);

}  // namespace rcusim
