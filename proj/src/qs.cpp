#include "rcusim/qs.hpp"

#include <string>

#include "rcusim/errors.hpp"
#include "rcusim/gp.hpp"

namespace rcusim {

namespace {

bool passed_quiesce(RcuContext& ctx, std::size_t cpu) {
  return ctx.env.load(cpu, CellId::passed_quiesce(cpu)) != 0;
}
bool qs_pending(RcuContext& ctx, std::size_t cpu) {
  return ctx.env.load(cpu, CellId::qs_pending(cpu)) != 0;
}
void set_passed_quiesce(RcuContext& ctx, std::size_t cpu, bool v) {
  ctx.env.store(cpu, CellId::passed_quiesce(cpu), v ? 1 : 0);
}
void set_qs_pending(RcuContext& ctx, std::size_t cpu, bool v) {
  ctx.env.store(cpu, CellId::qs_pending(cpu), v ? 1 : 0);
}

std::int64_t as_arg(std::uint64_t v) { return static_cast<std::int64_t>(v); }
std::int64_t as_arg(std::size_t v, int) { return static_cast<std::int64_t>(v); }

}  // namespace

void record_qs(RcuContext& ctx, std::size_t cpu) {
  if (ctx.faults.mutates(HookPoint::kRecordQs)) {
    ctx.emit("rcu_sched_qs_skipped", cpu);
    return;
  }
  set_passed_quiesce(ctx, cpu, true);
  ctx.emit("rcu_sched_qs", cpu);
}

void note_context_switch(RcuContext& ctx, std::size_t cpu) {
  if (ctx.env.reader_depth(cpu) > 0) {
    throw ModelError("context switch on cpu " + std::to_string(cpu) +
                     " inside an RCU read-side critical section");
  }
  ctx.emit("rcu_note_context_switch", cpu);
  record_qs(ctx, cpu);
}

void note_gp_changes(RcuContext& ctx, std::size_t cpu) {
  RcuData& rdp = ctx.u.data[cpu];
  RcuNode& rnp = ctx.u.nodes[rdp.mynode];

  if (rdp.completed != rnp.completed) {
    rdp.completed = rnp.completed;
    rdp.callbacks.advance(rnp.completed);
    ctx.emit("gp_end_noted", cpu, {{"completed", as_arg(rdp.completed)}});
  } else {
    rdp.callbacks.accelerate(rnp.gpnum);
  }

  if (rdp.gpnum != rnp.gpnum) {
    rdp.gpnum = rnp.gpnum;
    set_passed_quiesce(ctx, cpu, false);
    bool pending = rnp.qsmask.contains(rdp.grpmask_bit);
    if (ctx.faults.mutates(HookPoint::kNoteGpChangesClearMask)) {
      rnp.qsmask.erase(rdp.grpmask_bit);
    }
    pending = ctx.faults.apply(HookPoint::kNoteGpChangesQsPending, pending, false);
    set_qs_pending(ctx, cpu, pending);
    ctx.emit("gp_start_noted", cpu,
             {{"gpnum", as_arg(rdp.gpnum)}, {"qs_pending", pending ? 1 : 0}});
  }
}

RnpWalk begin_report_qs_rnp(RcuContext& ctx, std::size_t start_node, ChildSet mask,
                            std::uint64_t gp_at_entry) {
  if (ctx.faults.mutates(HookPoint::kReportQsRnpEntry)) return {};
  return RnpWalk{.node = start_node, .mask = mask, .gp_at_entry = gp_at_entry, .active = true};
}

bool step_report_qs_rnp(RcuContext& ctx, std::size_t cpu, RnpWalk& walk) {
  if (!walk.active) return false;
  RcuNode& rnp = ctx.u.nodes[walk.node];
  ctx.env.spin_acquire(cpu, rnp.lock_id);

  const bool bits_pending = (rnp.qsmask.raw() & walk.mask.raw()) != 0;
  if (!bits_pending || rnp.gpnum != walk.gp_at_entry) {
    ctx.emit("report_qs_rnp_stop", cpu,
             {{"node", as_arg(rnp.index, 0)}, {"qsmask", static_cast<std::int64_t>(rnp.qsmask.raw())}});
    ctx.env.spin_release(cpu, rnp.lock_id);
    walk.active = false;
    return false;
  }
  if (!walk.mask.subset_of(rnp.qsmask)) {
    ctx.env.spin_release(cpu, rnp.lock_id);
    throw InvariantViolation("report_qs_rnp clearing an already-clear bit at node " +
                             std::to_string(rnp.index));
  }
  for (std::size_t bit : walk.mask.ordinals()) {
    rnp.qsmask.erase(bit);
    ctx.env.on_qs_bit_cleared(rnp.index, bit, walk.gp_at_entry);
  }
  ctx.emit("qsmask_clear", cpu,
           {{"node", as_arg(rnp.index, 0)},
            {"mask", static_cast<std::int64_t>(walk.mask.raw())},
            {"qsmask", static_cast<std::int64_t>(rnp.qsmask.raw())}});

  const bool stop_check = !ctx.faults.mutates(HookPoint::kReportQsRnpStopCheck);
  if (stop_check && !rnp.qsmask.empty()) {
    ctx.env.spin_release(cpu, rnp.lock_id);
    walk.active = false;
    return false;
  }
  if (!rnp.parent) {
    ctx.env.spin_release(cpu, rnp.lock_id);
    walk.active = false;
    report_qs_rsp(ctx, cpu);
    return false;
  }
  walk.mask = ChildSet::of({rnp.grpmask_bit});
  walk.node = *rnp.parent;
  ctx.env.spin_release(cpu, rnp.lock_id);
  return true;
}

void report_qs_rnp(RcuContext& ctx, std::size_t cpu, std::size_t start_node, ChildSet mask,
                   std::uint64_t gp_at_entry) {
  RnpWalk walk = begin_report_qs_rnp(ctx, start_node, mask, gp_at_entry);
  while (step_report_qs_rnp(ctx, cpu, walk)) {
  }
}

RnpWalk begin_report_qs_rdp(RcuContext& ctx, std::size_t cpu) {
  RcuData& rdp = ctx.u.data[cpu];
  RcuNode& rnp = ctx.u.nodes[rdp.mynode];
  ctx.env.spin_acquire(cpu, rnp.lock_id);
  const bool stale = rdp.gpnum != rnp.gpnum || rdp.completed != rnp.completed ||
                     rnp.gpnum == rnp.completed || !passed_quiesce(ctx, cpu);
  if (stale) {
    set_passed_quiesce(ctx, cpu, false);
    ctx.emit("report_qs_rdp_stale", cpu, {{"gpnum", as_arg(rdp.gpnum)}});
    ctx.env.spin_release(cpu, rnp.lock_id);
    return {};
  }
  if (!rnp.qsmask.contains(rdp.grpmask_bit)) {
    ctx.env.spin_release(cpu, rnp.lock_id);
    return {};
  }
  set_qs_pending(ctx, cpu, false);
  rdp.callbacks.accelerate(rnp.gpnum);
  const std::uint64_t gp = rnp.gpnum;
  ctx.emit("report_qs_rdp", cpu, {{"gpnum", as_arg(gp)}});
  ctx.env.spin_release(cpu, rnp.lock_id);
  return begin_report_qs_rnp(ctx, rdp.mynode, ChildSet::of({rdp.grpmask_bit}), gp);
}

void report_qs_rdp(RcuContext& ctx, std::size_t cpu) {
  RnpWalk walk = begin_report_qs_rdp(ctx, cpu);
  while (step_report_qs_rnp(ctx, cpu, walk)) {
  }
}

void report_qs_rsp(RcuContext& ctx, std::size_t cpu) {
  RcuNode& root = ctx.u.root();
  ctx.env.spin_acquire(cpu, root.lock_id);
  const bool idle = is_idle(ctx.u.state);
  const std::uint64_t gpnum = ctx.u.state.gpnum;
  const bool root_clear = root.qsmask.empty();
  ctx.env.spin_release(cpu, root.lock_id);
  if (idle) {
    ctx.env.on_diagnostic("report_qs_rsp with no grace period in progress");
    return;
  }
  if (!root_clear) {
    ctx.env.on_diagnostic("report_qs_rsp with nonempty root qsmask at gpnum " +
                          std::to_string(gpnum));
  }
  ctx.emit("report_qs_rsp", cpu, {{"gpnum", as_arg(gpnum)}});
  gp_cleanup(ctx, cpu);
}

void check_quiescent_state(RcuContext& ctx, std::size_t cpu) {
  const std::size_t leaf = ctx.u.data[cpu].mynode;
  ctx.env.spin_acquire(cpu, leaf);
  note_gp_changes(ctx, cpu);
  ctx.env.spin_release(cpu, leaf);
  if (qs_pending(ctx, cpu) && passed_quiesce(ctx, cpu)) report_qs_rdp(ctx, cpu);
}

void invoke_callbacks(RcuContext& ctx, std::size_t cpu) {
  for (const Callback& cb : ctx.u.data[cpu].callbacks.take_done()) {
    ctx.emit("invoke_callback", cpu,
             {{"id", static_cast<std::int64_t>(cb.id)}, {"func", static_cast<std::int64_t>(cb.func)}});
    if (cb.func == CallbackFunc::kWakemeAfterRcu) ctx.env.store(cpu, CellId::wait_flag(), 0);
    ctx.env.on_callback_invoked(cpu, cb);
  }
}

namespace {

void start_gp_if_needed(RcuContext& ctx, std::size_t cpu) {
  const auto& cbs = ctx.u.data[cpu].callbacks;
  RcuNode& root = ctx.u.root();
  ctx.env.spin_acquire(cpu, root.lock_id);
  const bool wanted = cbs.needs_grace_period_after(ctx.u.state.completed) ||
                      ctx.u.state.gp_flags == GpFlags::kInit;
  const bool idle = is_idle(ctx.u.state);
  ctx.env.spin_release(cpu, root.lock_id);
  if (!wanted || !idle) return;
  request_gp(ctx, cpu);
  gp_init(ctx, cpu);
}

}  // namespace

SoftirqActivity begin_process_callbacks() {
  return SoftirqActivity{.phase = SoftirqActivity::Phase::kNoteChanges, .walk = {}};
}

bool step_process_callbacks(RcuContext& ctx, std::size_t cpu, SoftirqActivity& act) {
  using Phase = SoftirqActivity::Phase;
  switch (act.phase) {
    case Phase::kIdle:
      return false;
    case Phase::kNoteChanges: {
      const std::size_t leaf = ctx.u.data[cpu].mynode;
      ctx.env.spin_acquire(cpu, leaf);
      note_gp_changes(ctx, cpu);
      ctx.env.spin_release(cpu, leaf);
      act.phase = (qs_pending(ctx, cpu) && passed_quiesce(ctx, cpu)) ? Phase::kReport
                                                                      : Phase::kStartGpAndInvoke;
      return true;
    }
    case Phase::kReport:
      act.walk = begin_report_qs_rdp(ctx, cpu);
      act.phase = step_report_qs_rnp(ctx, cpu, act.walk) ? Phase::kWalk : Phase::kStartGpAndInvoke;
      return true;
    case Phase::kWalk:
      if (!step_report_qs_rnp(ctx, cpu, act.walk)) act.phase = Phase::kStartGpAndInvoke;
      return true;
    case Phase::kStartGpAndInvoke:
      start_gp_if_needed(ctx, cpu);
      invoke_callbacks(ctx, cpu);
      act = SoftirqActivity{};
      return false;
  }
  return false;
}

void process_callbacks(RcuContext& ctx, std::size_t cpu) {
  ctx.emit("rcu_process_callbacks", cpu);
  SoftirqActivity act = begin_process_callbacks();
  while (step_process_callbacks(ctx, cpu, act)) {
  }
}

}  // namespace rcusim
