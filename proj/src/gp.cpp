#include "rcusim/gp.hpp"

#include <string>

#include "rcusim/errors.hpp"
#include "rcusim/qs.hpp"

namespace rcusim {

namespace {

void set_gp_state(RcuContext& ctx, GpState to) {
  const GpState from = ctx.u.state.gp_state;
  ctx.u.state.gp_state = to;
  ctx.env.on_gp_state(from, to);
}

bool notifies(const RcuContext& ctx, std::size_t cpu, std::size_t initiating_cpu) {
  return ctx.config.gp_init_notify == GpInitNotify::kAllCpus || cpu == initiating_cpu;
}

}  // namespace

void request_gp(RcuContext& ctx, std::size_t cpu) {
  RcuNode& root = ctx.u.root();
  ctx.env.spin_acquire(cpu, root.lock_id);
  if (ctx.u.state.gp_flags != GpFlags::kInit) {
    ctx.u.state.gp_flags = GpFlags::kInit;
    ctx.emit("request_gp", cpu);
  }
  ctx.env.spin_release(cpu, root.lock_id);
}

bool gp_init(RcuContext& ctx, std::size_t initiating_cpu) {
  RcuState& rsp = ctx.u.state;
  RcuNode& root = ctx.u.root();
  ctx.env.spin_acquire(initiating_cpu, root.lock_id);
  if (rsp.gp_flags != GpFlags::kInit) {
    ctx.env.spin_release(initiating_cpu, root.lock_id);
    return false;
  }
  if (!is_idle(rsp)) {
    // Another CPU started one first; the request stays pending for cleanup.
    ctx.env.spin_release(initiating_cpu, root.lock_id);
    return false;
  }
  rsp.gp_flags = GpFlags::kNone;
  set_gp_state(ctx, GpState::kInit);
  rsp.gpnum += 1;
  ctx.env.on_gp_start(rsp.gpnum);
  ctx.emit("gp_init", initiating_cpu, {{"gpnum", static_cast<std::int64_t>(rsp.gpnum)}});
  ctx.env.spin_release(initiating_cpu, root.lock_id);

  const std::uint64_t gpnum = rsp.gpnum;
  const std::uint64_t completed = rsp.completed;
  const auto& geom = ctx.u.geometry;
  for (RcuNode& rnp : ctx.u.nodes) {
    ctx.env.spin_acquire(initiating_cpu, rnp.lock_id);
    rnp.qsmask = ctx.faults.apply(HookPoint::kGpInitQsmask, rnp.qsmaskinit, ChildSet{});
    rnp.gpnum = gpnum;
    rnp.completed = completed;
    if (geom.is_leaf(rnp.index)) {
      for (std::size_t cpu = rnp.grplo; cpu <= rnp.grphi; ++cpu) {
        if (!notifies(ctx, cpu, initiating_cpu)) continue;
        note_gp_changes(ctx, cpu);
        if (cpu == initiating_cpu) ctx.u.data[cpu].callbacks.accelerate_bypass(gpnum);
      }
    }
    // The last node's lock orders this transition before any cleanup that
    // the freshly initialized tree could trigger.
    if (rnp.index + 1 == ctx.u.nodes.size() && rsp.gp_state == GpState::kInit) {
      set_gp_state(ctx, GpState::kWaitQs);
    }
    ctx.env.spin_release(initiating_cpu, rnp.lock_id);
  }
  return true;
}

void gp_cleanup(RcuContext& ctx, std::size_t cpu) {
  RcuState& rsp = ctx.u.state;
  RcuNode& root = ctx.u.root();
  ctx.env.spin_acquire(cpu, root.lock_id);
  if (!root.qsmask.empty()) {
    ctx.env.on_diagnostic("gp_cleanup with nonempty root qsmask at gpnum " +
                          std::to_string(rsp.gpnum));
  }
  if (is_idle(rsp)) {
    ctx.env.spin_release(cpu, root.lock_id);
    throw ModelError("gp_cleanup with no grace period in progress");
  }
  set_gp_state(ctx, GpState::kCleanup);
  const std::uint64_t gpnum = rsp.gpnum;
  ctx.env.spin_release(cpu, root.lock_id);

  const std::size_t my_leaf = ctx.u.data[cpu].mynode;
  for (RcuNode& rnp : ctx.u.nodes) {
    ctx.env.spin_acquire(cpu, rnp.lock_id);
    rnp.completed = gpnum;
    if (rnp.index == my_leaf) note_gp_changes(ctx, cpu);
    ctx.env.spin_release(cpu, rnp.lock_id);
  }

  ctx.env.spin_acquire(cpu, root.lock_id);
  rsp.completed = gpnum;
  ctx.env.on_gp_end(rsp.completed);
  ctx.emit("gp_cleanup", cpu, {{"completed", static_cast<std::int64_t>(rsp.completed)}});
  ctx.u.data[cpu].callbacks.advance(rsp.completed);
  if (ctx.config.cleanup_wakes_waiter) ctx.env.store(cpu, CellId::wait_flag(), 0);
  set_gp_state(ctx, GpState::kCleaned);
  if (ctx.u.data[cpu].callbacks.needs_grace_period_after(rsp.completed)) rsp.gp_flags = GpFlags::kInit;
  const bool again = rsp.gp_flags == GpFlags::kInit;
  if (!again) set_gp_state(ctx, GpState::kWaitGps);
  ctx.env.spin_release(cpu, root.lock_id);

  if (again) gp_init(ctx, cpu);
}

}  // namespace rcusim
