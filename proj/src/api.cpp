#include "rcusim/api.hpp"

#include <string>

#include "rcusim/errors.hpp"
#include "rcusim/gp.hpp"
#include "rcusim/qs.hpp"

namespace rcusim {

void read_lock(RcuContext& ctx, std::size_t cpu) {
  ctx.env.on_read_lock(cpu);
  ctx.emit("rcu_read_lock", cpu, {{"depth", ctx.env.reader_depth(cpu)}});
}

void read_unlock(RcuContext& ctx, std::size_t cpu) {
  if (ctx.env.reader_depth(cpu) == 0) {
    throw ModelError("unbalanced rcu_read_unlock on cpu " + std::to_string(cpu));
  }
  ctx.env.on_read_unlock(cpu);
  ctx.emit("rcu_read_unlock", cpu, {{"depth", ctx.env.reader_depth(cpu)}});
}

namespace sync {

bool entry(RcuContext& ctx, std::size_t cpu) {
  if (ctx.env.reader_depth(cpu) > 0) {
    throw ModelError("synchronize_rcu inside a read-side critical section on cpu " +
                     std::to_string(cpu) + " would deadlock");
  }
  if (ctx.faults.mutates(HookPoint::kSynchronizeEntry)) {
    ctx.emit("synchronize_rcu_skipped", cpu);
    return false;
  }
  ctx.emit("synchronize_rcu", cpu);
  return true;
}

void arm_wait_flag(RcuContext& ctx, std::size_t cpu) {
  ctx.env.store(cpu, CellId::wait_flag(), 1);
}

void enqueue_and_request(RcuContext& ctx, std::size_t cpu, std::uint64_t callback_id) {
  ctx.u.data[cpu].callbacks.enqueue(
      Callback{.id = callback_id, .func = CallbackFunc::kWakemeAfterRcu, .assigned_gp = {}});
  ctx.emit("call_rcu", cpu, {{"id", static_cast<std::int64_t>(callback_id)}});
  request_gp(ctx, cpu);
  ctx.env.spin_acquire(cpu, ctx.u.root().lock_id);
  const bool idle = is_idle(ctx.u.state);
  ctx.env.spin_release(cpu, ctx.u.root().lock_id);
  if (idle) gp_init(ctx, cpu);
}

void yield(RcuContext& ctx, std::size_t cpu) { note_context_switch(ctx, cpu); }

bool wait_done(RcuContext& ctx, std::size_t cpu) {
  return ctx.env.load(cpu, CellId::wait_flag()) == 0;
}

}  // namespace sync

bool synchronize(RcuContext& ctx, std::size_t cpu, std::uint64_t callback_id,
                 const std::function<bool()>& while_blocked) {
  if (!sync::entry(ctx, cpu)) return true;
  sync::arm_wait_flag(ctx, cpu);
  sync::enqueue_and_request(ctx, cpu, callback_id);
  sync::yield(ctx, cpu);
  process_callbacks(ctx, cpu);
  while (!sync::wait_done(ctx, cpu)) {
    if (!while_blocked()) return false;
  }
  return true;
}

void assign_pointer(RcuContext& ctx, std::size_t cpu, CellId cell, int value) {
  ctx.env.fence(cpu);
  ctx.env.store(cpu, cell, value);
}

int dereference(RcuContext& ctx, std::size_t cpu, CellId cell) { return ctx.env.load(cpu, cell); }

}  // namespace rcusim
