#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "rcusim/env.hpp"

namespace rcusim {

/// rcu_read_lock: no RCU state change; opens (or nests) the ghost section.
void read_lock(RcuContext& ctx, std::size_t cpu);
/// rcu_read_unlock. Throws ModelError when unbalanced.
void read_unlock(RcuContext& ctx, std::size_t cpu);

/// synchronize_rcu decomposed into the pieces an explorer schedules
/// separately. Bug 1 turns the entry check into an immediate return.
namespace sync {

/// False if synchronize must return at once (Bug 1). Throws ModelError when
/// called inside a read-side section.
bool entry(RcuContext& ctx, std::size_t cpu);
/// wait_rcu_gp_flag := 1.
void arm_wait_flag(RcuContext& ctx, std::size_t cpu);
/// Queues wakeme_after_rcu on this CPU and requests a grace period, starting it
/// here if RCU is idle.
void enqueue_and_request(RcuContext& ctx, std::size_t cpu, std::uint64_t callback_id);
/// Blocking context switch: records the quiescent state.
void yield(RcuContext& ctx, std::size_t cpu);
/// True once the wait flag reads zero on this CPU.
bool wait_done(RcuContext& ctx, std::size_t cpu);

}  // namespace sync

/// Whole synchronize for direct callers. while_blocked runs once per wait
/// iteration (context switch + softirq in the native runner) and returns false
/// to abandon the wait; the function then returns false.
bool synchronize(RcuContext& ctx, std::size_t cpu, std::uint64_t callback_id,
                 const std::function<bool()>& while_blocked);

/// rcu_assign_pointer: store with release ordering on the given cell.
void assign_pointer(RcuContext& ctx, std::size_t cpu, CellId cell, int value);
/// rcu_dereference: load with consume ordering (loads are never reordered in
/// the modeled memory systems).
int dereference(RcuContext& ctx, std::size_t cpu, CellId cell);

}  // namespace rcusim
