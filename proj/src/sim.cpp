#include "rcusim/sim.hpp"

#include <algorithm>

#include "rcusim/api.hpp"
#include "rcusim/errors.hpp"
#include "rcusim/gp.hpp"

namespace rcusim {

std::string cell_name(CellId cell) {
  switch (cell.kind) {
    case CellId::Kind::kLitmus: {
      static constexpr std::string_view names = "xyzw";
      if (cell.index < names.size()) return std::string(1, names[cell.index]);
      return "v" + std::to_string(cell.index);
    }
    case CellId::Kind::kWaitFlag: return "wait_rcu_gp_flag";
    case CellId::Kind::kPassedQuiesce: return "passed_quiesce[" + std::to_string(cell.index) + "]";
    case CellId::Kind::kQsPending: return "qs_pending[" + std::to_string(cell.index) + "]";
  }
  return "?";
}

std::string_view memory_model_name(MemoryModel m) {
  switch (m) {
    case MemoryModel::kSC: return "sc";
    case MemoryModel::kTSO: return "tso";
    case MemoryModel::kPSO: return "pso";
  }
  return "?";
}

MemoryModel parse_memory_model(std::string_view name) {
  if (name == "sc") return MemoryModel::kSC;
  if (name == "tso") return MemoryModel::kTSO;
  if (name == "pso") return MemoryModel::kPSO;
  throw ConfigError("unknown memory model '" + std::string(name) + "'");
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kNop: return "nop";
    case Op::kLoad: return "load";
    case Op::kStore: return "store";
    case Op::kFence: return "fence";
    case Op::kLock: return "lock";
    case Op::kUnlock: return "unlock";
    case Op::kAcquireCpu: return "acquire_cpu";
    case Op::kReleaseCpu: return "release_cpu";
    case Op::kReadLock: return "read_lock";
    case Op::kReadUnlock: return "read_unlock";
    case Op::kSyncEntry: return "sync_entry";
    case Op::kSyncArm: return "sync_arm";
    case Op::kSyncEnqueue: return "sync_enqueue";
    case Op::kSyncWait: return "sync_wait";
    case Op::kContextSwitch: return "context_switch";
  }
  return "?";
}

std::string describe(const Choice& c) {
  switch (c.kind) {
    case Choice::Kind::kThread: return "thread " + std::to_string(c.who);
    case Choice::Kind::kSoftirq: return "softirq cpu " + std::to_string(c.who);
    case Choice::Kind::kTick: return "tick cpu " + std::to_string(c.who);
    case Choice::Kind::kCtxSwitch: return "ctxsw cpu " + std::to_string(c.who);
    case Choice::Kind::kFlush:
      return "flush cpu " + std::to_string(c.who) + (c.per_cell ? " " + cell_name(c.cell) : "");
  }
  return "?";
}

/// Env view of a world for the duration of one step.
class WorldEnv final : public Env {
 public:
  explicit WorldEnv(SimWorld& w) : w_(w) {}

  void spin_acquire(std::size_t cpu, std::size_t lock) override {
    const int holder = w_.lock_holder_[lock];
    if (holder == static_cast<int>(cpu)) {
      throw ModelError("recursive acquisition of lock " + std::to_string(lock) + " on cpu " +
                       std::to_string(cpu));
    }
    if (holder >= 0) {
      throw ModelError("lock " + std::to_string(lock) + " held by cpu " + std::to_string(holder) +
                       " across a step boundary");
    }
    ++w_.irq_depth_[cpu];
    w_.flush_all(cpu);
    w_.lock_holder_[lock] = static_cast<int>(cpu);
    w_.emit("spin_lock", cpu, {{"lock", static_cast<std::int64_t>(lock)}});
  }

  void spin_release(std::size_t cpu, std::size_t lock) override {
    if (w_.lock_holder_[lock] != static_cast<int>(cpu)) {
      throw ModelError("cpu " + std::to_string(cpu) + " releases lock " + std::to_string(lock) +
                       " it does not hold");
    }
    w_.flush_all(cpu);
    w_.lock_holder_[lock] = -1;
    --w_.irq_depth_[cpu];
    w_.emit("spin_unlock", cpu, {{"lock", static_cast<std::int64_t>(lock)}});
  }

  int load(std::size_t cpu, CellId cell) override { return w_.view(cpu, cell); }

  void store(std::size_t cpu, CellId cell, int value) override {
    if (w_.instrumented(cell)) {
      w_.buffers_[cpu].emplace_back(cell, value);
    } else {
      w_.write_memory(cell, value);
    }
  }

  void fence(std::size_t cpu) override { w_.flush_all(cpu); }

  bool tracing() const override { return w_.trace_ != nullptr; }
  void trace(std::string_view op, std::size_t cpu, std::initializer_list<TraceArg> args) override {
    w_.emit(op, cpu, args);
  }

  void on_read_lock(std::size_t cpu) override { w_.monitor_.read_lock(cpu); }
  void on_read_unlock(std::size_t cpu) override { w_.monitor_.read_unlock(cpu); }
  int reader_depth(std::size_t cpu) const override { return w_.monitor_.depth(cpu); }
  void on_gp_start(std::uint64_t gp) override { w_.monitor_.gp_start(gp); }
  void on_gp_end(std::uint64_t gp) override { w_.monitor_.gp_end(gp); }
  void on_gp_state(GpState from, GpState to) override { w_.monitor_.gp_state(from, to); }
  void on_qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp) override {
    w_.monitor_.qs_bit_cleared(node, bit, gp);
  }
  void on_callback_invoked(std::size_t, const Callback& cb) override {
    if (cb.func == CallbackFunc::kWakemeAfterRcu) w_.monitor_.wakeme_invoked();
  }
  void on_diagnostic(std::string message) override {
    w_.emit("diagnostic", 0, {});
    w_.monitor_.diagnostic(std::move(message));
  }

 private:
  SimWorld& w_;
};

SimWorld::SimWorld(WorldConfig config)
    : config_(std::move(config)),
      u_(init_universe(compute_geometry(config_.cpus, config_.leaf_fanout, config_.interior_fanout),
                       config_.blimit)),
      cpu_holder_(config_.cpus, -1),
      irq_depth_(config_.cpus, 0),
      softirq_(config_.cpus),
      ticks_left_(config_.cpus, config_.ticks_per_cpu),
      ctx_left_(config_.cpus, config_.ctx_switches_per_cpu),
      pending_ticks_(config_.cpus, 0),
      lock_holder_(u_.nodes.size() + kProgramLocks, -1),
      litmus_(config_.litmus_cells, 0),
      buffers_(config_.cpus),
      monitor_(config_.cpus, u_.nodes.size()) {}

std::size_t SimWorld::add_thread(std::string name, std::size_t cpu, Program program) {
  if (cpu >= config_.cpus) throw ConfigError("thread placed on nonexistent cpu " + std::to_string(cpu));
  for (const Instr& i : program) {
    if (i.op == Op::kSyncEntry && i.target > program.size()) {
      throw ConfigError("sync_entry target beyond program end");
    }
    if ((i.op == Op::kLock || i.op == Op::kUnlock) && i.lock >= kProgramLocks) {
      throw ConfigError("program lock id out of range");
    }
  }
  threads_.push_back(VThread{.name = std::move(name),
                             .cpu = cpu,
                             .program = std::make_shared<const Program>(std::move(program))});
  return threads_.size() - 1;
}

void SimWorld::boot_grace_period(std::size_t cpu) {
  WorldEnv env(*this);
  RcuContext ctx{u_, env, config_.faults, config_.rcu};
  request_gp(ctx, cpu);
  gp_init(ctx, cpu);
}

int SimWorld::memory(CellId cell) const {
  switch (cell.kind) {
    case CellId::Kind::kLitmus: return litmus_.at(cell.index);
    case CellId::Kind::kWaitFlag: return wait_flag_;
    case CellId::Kind::kPassedQuiesce: return u_.data.at(cell.index).passed_quiesce ? 1 : 0;
    case CellId::Kind::kQsPending: return u_.data.at(cell.index).qs_pending ? 1 : 0;
  }
  return 0;
}

void SimWorld::write_memory(CellId cell, int value) {
  switch (cell.kind) {
    case CellId::Kind::kLitmus: litmus_.at(cell.index) = value; break;
    case CellId::Kind::kWaitFlag: wait_flag_ = value; break;
    case CellId::Kind::kPassedQuiesce: u_.data.at(cell.index).passed_quiesce = value != 0; break;
    case CellId::Kind::kQsPending: u_.data.at(cell.index).qs_pending = value != 0; break;
  }
}

int SimWorld::view(std::size_t cpu, CellId cell) const {
  const auto& buf = buffers_[cpu];
  for (auto it = buf.rbegin(); it != buf.rend(); ++it) {
    if (it->first == cell) return it->second;
  }
  return memory(cell);
}

void SimWorld::flush_all(std::size_t cpu) {
  for (const auto& [cell, value] : buffers_[cpu]) write_memory(cell, value);
  buffers_[cpu].clear();
}

void SimWorld::flush_one(std::size_t cpu, bool per_cell, CellId cell) {
  auto& buf = buffers_[cpu];
  auto it = per_cell ? std::find_if(buf.begin(), buf.end(), [&](const auto& e) { return e.first == cell; })
                     : buf.begin();
  if (it == buf.end()) throw ModelError("flush of an empty store buffer");
  write_memory(it->first, it->second);
  emit("flush", cpu, {{"value", it->second}});
  buf.erase(it);
}

void SimWorld::emit(std::string_view op, std::size_t cpu, std::initializer_list<TraceArg> args) {
  if (trace_) trace_->record(steps_, cpu, op, args, u_.state.gpnum, u_.state.completed);
}

bool SimWorld::all_threads_done() const {
  return std::all_of(threads_.begin(), threads_.end(), [](const VThread& t) { return t.done(); });
}

bool SimWorld::gp_completed() const {
  if (config_.rcu.cleanup_wakes_waiter) return monitor_.grace_periods_ended() > 0;
  return monitor_.wakeups() > 0;
}

bool SimWorld::sleeping(std::size_t cpu) const {
  const int holder = cpu_holder_[cpu];
  if (holder < 0) return true;
  const VThread& t = threads_[holder];
  return !t.done() && t.current().op == Op::kSyncWait && view(cpu, CellId::wait_flag()) != 0;
}

bool SimWorld::thread_enabled(std::size_t tid) const {
  const VThread& t = threads_[tid];
  if (t.done() || softirq_[t.cpu].running()) return false;
  const Instr& i = t.current();
  switch (i.op) {
    case Op::kAcquireCpu: return cpu_holder_[t.cpu] < 0;
    case Op::kLock: return lock_holder_[u_.nodes.size() + i.lock] < 0;
    case Op::kSyncWait: return view(t.cpu, CellId::wait_flag()) == 0;
    default: return true;
  }
}

std::vector<Choice> SimWorld::enabled() const {
  std::vector<Choice> out;
  for (std::size_t t = 0; t < threads_.size(); ++t) {
    if (thread_enabled(t)) out.push_back({.kind = Choice::Kind::kThread, .who = static_cast<std::uint16_t>(t)});
  }
  const auto ncpu = static_cast<std::uint16_t>(config_.cpus);
  for (std::uint16_t c = 0; c < ncpu; ++c) {
    if (softirq_[c].running()) out.push_back({.kind = Choice::Kind::kSoftirq, .who = c});
  }
  for (std::uint16_t c = 0; c < ncpu; ++c) {
    const auto& buf = buffers_[c];
    if (buf.empty()) continue;
    if (config_.memory_model == MemoryModel::kTSO) {
      out.push_back({.kind = Choice::Kind::kFlush, .who = c});
      continue;
    }
    std::vector<CellId> seen;
    for (const auto& [cell, v] : buf) {
      if (std::find(seen.begin(), seen.end(), cell) != seen.end()) continue;
      seen.push_back(cell);
      out.push_back({.kind = Choice::Kind::kFlush, .who = c, .per_cell = true, .cell = cell});
    }
  }
  for (std::uint16_t c = 0; c < ncpu; ++c) {
    if (ticks_left_[c] > 0 && !softirq_[c].running() && irq_depth_[c] == 0) {
      out.push_back({.kind = Choice::Kind::kTick, .who = c});
    }
  }
  for (std::uint16_t c = 0; c < ncpu; ++c) {
    if (ctx_left_[c] > 0 && !softirq_[c].running() && monitor_.depth(c) == 0) {
      out.push_back({.kind = Choice::Kind::kCtxSwitch, .who = c});
    }
  }
  return out;
}

void SimWorld::step(const Choice& choice) {
  ++steps_;
  switch (choice.kind) {
    case Choice::Kind::kThread:
      if (choice.who >= threads_.size() || !thread_enabled(choice.who)) {
        throw ModelError("thread " + std::to_string(choice.who) + " is not runnable");
      }
      exec_thread(choice.who);
      return;
    case Choice::Kind::kSoftirq: {
      const std::size_t cpu = choice.who;
      if (cpu >= config_.cpus || !softirq_[cpu].running()) throw ModelError("no softirq pass on cpu");
      WorldEnv env(*this);
      RcuContext ctx{u_, env, config_.faults, config_.rcu};
      if (!step_process_callbacks(ctx, cpu, softirq_[cpu])) finish_softirq(cpu);
      return;
    }
    case Choice::Kind::kTick:
      if (choice.who >= config_.cpus || ticks_left_[choice.who] == 0) throw ModelError("tick budget spent");
      --ticks_left_[choice.who];
      inject_tick(choice.who);
      return;
    case Choice::Kind::kCtxSwitch: {
      const std::size_t cpu = choice.who;
      if (cpu >= config_.cpus || ctx_left_[cpu] == 0) throw ModelError("context-switch budget spent");
      --ctx_left_[cpu];
      WorldEnv env(*this);
      RcuContext ctx{u_, env, config_.faults, config_.rcu};
      note_context_switch(ctx, cpu);
      return;
    }
    case Choice::Kind::kFlush:
      if (choice.who >= config_.cpus) throw ModelError("flush on nonexistent cpu");
      flush_one(choice.who, choice.per_cell, choice.cell);
      return;
  }
}

void SimWorld::exec_thread(std::size_t tid) {
  VThread& t = threads_[tid];
  const Instr& i = t.current();
  const std::size_t cpu = t.cpu;
  WorldEnv env(*this);
  RcuContext ctx{u_, env, config_.faults, config_.rcu};
  std::size_t next = t.pc + 1;
  switch (i.op) {
    case Op::kNop:
      break;
    case Op::kLoad:
      t.regs.at(i.reg) = env.load(cpu, i.cell);
      emit("load", cpu, {{"thread", static_cast<std::int64_t>(tid)}, {"value", t.regs[i.reg]}});
      break;
    case Op::kStore:
      env.store(cpu, i.cell, i.value);
      emit("store", cpu, {{"thread", static_cast<std::int64_t>(tid)}, {"value", i.value}});
      break;
    case Op::kFence:
      env.fence(cpu);
      break;
    case Op::kLock: {
      const std::size_t id = u_.nodes.size() + i.lock;
      flush_all(cpu);
      lock_holder_[id] = static_cast<int>(cpu);
      emit("program_lock", cpu, {{"lock", i.lock}});
      break;
    }
    case Op::kUnlock: {
      const std::size_t id = u_.nodes.size() + i.lock;
      if (lock_holder_[id] != static_cast<int>(cpu)) throw ModelError("unlock of a lock not held");
      flush_all(cpu);
      lock_holder_[id] = -1;
      emit("program_unlock", cpu, {{"lock", i.lock}});
      break;
    }
    case Op::kAcquireCpu:
      cpu_holder_[cpu] = static_cast<int>(tid);
      emit("acquire_cpu", cpu, {{"thread", static_cast<std::int64_t>(tid)}});
      break;
    case Op::kReleaseCpu:
      if (cpu_holder_[cpu] != static_cast<int>(tid)) throw ModelError("release of a cpu not held");
      cpu_holder_[cpu] = -1;
      emit("release_cpu", cpu, {{"thread", static_cast<std::int64_t>(tid)}});
      break;
    case Op::kReadLock:
      read_lock(ctx, cpu);
      break;
    case Op::kReadUnlock:
      read_unlock(ctx, cpu);
      break;
    case Op::kSyncEntry:
      if (!sync::entry(ctx, cpu)) next = i.target;
      break;
    case Op::kSyncArm:
      sync::arm_wait_flag(ctx, cpu);
      break;
    case Op::kSyncEnqueue:
      sync::enqueue_and_request(ctx, cpu, tid + 1);
      break;
    case Op::kSyncWait:
      emit("sync_wait_done", cpu);
      break;
    case Op::kContextSwitch:
      sync::yield(ctx, cpu);
      start_softirq(cpu);
      break;
  }
  t.pc = next;
}

void SimWorld::inject_tick(std::size_t cpu) {
  if (irq_depth_[cpu] > 0 || softirq_[cpu].running()) {
    ++pending_ticks_[cpu];
    emit("tick_deferred", cpu);
    return;
  }
  run_tick(cpu);
}

void SimWorld::run_tick(std::size_t cpu) {
  WorldEnv env(*this);
  RcuContext ctx{u_, env, config_.faults, config_.rcu};
  emit("tick", cpu);
  if (monitor_.depth(cpu) == 0 && sleeping(cpu)) record_qs(ctx, cpu);
  start_softirq(cpu);
}

void SimWorld::start_softirq(std::size_t cpu) {
  softirq_[cpu] = begin_process_callbacks();
  emit("rcu_process_callbacks", cpu);
}

void SimWorld::finish_softirq(std::size_t cpu) {
  if (pending_ticks_[cpu] > 0 && irq_depth_[cpu] == 0) {
    --pending_ticks_[cpu];
    run_tick(cpu);
  }
}

void SimWorld::irq_save(std::size_t cpu) { ++irq_depth_.at(cpu); }

void SimWorld::irq_restore(std::size_t cpu) {
  if (irq_depth_.at(cpu) == 0) throw ModelError("unbalanced irq restore");
  if (--irq_depth_[cpu] == 0 && pending_ticks_[cpu] > 0 && !softirq_[cpu].running()) {
    --pending_ticks_[cpu];
    run_tick(cpu);
  }
}

void SimWorld::check() const {
  check_universe(u_);
  for (std::size_t c = 0; c < config_.cpus; ++c) {
    if (irq_depth_[c] < 0) throw InvariantViolation("negative irq depth");
    const int h = cpu_holder_[c];
    if (h >= 0 && (static_cast<std::size_t>(h) >= threads_.size() || threads_[h].cpu != c)) {
      throw InvariantViolation("cpu token held by a foreign thread");
    }
  }
  for (std::size_t l = 0; l < u_.nodes.size(); ++l) {
    if (lock_holder_[l] >= 0) throw InvariantViolation("rcu_node lock held between steps");
  }
}

namespace {

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_callbacks(std::string& out, const SegmentedCallbackList& l) {
  put(out, static_cast<std::uint32_t>(l.qlen()));
  for (const Callback& cb : l.entries()) {
    put(out, cb.id);
    put(out, static_cast<std::uint8_t>(cb.func));
    put(out, cb.assigned_gp.value_or(~std::uint64_t{0}));
  }
  put(out, static_cast<std::uint32_t>(l.done_end()));
  put(out, static_cast<std::uint32_t>(l.wait_end()));
  put(out, static_cast<std::uint32_t>(l.next_ready_end()));
  put(out, l.last_advanced().value_or(~std::uint64_t{0}));
}

}  // namespace

std::string SimWorld::state_key() const {
  std::string out;
  out.reserve(256);
  put(out, steps_);
  put(out, u_.state.gpnum);
  put(out, u_.state.completed);
  put(out, static_cast<std::uint8_t>(u_.state.gp_flags));
  put(out, static_cast<std::uint8_t>(u_.state.gp_state));
  for (const RcuNode& n : u_.nodes) {
    put(out, n.qsmask.raw());
    put(out, n.gpnum);
    put(out, n.completed);
  }
  for (const RcuData& d : u_.data) {
    put(out, static_cast<std::uint8_t>(d.qs_pending | (d.passed_quiesce << 1)));
    put(out, d.gpnum);
    put(out, d.completed);
    put_callbacks(out, d.callbacks);
  }
  for (const VThread& t : threads_) {
    put(out, static_cast<std::uint16_t>(t.pc));
    for (int r : t.regs) put(out, r);
  }
  for (std::size_t c = 0; c < config_.cpus; ++c) {
    put(out, cpu_holder_[c]);
    put(out, static_cast<std::uint8_t>(softirq_[c].phase));
    const RnpWalk& w = softirq_[c].walk;
    put(out, static_cast<std::uint16_t>(w.node));
    put(out, w.mask.raw());
    put(out, w.gp_at_entry);
    put(out, static_cast<std::uint8_t>(w.active));
    put(out, ticks_left_[c]);
    put(out, ctx_left_[c]);
    put(out, pending_ticks_[c]);
    put(out, static_cast<std::uint32_t>(buffers_[c].size()));
    for (const auto& [cell, v] : buffers_[c]) {
      put(out, static_cast<std::uint8_t>(cell.kind));
      put(out, cell.index);
      put(out, v);
    }
  }
  for (int h : lock_holder_) put(out, static_cast<std::int8_t>(h));
  for (int v : litmus_) put(out, v);
  put(out, wait_flag_);
  monitor_.encode(out);
  return out;
}

}  // namespace rcusim
