#include "rcusim/native.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include <omp.h>

#include "rcusim/api.hpp"
#include "rcusim/errors.hpp"
#include "rcusim/gp.hpp"
#include "rcusim/qs.hpp"

namespace rcusim {

namespace {

using Clock = std::chrono::steady_clock;

/// Shared state of one native run.
struct NativeShared {
  explicit NativeShared(const TreeGeometry& g, std::size_t cpus)
      : u(init_universe(g)), locks(u.nodes.size()), monitor(cpus, u.nodes.size()) {}

  RcuUniverse u;
  std::vector<std::mutex> locks;
  std::atomic<int> litmus[2] = {0, 0};
  std::atomic<int> wait_flag{0};
  std::mutex monitor_mu;
  SafetyMonitor monitor;
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> finished{0};
};

class NativeEnv final : public Env {
 public:
  explicit NativeEnv(NativeShared& sh) : sh_(sh) {}

  void spin_acquire(std::size_t, std::size_t lock) override { sh_.locks[lock].lock(); }
  void spin_release(std::size_t, std::size_t lock) override { sh_.locks[lock].unlock(); }

  int load(std::size_t, CellId cell) override {
    switch (cell.kind) {
      case CellId::Kind::kLitmus: return sh_.litmus[cell.index].load();
      case CellId::Kind::kWaitFlag: return sh_.wait_flag.load();
      case CellId::Kind::kPassedQuiesce:
        return std::atomic_ref<bool>(sh_.u.data[cell.index].passed_quiesce).load() ? 1 : 0;
      case CellId::Kind::kQsPending:
        return std::atomic_ref<bool>(sh_.u.data[cell.index].qs_pending).load() ? 1 : 0;
    }
    return 0;
  }

  void store(std::size_t, CellId cell, int value) override {
    switch (cell.kind) {
      case CellId::Kind::kLitmus: sh_.litmus[cell.index].store(value); break;
      case CellId::Kind::kWaitFlag: sh_.wait_flag.store(value); break;
      case CellId::Kind::kPassedQuiesce:
        std::atomic_ref<bool>(sh_.u.data[cell.index].passed_quiesce).store(value != 0);
        break;
      case CellId::Kind::kQsPending:
        std::atomic_ref<bool>(sh_.u.data[cell.index].qs_pending).store(value != 0);
        break;
    }
  }

  void fence(std::size_t) override { std::atomic_thread_fence(std::memory_order_seq_cst); }

  bool tracing() const override { return false; }
  void trace(std::string_view, std::size_t, std::initializer_list<TraceArg>) override {}

  void on_read_lock(std::size_t cpu) override { with_monitor([&](auto& m) { m.read_lock(cpu); }); }
  void on_read_unlock(std::size_t cpu) override { with_monitor([&](auto& m) { m.read_unlock(cpu); }); }
  int reader_depth(std::size_t cpu) const override {
    std::lock_guard g(sh_.monitor_mu);
    return sh_.monitor.depth(cpu);
  }
  void on_gp_start(std::uint64_t gp) override { with_monitor([&](auto& m) { m.gp_start(gp); }); }
  void on_gp_end(std::uint64_t gp) override { with_monitor([&](auto& m) { m.gp_end(gp); }); }
  void on_gp_state(GpState from, GpState to) override {
    with_monitor([&](auto& m) { m.gp_state(from, to); });
  }
  void on_qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp) override {
    with_monitor([&](auto& m) { m.qs_bit_cleared(node, bit, gp); });
  }
  void on_callback_invoked(std::size_t, const Callback& cb) override {
    if (cb.func == CallbackFunc::kWakemeAfterRcu) with_monitor([](auto& m) { m.wakeme_invoked(); });
  }
  void on_diagnostic(std::string message) override {
    with_monitor([&](auto& m) { m.diagnostic(std::move(message)); });
  }

 private:
  template <class F>
  void with_monitor(F&& f) {
    std::lock_guard g(sh_.monitor_mu);
    f(sh_.monitor);
  }

  NativeShared& sh_;
};

/// One modeled CPU: runs its threads' programs in order and takes a tick
/// every period, including while a reader is delayed inside its section.
class CpuWorker {
 public:
  CpuWorker(NativeShared& sh, const Scenario& s, std::size_t cpu, std::vector<VThread*> threads,
            std::uint64_t run_index)
      : sh_(sh),
        env_(sh),
        faults_(s.fault),
        ctx_{sh.u, env_, faults_, config_},
        cpu_(cpu),
        threads_(std::move(threads)),
        max_delay_(s.native_max_delay_us),
        period_(std::chrono::microseconds(std::max<std::uint32_t>(s.native_tick_us, 50))) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(run_index), static_cast<std::uint32_t>(cpu)};
    rng_.seed(seq);
  }

  void operator()() {
    next_tick_ = Clock::now() + period_;
    for (VThread* t : threads_) {
      if (!run_thread(*t)) return;
    }
    idle_ = true;
    sh_.finished.fetch_add(1);
    while (pause(period_)) {
    }
  }

 private:
  bool run_thread(VThread& t) {
    idle_ = false;
    const bool reader = t.name.starts_with("reader");
    while (!t.done()) {
      const bool delay_here = reader ? t.pc <= 3 : t.pc == 0;
      if (delay_here && max_delay_ > 0) {
        std::uniform_int_distribution<std::uint32_t> d(0, max_delay_);
        if (!pause(std::chrono::microseconds(d(rng_)))) return false;
      }
      const Instr& i = t.current();
      std::size_t next = t.pc + 1;
      switch (i.op) {
        case Op::kLoad: t.regs.at(i.reg) = env_.load(cpu_, i.cell); break;
        case Op::kStore: env_.store(cpu_, i.cell, i.value); break;
        case Op::kFence: env_.fence(cpu_); break;
        case Op::kReadLock: read_lock(ctx_, cpu_); break;
        case Op::kReadUnlock: read_unlock(ctx_, cpu_); break;
        case Op::kSyncEntry:
          if (!sync::entry(ctx_, cpu_)) next = i.target;
          break;
        case Op::kSyncArm: sync::arm_wait_flag(ctx_, cpu_); break;
        case Op::kSyncEnqueue: sync::enqueue_and_request(ctx_, cpu_, 1); break;
        case Op::kSyncWait:
          idle_ = true;
          while (!sync::wait_done(ctx_, cpu_)) {
            if (!pause(period_)) return false;
          }
          idle_ = false;
          break;
        case Op::kContextSwitch:
          sync::yield(ctx_, cpu_);
          process_callbacks(ctx_, cpu_);
          break;
        case Op::kNop:
        case Op::kAcquireCpu:
        case Op::kReleaseCpu:
          break;
        case Op::kLock:
        case Op::kUnlock:
          throw ConfigError("program-level locks are virtual-mode only");
      }
      t.pc = next;
    }
    return true;
  }

  /// Sleeps for d while serving ticks. False once the run is stopping.
  bool pause(Clock::duration d) {
    const auto until = Clock::now() + d;
    for (;;) {
      if (sh_.stop.load(std::memory_order_relaxed)) return false;
      auto now = Clock::now();
      if (now >= next_tick_) {
        tick();
        next_tick_ = now + period_;
      }
      if (now >= until) return true;
      std::this_thread::sleep_until(std::min(until, next_tick_));
    }
  }

  void tick() {
    if (idle_ && env_.reader_depth(cpu_) == 0) record_qs(ctx_, cpu_);
    process_callbacks(ctx_, cpu_);
  }

  NativeShared& sh_;
  NativeEnv env_;
  FaultPlan faults_;
  RcuConfig config_;
  RcuContext ctx_;
  std::size_t cpu_;
  std::vector<VThread*> threads_;
  std::uint32_t max_delay_;
  Clock::duration period_;
  Clock::time_point next_tick_;
  bool idle_ = true;
  std::mt19937_64 rng_;
};

}  // namespace

NativeRunResult run_native_once(const Scenario& s, std::uint64_t run_index,
                                std::uint64_t* ghost_breaches) {
  const SimWorld blueprint = build_world(s);
  std::vector<VThread> threads = blueprint.threads();
  const std::size_t cpus = blueprint.config().cpus;
  NativeShared sh(blueprint.universe().geometry, cpus);

  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(cpus);
  for (std::size_t c = 0; c < cpus; ++c) {
    std::vector<VThread*> mine;
    for (VThread& t : threads) {
      if (t.cpu == c) mine.push_back(&t);
    }
    workers.emplace_back([&, c, mine]() mutable {
      try {
        CpuWorker(sh, s, c, std::move(mine), run_index)();
      } catch (...) {
        errors[c] = std::current_exception();
        sh.finished.fetch_add(1);
      }
    });
  }

  const auto deadline = Clock::now() + std::chrono::milliseconds(s.timeout_ms);
  bool timed_out = false;
  while (sh.finished.load() < cpus) {
    if (Clock::now() >= deadline) {
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  sh.stop.store(true);
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (ghost_breaches) *ghost_breaches = sh.monitor.breaches();
  if (timed_out) return NativeRunResult::kTimeout;

  if (s.property == Property::kGpCompletes) {
    return sh.monitor.wakeups() > 0 ? NativeRunResult::kFailing : NativeRunResult::kSuccessful;
  }
  for (const VThread& t : threads) {
    if (t.name.starts_with("reader") && t.regs[kRegY] == 1 && t.regs[kRegX] == 0) {
      return NativeRunResult::kFailing;
    }
  }
  return NativeRunResult::kSuccessful;
}

NativeStats run_native(const Scenario& s) {
  NativeStats stats;
  const int width = static_cast<int>(std::clamp<std::uint64_t>(s.runs, 1, 256));
  std::mutex mu;
  std::exception_ptr error;
  const auto runs = static_cast<long long>(s.runs);

#pragma omp parallel for schedule(dynamic, 1) num_threads(width)
  for (long long r = 0; r < runs; ++r) {
    try {
      std::uint64_t breaches = 0;
      const NativeRunResult res = run_native_once(s, static_cast<std::uint64_t>(r), &breaches);
      std::lock_guard g(mu);
      stats.ghost_breaches += breaches;
      switch (res) {
        case NativeRunResult::kSuccessful: ++stats.successful; break;
        case NativeRunResult::kFailing: ++stats.failing; break;
        case NativeRunResult::kTimeout: ++stats.timeout; break;
      }
    } catch (...) {
      std::lock_guard g(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return stats;
}

}  // namespace rcusim
