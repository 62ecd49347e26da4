#pragma once

// Sequentially consistent Env for driving the RCU core by hand in unit tests.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcusim/env.hpp"
#include "rcusim/monitor.hpp"

namespace rcusim::testing {

class DirectEnv final : public Env {
 public:
  explicit DirectEnv(RcuUniverse& u) : u_(u), monitor_(u.data.size(), u.nodes.size()) {}

  void spin_acquire(std::size_t cpu, std::size_t lock) override {
    auto [it, fresh] = holders_.emplace(lock, cpu);
    if (!fresh) throw std::logic_error("lock " + std::to_string(lock) + " already held");
    (void)it;
  }
  void spin_release(std::size_t cpu, std::size_t lock) override {
    auto it = holders_.find(lock);
    if (it == holders_.end() || it->second != cpu) throw std::logic_error("release by non-holder");
    holders_.erase(it);
  }

  int load(std::size_t, CellId cell) override {
    switch (cell.kind) {
      case CellId::Kind::kPassedQuiesce: return u_.data[cell.index].passed_quiesce ? 1 : 0;
      case CellId::Kind::kQsPending: return u_.data[cell.index].qs_pending ? 1 : 0;
      case CellId::Kind::kWaitFlag: return wait_flag;
      case CellId::Kind::kLitmus: return litmus[cell.index];
    }
    return 0;
  }
  void store(std::size_t, CellId cell, int value) override {
    switch (cell.kind) {
      case CellId::Kind::kPassedQuiesce: u_.data[cell.index].passed_quiesce = value != 0; break;
      case CellId::Kind::kQsPending: u_.data[cell.index].qs_pending = value != 0; break;
      case CellId::Kind::kWaitFlag: wait_flag = value; break;
      case CellId::Kind::kLitmus: litmus[cell.index] = value; break;
    }
  }
  void fence(std::size_t) override { ++fences; }

  bool tracing() const override { return true; }
  void trace(std::string_view op, std::size_t, std::initializer_list<TraceArg>) override {
    ops.emplace_back(op);
  }

  void on_read_lock(std::size_t cpu) override { monitor_.read_lock(cpu); }
  void on_read_unlock(std::size_t cpu) override { monitor_.read_unlock(cpu); }
  int reader_depth(std::size_t cpu) const override { return monitor_.depth(cpu); }
  void on_gp_start(std::uint64_t gp) override { monitor_.gp_start(gp); }
  void on_gp_end(std::uint64_t gp) override { monitor_.gp_end(gp); }
  void on_gp_state(GpState from, GpState to) override { monitor_.gp_state(from, to); }
  void on_qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp) override {
    monitor_.qs_bit_cleared(node, bit, gp);
  }
  void on_callback_invoked(std::size_t, const Callback& cb) override {
    invoked.push_back(cb.id);
    if (cb.func == CallbackFunc::kWakemeAfterRcu) monitor_.wakeme_invoked();
  }
  void on_diagnostic(std::string message) override { monitor_.diagnostic(std::move(message)); }

  bool locks_free() const { return holders_.empty(); }
  bool saw(std::string_view op) const {
    for (const auto& o : ops) {
      if (o == op) return true;
    }
    return false;
  }
  const SafetyMonitor& monitor() const { return monitor_; }

  int wait_flag = 0;
  std::map<std::size_t, int> litmus;
  int fences = 0;
  std::vector<std::string> ops;
  std::vector<std::uint64_t> invoked;

 private:
  RcuUniverse& u_;
  SafetyMonitor monitor_;
  std::map<std::size_t, std::size_t> holders_;
};

/// Bundles a universe, env and context for one test.
struct Bench {
  explicit Bench(std::size_t cpus, FaultVariant v = FaultVariant::kNone, RcuConfig cfg = {})
      : Bench(compute_geometry(cpus), v, cfg) {}
  Bench(const TreeGeometry& geom, FaultVariant v, RcuConfig cfg = {})
      : u(init_universe(geom)), env(u), plan(v), config(cfg) {}
  RcuUniverse u;
  DirectEnv env;
  FaultPlan plan;
  RcuConfig config;
  RcuContext ctx() { return RcuContext{u, env, plan, config}; }
};

}  // namespace rcusim::testing
