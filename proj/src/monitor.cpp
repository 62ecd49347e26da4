#include "rcusim/monitor.hpp"

#include <algorithm>
#include <utility>

namespace rcusim {

namespace {

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

SafetyMonitor::SafetyMonitor(std::size_t cpus, std::size_t nodes)
    : depth_(cpus, 0), blocker_(cpus, false), cleared_(nodes, 0) {}

void SafetyMonitor::read_lock(std::size_t cpu) { ++depth_[cpu]; }

bool SafetyMonitor::read_unlock(std::size_t cpu) {
  if (depth_[cpu] == 0) {
    diagnostic("unbalanced rcu_read_unlock on cpu " + std::to_string(cpu));
    return false;
  }
  if (--depth_[cpu] == 0) blocker_[cpu] = false;
  return true;
}

void SafetyMonitor::gp_start(std::uint64_t gp) {
  if (gp != last_start_ + 1 || last_end_ != last_start_) ++bad_counters_;
  last_start_ = gp;
  for (std::size_t c = 0; c < depth_.size(); ++c) blocker_[c] = depth_[c] > 0;
  std::fill(cleared_.begin(), cleared_.end(), 0);
}

void SafetyMonitor::gp_end(std::uint64_t gp) {
  if (gp != last_start_ || gp <= last_end_) ++bad_counters_;
  last_end_ = gp;
  for (std::size_t c = 0; c < blocker_.size(); ++c) {
    if (blocker_[c]) {
      ++breaches_;
      blocker_[c] = false;
    }
  }
}

bool SafetyMonitor::legal_arc(GpState from, GpState to) {
  switch (from) {
    case GpState::kWaitGps: return to == GpState::kInit;
    case GpState::kInit: return to == GpState::kWaitQs;
    case GpState::kWaitQs: return to == GpState::kCleanup;
    case GpState::kCleanup: return to == GpState::kCleaned;
    case GpState::kCleaned: return to == GpState::kWaitGps || to == GpState::kInit;
  }
  return false;
}

void SafetyMonitor::gp_state(GpState from, GpState to) {
  if (!legal_arc(from, to)) ++bad_arcs_;
}

void SafetyMonitor::qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp) {
  if (gp != last_start_) ++clear_once_;
  const std::uint64_t m = std::uint64_t{1} << bit;
  if (cleared_[node] & m) ++clear_once_;
  cleared_[node] |= m;
}

void SafetyMonitor::diagnostic(std::string message) {
  if (diagnostics_++ == 0) first_diagnostic_ = std::move(message);
}

void SafetyMonitor::encode(std::string& out) const {
  for (int d : depth_) put(out, static_cast<std::int8_t>(d));
  for (bool b : blocker_) put(out, static_cast<std::uint8_t>(b));
  for (auto c : cleared_) put(out, c);
  for (auto v : {last_start_, last_end_, breaches_, clear_once_, bad_arcs_, bad_counters_,
                 diagnostics_, wakeups_}) {
    put(out, v);
  }
}

}  // namespace rcusim
