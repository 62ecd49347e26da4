#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rcusim/state.hpp"

namespace rcusim {

/// Ghost bookkeeping shared by every execution mode. It never influences the
/// modeled code; it only counts breaches of the properties being checked.
class SafetyMonitor {
 public:
  SafetyMonitor() = default;
  SafetyMonitor(std::size_t cpus, std::size_t nodes);

  void read_lock(std::size_t cpu);
  /// Returns false (and records a diagnostic) on an unbalanced unlock.
  bool read_unlock(std::size_t cpu);
  int depth(std::size_t cpu) const { return depth_[cpu]; }

  /// Snapshots the CPUs whose sections predate grace period gp.
  void gp_start(std::uint64_t gp);
  /// Any snapshotted section still open is a pre-existing-reader breach.
  void gp_end(std::uint64_t gp);
  void gp_state(GpState from, GpState to);
  void qs_bit_cleared(std::size_t node, std::size_t bit, std::uint64_t gp);
  void wakeme_invoked() { ++wakeups_; }
  void diagnostic(std::string message);

  std::uint64_t breaches() const { return breaches_; }
  std::uint64_t clear_once_violations() const { return clear_once_; }
  std::uint64_t arc_violations() const { return bad_arcs_; }
  std::uint64_t counter_violations() const { return bad_counters_; }
  std::uint64_t diagnostics() const { return diagnostics_; }
  const std::string& first_diagnostic() const { return first_diagnostic_; }
  std::uint64_t grace_periods_started() const { return last_start_; }
  std::uint64_t grace_periods_ended() const { return last_end_; }
  std::uint64_t wakeups() const { return wakeups_; }

  /// True when any safety or structural counter is nonzero.
  bool violated() const { return breaches_ + clear_once_ + bad_arcs_ + bad_counters_ > 0; }

  /// Appends a canonical byte encoding (first_diagnostic excluded).
  void encode(std::string& out) const;

  static bool legal_arc(GpState from, GpState to);

  bool operator==(const SafetyMonitor&) const = default;

 private:
  std::vector<int> depth_;
  std::vector<bool> blocker_;
  std::vector<std::uint64_t> cleared_;  // per node, bits cleared in the current GP
  std::uint64_t last_start_ = 0;
  std::uint64_t last_end_ = 0;
  std::uint64_t breaches_ = 0;
  std::uint64_t clear_once_ = 0;
  std::uint64_t bad_arcs_ = 0;
  std::uint64_t bad_counters_ = 0;
  std::uint64_t diagnostics_ = 0;
  std::uint64_t wakeups_ = 0;
  std::string first_diagnostic_;
};

}  // namespace rcusim
