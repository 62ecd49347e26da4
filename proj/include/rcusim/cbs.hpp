#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace rcusim {

enum class CallbackFunc : std::uint8_t {
  kWakemeAfterRcu,  // clears the waiting updater's wait flag
  kUser,            // named token, only its invocation order is recorded
};

std::string_view callback_func_name(CallbackFunc func);

/// rcu_head: a token queued for invocation after a grace period.
/// assigned_gp is ghost bookkeeping; the kernel derives it from segment position.
struct Callback {
  std::uint64_t id = 0;
  CallbackFunc func = CallbackFunc::kUser;
  std::optional<std::uint64_t> assigned_gp;

  bool operator==(const Callback&) const = default;
};

enum class Segment : std::uint8_t { kDone, kWait, kNextReady, kNext };

/// The four-segment callback queue of one CPU. One ordered list, split by
/// three boundary indices; the NEXT segment always runs to the end.
///
///   [0, done_end)              ready to invoke
///   [done_end, wait_end)       waiting for the current grace period
///   [wait_end, next_ready_end) waiting for the next grace period
///   [next_ready_end, size)     not yet associated with a grace period
class SegmentedCallbackList {
 public:
  static constexpr std::size_t kDefaultBlimit = 10;

  explicit SegmentedCallbackList(std::size_t blimit = kDefaultBlimit) : blimit_(blimit) {}

  /// Appends to the NEXT segment. Throws ModelError on a duplicate id or a
  /// callback that already carries a grace-period assignment.
  void enqueue(Callback cb);

  /// Merges NEXT into NEXT_READY; new entries wait for gp_context + 1.
  void accelerate(std::uint64_t gp_context);

  /// Merges NEXT_READY and NEXT straight into WAIT. Only valid on the CPU that
  /// is starting grace period new_gp, which the merged entries then wait for.
  void accelerate_bypass(std::uint64_t new_gp);

  /// Called when the CPU observes the end of grace period completed_now:
  /// WAIT joins DONE, NEXT_READY becomes WAIT, then NEXT is accelerated.
  /// A second call for the same completed value only accelerates.
  void advance(std::uint64_t completed_now);

  /// Removes and returns up to blimit callbacks from the DONE segment.
  std::vector<Callback> take_done();

  std::size_t qlen() const { return entries_.size(); }
  std::size_t blimit() const { return blimit_; }
  std::size_t done_end() const { return done_end_; }
  std::size_t wait_end() const { return wait_end_; }
  std::size_t next_ready_end() const { return next_ready_end_; }
  const std::vector<Callback>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::optional<std::uint64_t> last_advanced() const { return last_advanced_; }

  Segment segment_of(std::size_t position) const;
  /// Entries still owed a grace period (WAIT, NEXT_READY or NEXT).
  bool needs_grace_period() const { return done_end_ < entries_.size(); }
  /// Entries that require a grace period beyond the current one.
  bool needs_future_grace_period() const { return wait_end_ < entries_.size(); }
  /// Entries waiting for a grace period that has not completed by
  /// completed_now, or not yet assigned one.
  bool needs_grace_period_after(std::uint64_t completed_now) const;

  /// Throws InvariantViolation if the boundary ordering is broken.
  void check_invariants() const;

  bool operator==(const SegmentedCallbackList&) const = default;

 private:
  std::vector<Callback> entries_;
  std::size_t done_end_ = 0;
  std::size_t wait_end_ = 0;
  std::size_t next_ready_end_ = 0;
  std::size_t blimit_;
  std::optional<std::uint64_t> last_advanced_;
};

}  // namespace rcusim
