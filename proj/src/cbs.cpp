#include "rcusim/cbs.hpp"

#include <algorithm>
#include <string>

#include "rcusim/errors.hpp"

namespace rcusim {

std::string_view callback_func_name(CallbackFunc func) {
  switch (func) {
    case CallbackFunc::kWakemeAfterRcu: return "wakeme_after_rcu";
    case CallbackFunc::kUser: return "user";
  }
  return "?";
}

void SegmentedCallbackList::enqueue(Callback cb) {
  if (cb.assigned_gp) throw ModelError("callback " + std::to_string(cb.id) + " already assigned");
  auto dup = std::find_if(entries_.begin(), entries_.end(),
                          [&](const Callback& c) { return c.id == cb.id; });
  if (dup != entries_.end()) {
    throw ModelError("duplicate callback id " + std::to_string(cb.id));
  }
  entries_.push_back(cb);
}

void SegmentedCallbackList::accelerate(std::uint64_t gp_context) {
  for (std::size_t i = next_ready_end_; i < entries_.size(); ++i) {
    entries_[i].assigned_gp = gp_context + 1;
  }
  next_ready_end_ = entries_.size();
}

void SegmentedCallbackList::accelerate_bypass(std::uint64_t new_gp) {
  for (std::size_t i = wait_end_; i < entries_.size(); ++i) {
    if (!entries_[i].assigned_gp || *entries_[i].assigned_gp > new_gp) entries_[i].assigned_gp = new_gp;
  }
  wait_end_ = entries_.size();
  next_ready_end_ = entries_.size();
}

void SegmentedCallbackList::advance(std::uint64_t completed_now) {
  if (!last_advanced_ || completed_now > *last_advanced_) {
    done_end_ = wait_end_;
    wait_end_ = next_ready_end_;
    last_advanced_ = completed_now;
  }
  accelerate(completed_now);
}

std::vector<Callback> SegmentedCallbackList::take_done() {
  const std::size_t n = std::min(blimit_, done_end_);
  std::vector<Callback> out(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n));
  entries_.erase(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n));
  done_end_ -= n;
  wait_end_ -= n;
  next_ready_end_ -= n;
  return out;
}

Segment SegmentedCallbackList::segment_of(std::size_t position) const {
  if (position < done_end_) return Segment::kDone;
  if (position < wait_end_) return Segment::kWait;
  if (position < next_ready_end_) return Segment::kNextReady;
  return Segment::kNext;
}

void SegmentedCallbackList::check_invariants() const {
  if (!(done_end_ <= wait_end_ && wait_end_ <= next_ready_end_ &&
        next_ready_end_ <= entries_.size())) {
    throw InvariantViolation("callback segment boundaries out of order: " +
                             std::to_string(done_end_) + "," + std::to_string(wait_end_) + "," +
                             std::to_string(next_ready_end_) + "," +
                             std::to_string(entries_.size()));
  }
}

bool SegmentedCallbackList::needs_grace_period_after(std::uint64_t completed_now) const {
  for (std::size_t i = done_end_; i < entries_.size(); ++i) {
    const auto& gp = entries_[i].assigned_gp;
    if (!gp || *gp > completed_now) return true;
  }
  return false;
}

}  // namespace rcusim
