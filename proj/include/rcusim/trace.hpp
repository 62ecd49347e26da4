#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rcusim/env.hpp"

namespace rcusim {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = kFnvOffset);

/// Collects JSONL trace records, hashing every line and optionally writing it.
class TraceSink {
 public:
  explicit TraceSink(std::ostream* out = nullptr, bool keep_lines = false)
      : out_(out), keep_(keep_lines) {}

  void record(std::uint64_t step, std::size_t cpu, std::string_view op,
              std::initializer_list<TraceArg> args, std::uint64_t gpnum, std::uint64_t completed);

  std::uint64_t hash() const { return hash_; }
  std::size_t records() const { return records_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  std::ostream* out_;
  bool keep_;
  std::uint64_t hash_ = kFnvOffset;
  std::size_t records_ = 0;
  std::vector<std::string> lines_;
};

/// Findings of the trace post-processor.
struct AuditResult {
  std::size_t records = 0;
  std::size_t lock_acquires = 0;
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

/// Checks a JSONL trace: per CPU at most one rcu_node lock held at a time,
/// every release by the holder, and nondecreasing gpnum / completed. A trace
/// may hold several schedules back to back; a step number lower than the one
/// before starts the next.
AuditResult audit_trace(std::istream& in);

}  // namespace rcusim
