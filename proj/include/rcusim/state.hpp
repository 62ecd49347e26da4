#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcusim/cbs.hpp"
#include "rcusim/geometry.hpp"

namespace rcusim {

/// Set of child ordinals (0..63) of an rcu_node: qsmask / qsmaskinit.
class ChildSet {
 public:
  constexpr ChildSet() = default;
  static constexpr ChildSet of(std::initializer_list<std::size_t> ordinals) {
    ChildSet s;
    for (auto o : ordinals) s.insert(o);
    return s;
  }
  static constexpr ChildSet first_n(std::size_t n) {
    ChildSet s;
    s.bits_ = n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    return s;
  }

  constexpr bool contains(std::size_t ordinal) const { return (bits_ >> ordinal) & 1u; }
  constexpr void insert(std::size_t ordinal) { bits_ |= std::uint64_t{1} << ordinal; }
  constexpr void erase(std::size_t ordinal) { bits_ &= ~(std::uint64_t{1} << ordinal); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool subset_of(ChildSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr std::uint64_t raw() const { return bits_; }
  std::vector<std::size_t> ordinals() const;

  constexpr bool operator==(const ChildSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

enum class GpFlags : std::uint8_t { kNone, kInit };
enum class GpState : std::uint8_t { kWaitGps, kInit, kWaitQs, kCleanup, kCleaned };

std::string_view gp_state_name(GpState s);

/// rcu_state: the global grace-period counters of the single RCU-sched flavor.
struct RcuState {
  std::uint64_t gpnum = 0;      // most recently started grace period
  std::uint64_t completed = 0;  // most recently ended grace period
  GpFlags gp_flags = GpFlags::kNone;
  GpState gp_state = GpState::kWaitGps;

  bool operator==(const RcuState&) const = default;
};

/// rcu_node: one combining-tree node. lock_id names its simulated spinlock.
struct RcuNode {
  std::size_t index = 0;
  std::optional<std::size_t> parent;
  std::size_t level = 0;
  std::size_t grpmask_bit = 0;
  std::size_t grplo = 0;
  std::size_t grphi = 0;
  ChildSet qsmask;
  ChildSet qsmaskinit;
  std::uint64_t gpnum = 0;
  std::uint64_t completed = 0;
  std::size_t lock_id = 0;

  bool operator==(const RcuNode&) const = default;
};

/// rcu_data: per-CPU quiescent-state detection and callback queue.
struct RcuData {
  std::size_t cpu = 0;
  std::size_t mynode = 0;
  std::size_t grpmask_bit = 0;
  bool qs_pending = false;
  bool passed_quiesce = false;
  std::uint64_t gpnum = 0;
  std::uint64_t completed = 0;
  SegmentedCallbackList callbacks;

  bool operator==(const RcuData&) const = default;
};

struct RcuUniverse {
  TreeGeometry geometry;
  RcuState state;
  std::vector<RcuNode> nodes;  // breadth-first
  std::vector<RcuData> data;   // indexed by CPU id

  RcuNode& root() { return nodes.front(); }
  const RcuNode& root() const { return nodes.front(); }
  RcuNode& leaf_of(std::size_t cpu) { return nodes[data[cpu].mynode]; }
  const RcuNode& leaf_of(std::size_t cpu) const { return nodes[data[cpu].mynode]; }

  bool operator==(const RcuUniverse&) const = default;
};

/// Boot-time initialization (rcu_init_one + per-CPU setup): idle, empty masks,
/// qsmaskinit covering every present child, empty callback lists.
RcuUniverse init_universe(const TreeGeometry& geom,
                          std::size_t blimit = SegmentedCallbackList::kDefaultBlimit);

/// True iff gpnum == completed. Throws InvariantViolation for any combination
/// other than equal or gpnum one ahead.
bool is_idle(const RcuState& state);

/// Audits the structural invariants: counter lag chain state >= node >= data
/// (each gap at most one), qsmask within qsmaskinit, array sizes, callback
/// segment ordering. Throws InvariantViolation on the first breach.
void check_universe(const RcuUniverse& u);

/// Structured snapshot using the kernel field names (gpnum, completed, qsmask,
/// qsmaskinit, qs_pending, passed_quiesce, nxttail boundaries, qlen).
std::string snapshot_json(const RcuUniverse& u);

}  // namespace rcusim
