#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#ifndef RCUSIM_FAULT_HOOKS
#define RCUSIM_FAULT_HOOKS 1
#endif

namespace rcusim {

enum class FaultVariant : std::uint8_t { kNone, kBug1, kBug2, kBug3, kBug4, kBug5, kBug6, kBug7 };

enum class ExpectedClass : std::uint8_t { kSafe, kSafetyViolation, kLivenessHang };

/// The seven places where an injected bug changes behavior.
enum class HookPoint : std::uint8_t {
  kSynchronizeEntry,        // Bug 1: synchronize returns immediately
  kGpInitQsmask,            // Bug 2: qsmask := {} instead of qsmaskinit
  kNoteGpChangesClearMask,  // Bug 3: note_gp_changes clears this CPU's leaf bit
  kNoteGpChangesQsPending,  // Bug 4: qs_pending forced to 0
  kRecordQs,                // Bug 5: rcu_sched_qs is a no-op
  kReportQsRnpEntry,        // Bug 6: report_qs_rnp returns immediately
  kReportQsRnpStopCheck,    // Bug 7: nonempty-qsmask stop check removed
};

inline constexpr std::array<HookPoint, 7> kAllHookPoints = {
    HookPoint::kSynchronizeEntry,       HookPoint::kGpInitQsmask,
    HookPoint::kNoteGpChangesClearMask, HookPoint::kNoteGpChangesQsPending,
    HookPoint::kRecordQs,               HookPoint::kReportQsRnpEntry,
    HookPoint::kReportQsRnpStopCheck};

std::string_view hook_point_name(HookPoint hook);
/// Throws ConfigError for an unknown name.
HookPoint parse_hook_point(std::string_view name);

std::string_view fault_variant_name(FaultVariant v);
/// Accepts "none", "bug1" .. "bug7". Throws ConfigError otherwise.
FaultVariant parse_fault_variant(std::string_view name);

std::string_view expected_class_name(ExpectedClass c);

/// Which injected bug (if any) is active in a world. Immutable once built.
class FaultPlan {
 public:
  constexpr FaultPlan() = default;
  constexpr explicit FaultPlan(FaultVariant variant) : variant_(variant) {}

  constexpr FaultVariant variant() const { return variant_; }
  ExpectedClass expected_class() const;

  /// The hook this variant mutates; kNone has none.
  static HookPoint hook_for(FaultVariant v);

  /// True iff the active variant mutates this hook.
  bool mutates(HookPoint hook) const {
#if RCUSIM_FAULT_HOOKS
    return variant_ != FaultVariant::kNone && hook_for(variant_) == hook;
#else
    (void)hook;
    return false;
#endif
  }

  /// Selects the effective behavior at a hook point.
  template <class T>
  T apply(HookPoint hook, T default_behavior, T mutated_behavior) const {
    return mutates(hook) ? mutated_behavior : default_behavior;
  }

  /// Caveat recorded in reports for variants whose classification depends on
  /// features outside the model.
  std::string_view caveat() const;

  constexpr bool operator==(const FaultPlan&) const = default;

 private:
  FaultVariant variant_ = FaultVariant::kNone;
};

}  // namespace rcusim
