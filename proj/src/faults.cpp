#include "rcusim/faults.hpp"

#include <string>

#include "rcusim/errors.hpp"

namespace rcusim {

std::string_view hook_point_name(HookPoint hook) {
  switch (hook) {
    case HookPoint::kSynchronizeEntry: return "synchronize-entry";
    case HookPoint::kGpInitQsmask: return "gp-init-qsmask";
    case HookPoint::kNoteGpChangesClearMask: return "note-gp-changes-clear-mask";
    case HookPoint::kNoteGpChangesQsPending: return "note-gp-changes-qs-pending";
    case HookPoint::kRecordQs: return "record-qs";
    case HookPoint::kReportQsRnpEntry: return "report-qs-rnp-entry";
    case HookPoint::kReportQsRnpStopCheck: return "rnp-walk-stop-check";
  }
  return "?";
}

HookPoint parse_hook_point(std::string_view name) {
  for (HookPoint h : kAllHookPoints) {
    if (hook_point_name(h) == name) return h;
  }
  throw ConfigError("unknown hook point '" + std::string(name) + "'");
}

std::string_view fault_variant_name(FaultVariant v) {
  switch (v) {
    case FaultVariant::kNone: return "none";
    case FaultVariant::kBug1: return "bug1";
    case FaultVariant::kBug2: return "bug2";
    case FaultVariant::kBug3: return "bug3";
    case FaultVariant::kBug4: return "bug4";
    case FaultVariant::kBug5: return "bug5";
    case FaultVariant::kBug6: return "bug6";
    case FaultVariant::kBug7: return "bug7";
  }
  return "?";
}

FaultVariant parse_fault_variant(std::string_view name) {
  for (int i = 0; i <= 7; ++i) {
    auto v = static_cast<FaultVariant>(i);
    if (fault_variant_name(v) == name) return v;
  }
  throw ConfigError("unknown fault variant '" + std::string(name) + "'");
}

std::string_view expected_class_name(ExpectedClass c) {
  switch (c) {
    case ExpectedClass::kSafe: return "SAFE";
    case ExpectedClass::kSafetyViolation: return "SAFETY_VIOLATION";
    case ExpectedClass::kLivenessHang: return "LIVENESS_HANG";
  }
  return "?";
}

ExpectedClass FaultPlan::expected_class() const {
  switch (variant_) {
    case FaultVariant::kNone: return ExpectedClass::kSafe;
    case FaultVariant::kBug1:
    case FaultVariant::kBug7: return ExpectedClass::kSafetyViolation;
    default: return ExpectedClass::kLivenessHang;
  }
}

HookPoint FaultPlan::hook_for(FaultVariant v) {
  switch (v) {
    case FaultVariant::kBug1: return HookPoint::kSynchronizeEntry;
    case FaultVariant::kBug2: return HookPoint::kGpInitQsmask;
    case FaultVariant::kBug3: return HookPoint::kNoteGpChangesClearMask;
    case FaultVariant::kBug4: return HookPoint::kNoteGpChangesQsPending;
    case FaultVariant::kBug5: return HookPoint::kRecordQs;
    case FaultVariant::kBug6: return HookPoint::kReportQsRnpEntry;
    case FaultVariant::kBug7: return HookPoint::kReportQsRnpStopCheck;
    case FaultVariant::kNone: break;
  }
  throw ConfigError("fault variant 'none' has no hook point");
}

std::string_view FaultPlan::caveat() const {
  if (variant_ == FaultVariant::kBug2 || variant_ == FaultVariant::kBug3) {
    return "with quiescent-state forcing (not modeled) this bug would instead shorten grace "
           "periods";
  }
  return {};
}

}  // namespace rcusim
