#pragma once

#include "rcusim/harness.hpp"

namespace rcusim {

/// Runs the scenario's programs on real threads, one per modeled CPU, with
/// std::mutex node locks, atomic shared cells, seeded random delays in the
/// readers, and a periodic tick on every CPU. Runs execute concurrently and
/// each is classified as successful, failing, or timed out.
NativeStats run_native(const Scenario& s);

/// One run; exposed for tests.
enum class NativeRunResult { kSuccessful, kFailing, kTimeout };
NativeRunResult run_native_once(const Scenario& s, std::uint64_t run_index,
                                std::uint64_t* ghost_breaches = nullptr);

}  // namespace rcusim
