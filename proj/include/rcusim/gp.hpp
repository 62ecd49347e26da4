#pragma once

#include <cstddef>

#include "rcusim/env.hpp"

namespace rcusim {

/// rsp->gp_flags := RCU_GP_FLAG_INIT. Idempotent.
void request_gp(RcuContext& ctx, std::size_t cpu);

/// rcu_gp_init. Returns false without touching anything if no grace period is
/// requested or one is already running (the request then stays pending).
bool gp_init(RcuContext& ctx, std::size_t initiating_cpu);

/// rcu_gp_cleanup, called directly from report_qs_rsp. Starts the next grace
/// period immediately when one has been requested.
void gp_cleanup(RcuContext& ctx, std::size_t cpu);

}  // namespace rcusim
