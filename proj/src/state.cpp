#include "rcusim/state.hpp"

#include <json.hpp>

#include "rcusim/errors.hpp"

namespace rcusim {

std::vector<std::size_t> ChildSet::ordinals() const {
  std::vector<std::size_t> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
  }
  return out;
}

std::string_view gp_state_name(GpState s) {
  switch (s) {
    case GpState::kWaitGps: return "RCU_GP_WAIT_GPS";
    case GpState::kInit: return "RCU_GP_INIT";
    case GpState::kWaitQs: return "RCU_GP_WAIT_QS";
    case GpState::kCleanup: return "RCU_GP_CLEANUP";
    case GpState::kCleaned: return "RCU_GP_CLEANED";
  }
  return "?";
}

RcuUniverse init_universe(const TreeGeometry& geom, std::size_t blimit) {
  RcuUniverse u;
  u.geometry = geom;
  u.nodes.resize(geom.total_nodes);
  for (std::size_t i = 0; i < geom.total_nodes; ++i) {
    RcuNode& n = u.nodes[i];
    n.index = i;
    n.parent = parent_of(geom, i);
    n.level = geom.level_of(i);
    n.grpmask_bit = geom.grpmask_bit(i);
    n.grplo = geom.grplo(i);
    n.grphi = geom.grphi(i);
    n.qsmaskinit = ChildSet::first_n(geom.child_count(i));
    n.lock_id = i;
  }
  u.data.reserve(geom.cpus);
  for (std::size_t c = 0; c < geom.cpus; ++c) {
    RcuData d{.cpu = c,
              .mynode = geom.cpu_to_leaf[c],
              .grpmask_bit = geom.cpu_grpmask_bit(c),
              .callbacks = SegmentedCallbackList(blimit)};
    u.data.push_back(std::move(d));
  }
  return u;
}

bool is_idle(const RcuState& state) {
  if (state.gpnum == state.completed) return true;
  if (state.gpnum == state.completed + 1) return false;
  throw InvariantViolation("rcu_state gpnum=" + std::to_string(state.gpnum) +
                           " completed=" + std::to_string(state.completed) +
                           " is neither idle nor one grace period in progress");
}

namespace {

void check_lag(std::string_view what, std::uint64_t upper, std::uint64_t lower) {
  if (lower > upper || upper - lower > 1) {
    throw InvariantViolation(std::string(what) + " lag out of range: " + std::to_string(upper) +
                             " vs " + std::to_string(lower));
  }
}

}  // namespace

void check_universe(const RcuUniverse& u) {
  const auto& g = u.geometry;
  if (u.nodes.size() != g.total_nodes) throw InvariantViolation("node array size mismatch");
  if (u.data.size() != g.cpus) throw InvariantViolation("rcu_data array size mismatch");
  is_idle(u.state);

  for (const RcuNode& n : u.nodes) {
    const std::string tag = "rcu_node[" + std::to_string(n.index) + "]";
    if (!n.qsmask.subset_of(n.qsmaskinit)) throw InvariantViolation(tag + " qsmask not within qsmaskinit");
    check_lag(tag + ".gpnum", u.state.gpnum, n.gpnum);
    check_lag(tag + ".completed", u.state.completed, n.completed);
    if (n.completed > n.gpnum) throw InvariantViolation(tag + " completed ahead of gpnum");
    if (n.parent) {
      const RcuNode& p = u.nodes[*n.parent];
      check_lag(tag + ".gpnum vs parent", p.gpnum, n.gpnum);
      check_lag(tag + ".completed vs parent", p.completed, n.completed);
    }
  }
  for (const RcuData& d : u.data) {
    const std::string tag = "rcu_data[" + std::to_string(d.cpu) + "]";
    const RcuNode& leaf = u.nodes[d.mynode];
    check_lag(tag + ".gpnum", leaf.gpnum, d.gpnum);
    check_lag(tag + ".completed", leaf.completed, d.completed);
    d.callbacks.check_invariants();
  }
}

std::string snapshot_json(const RcuUniverse& u) {
  using nlohmann::json;
  json j;
  j["rcu_state"] = {{"gpnum", u.state.gpnum},
                    {"completed", u.state.completed},
                    {"gp_flags", u.state.gp_flags == GpFlags::kInit ? "RCU_GP_FLAG_INIT" : "0"},
                    {"gp_state", gp_state_name(u.state.gp_state)}};
  json nodes = json::array();
  for (const RcuNode& n : u.nodes) {
    nodes.push_back({{"index", n.index},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"level", n.level},
                     {"grpmask", n.grpmask_bit},
                     {"grplo", n.grplo},
                     {"grphi", n.grphi},
                     {"qsmask", n.qsmask.ordinals()},
                     {"qsmaskinit", n.qsmaskinit.ordinals()},
                     {"gpnum", n.gpnum},
                     {"completed", n.completed}});
  }
  j["rcu_node"] = std::move(nodes);
  json data = json::array();
  for (const RcuData& d : u.data) {
    json cbs = json::array();
    for (const Callback& cb : d.callbacks.entries()) {
      cbs.push_back({{"id", cb.id}, {"func", callback_func_name(cb.func)}});
    }
    data.push_back({{"cpu", d.cpu},
                    {"mynode", d.mynode},
                    {"grpmask", d.grpmask_bit},
                    {"qs_pending", d.qs_pending},
                    {"passed_quiesce", d.passed_quiesce},
                    {"gpnum", d.gpnum},
                    {"completed", d.completed},
                    {"nxtlist", std::move(cbs)},
                    {"nxttail", {d.callbacks.done_end(), d.callbacks.wait_end(),
                                 d.callbacks.next_ready_end(), d.callbacks.qlen()}},
                    {"qlen", d.callbacks.qlen()},
                    {"blimit", d.callbacks.blimit()}});
  }
  j["rcu_data"] = std::move(data);
  return j.dump();
}

}  // namespace rcusim
