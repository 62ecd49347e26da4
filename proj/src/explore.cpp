#include "rcusim/explore.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <deque>
#include <mutex>
#include <random>
#include <unordered_set>

#include <omp.h>

#include "rcusim/errors.hpp"

namespace rcusim {

namespace {

struct KeyHash {
  std::uint64_t lo;
  std::uint64_t hi;
  bool operator==(const KeyHash&) const = default;
};

struct KeyHashHasher {
  std::size_t operator()(const KeyHash& k) const { return static_cast<std::size_t>(k.lo ^ (k.hi * 0x9e3779b97f4a7c15ULL)); }
};

KeyHash hash_key(const std::string& key) {
  return {fnv1a(key), std::hash<std::string>{}(key)};
}

using Visited = std::unordered_set<KeyHash, KeyHashHasher>;

class Dfs {
 public:
  Dfs(const ExploreLimits& limits, const Visitor& visit, const std::atomic<bool>* cancel)
      : limits_(limits), visit_(visit), cancel_(cancel) {}

  /// Returns true when the search must end (stop or budget).
  bool run(const SimWorld& w) {
    if (cancel_ && cancel_->load(std::memory_order_relaxed)) return true;
    ++stats.states;
    const std::vector<Choice> choices = w.enabled();
    const NodeKind kind = classify(w, choices, limits_.max_steps);
    if (visit_(w, kind)) {
      stats.stopped = true;
      stats.stop_path = path_;
      return true;
    }
    if (kind != NodeKind::kInterior) {
      count_leaf(kind);
      if (stats.schedules >= limits_.max_schedules) {
        stats.schedule_budget_hit = true;
        return true;
      }
      return false;
    }
    for (std::uint32_t i = 0; i < choices.size(); ++i) {
      SimWorld child = w;
      child.step(choices[i]);
      if (limits_.prune && !visited_.insert(hash_key(child.state_key())).second) {
        ++stats.pruned;
        continue;
      }
      path_.push_back(i);
      const bool end = run(child);
      path_.pop_back();
      if (end) return true;
    }
    return false;
  }

  void set_prefix(std::vector<std::uint32_t> prefix) { path_ = std::move(prefix); }
  void count_leaf(NodeKind kind) {
    ++stats.schedules;
    if (kind == NodeKind::kComplete) ++stats.complete;
    if (kind == NodeKind::kDeadlock) ++stats.deadlocks;
    if (kind == NodeKind::kTruncated) ++stats.truncated;
  }

  ExploreStats stats;

 private:
  const ExploreLimits& limits_;
  const Visitor& visit_;
  const std::atomic<bool>* cancel_;
  Visited visited_;
  std::vector<std::uint32_t> path_;
};

}  // namespace

void ExploreStats::merge(const ExploreStats& o) {
  schedules += o.schedules;
  complete += o.complete;
  deadlocks += o.deadlocks;
  truncated += o.truncated;
  states += o.states;
  pruned += o.pruned;
  schedule_budget_hit = schedule_budget_hit || o.schedule_budget_hit;
}

NodeKind classify(const SimWorld& w, const std::vector<Choice>& choices, std::size_t max_steps) {
  if (w.all_threads_done()) return NodeKind::kComplete;
  if (w.steps() >= max_steps) return NodeKind::kTruncated;
  if (choices.empty()) return NodeKind::kDeadlock;
  return NodeKind::kInterior;
}

ExploreStats explore_dfs(const SimWorld& root, const ExploreLimits& limits, const Visitor& visit) {
  Dfs dfs(limits, visit, nullptr);
  dfs.run(root);
  return dfs.stats;
}

ExploreStats explore_parallel(const SimWorld& root, const ExploreLimits& limits,
                              const Visitor& visit, int threads) {
  if (threads <= 0) threads = omp_get_max_threads();
  struct Item {
    SimWorld world;
    std::vector<std::uint32_t> path;
  };

  // Serial breadth-first prefix. Leaves met here are settled immediately.
  ExploreStats total;
  Visited seen;
  std::deque<Item> frontier;
  frontier.push_back({root, {}});
  const std::size_t target = static_cast<std::size_t>(threads) * 8;
  while (!frontier.empty() && frontier.size() < target) {
    Item item = std::move(frontier.front());
    frontier.pop_front();
    ++total.states;
    const auto choices = item.world.enabled();
    const NodeKind kind = classify(item.world, choices, limits.max_steps);
    if (visit(item.world, kind)) {
      total.stopped = true;
      total.stop_path = item.path;
      return total;
    }
    if (kind != NodeKind::kInterior) {
      ++total.schedules;
      if (kind == NodeKind::kComplete) ++total.complete;
      if (kind == NodeKind::kDeadlock) ++total.deadlocks;
      if (kind == NodeKind::kTruncated) ++total.truncated;
      continue;
    }
    for (std::uint32_t i = 0; i < choices.size(); ++i) {
      Item child{item.world, item.path};
      child.world.step(choices[i]);
      if (limits.prune && !seen.insert(hash_key(child.world.state_key())).second) {
        ++total.pruned;
        continue;
      }
      child.path.push_back(i);
      frontier.push_back(std::move(child));
    }
  }

  std::vector<Item> work(std::make_move_iterator(frontier.begin()),
                         std::make_move_iterator(frontier.end()));
  std::atomic<bool> cancel{false};
  std::mutex mu;
  std::size_t stop_index = work.size();
  ExploreLimits per_task = limits;

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (cancel.load(std::memory_order_relaxed)) continue;
    Dfs dfs(per_task, visit, &cancel);
    dfs.set_prefix(work[i].path);
    // The frontier world itself was already counted as reached; run() counts
    // it again as a state, which keeps the bookkeeping simple.
    dfs.run(work[i].world);
    std::lock_guard lock(mu);
    total.merge(dfs.stats);
    if (dfs.stats.stopped && i < stop_index) {
      stop_index = i;
      total.stopped = true;
      total.stop_path = dfs.stats.stop_path;
    }
    if (dfs.stats.stopped || total.schedules >= limits.max_schedules) {
      if (total.schedules >= limits.max_schedules) total.schedule_budget_hit = true;
      cancel.store(true);
    }
  }
  return total;
}

ExploreStats explore_random(const SimWorld& root, const ExploreLimits& limits,
                            const Visitor& visit, std::uint64_t seed, std::uint64_t runs) {
  ExploreStats stats;
  std::mt19937_64 rng(seed);
  for (std::uint64_t r = 0; r < runs && stats.schedules < limits.max_schedules; ++r) {
    SimWorld w = root;
    std::vector<std::uint32_t> path;
    for (;;) {
      ++stats.states;
      const auto choices = w.enabled();
      const NodeKind kind = classify(w, choices, limits.max_steps);
      if (visit(w, kind)) {
        stats.stopped = true;
        stats.stop_path = std::move(path);
        return stats;
      }
      if (kind != NodeKind::kInterior) {
        ++stats.schedules;
        if (kind == NodeKind::kComplete) ++stats.complete;
        if (kind == NodeKind::kDeadlock) ++stats.deadlocks;
        if (kind == NodeKind::kTruncated) ++stats.truncated;
        break;
      }
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(choices.size() - 1));
      const std::uint32_t i = pick(rng);
      path.push_back(i);
      w.step(choices[i]);
    }
  }
  if (stats.schedules >= limits.max_schedules) stats.schedule_budget_hit = true;
  return stats;
}

SimWorld replay_path(const SimWorld& root, const std::vector<std::uint32_t>& path, TraceSink* trace) {
  SimWorld w = root;
  w.set_trace(trace);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto choices = w.enabled();
    if (path[k] >= choices.size()) {
      throw ConfigError("schedule step " + std::to_string(k) + " picks choice " +
                        std::to_string(path[k]) + " but only " + std::to_string(choices.size()) +
                        " are enabled");
    }
    w.step(choices[path[k]]);
  }
  w.set_trace(nullptr);
  return w;
}

std::vector<Choice> path_choices(const SimWorld& root, const std::vector<std::uint32_t>& path) {
  std::vector<Choice> out;
  SimWorld w = root;
  for (std::uint32_t i : path) {
    const auto choices = w.enabled();
    if (i >= choices.size()) throw ConfigError("path index out of range");
    out.push_back(choices[i]);
    w.step(choices[i]);
  }
  return out;
}

std::vector<std::uint32_t> path_indices(const SimWorld& root, const std::vector<Choice>& decisions) {
  std::vector<std::uint32_t> out;
  SimWorld w = root;
  for (const Choice& c : decisions) {
    const auto choices = w.enabled();
    const auto it = std::find(choices.begin(), choices.end(), c);
    if (it == choices.end()) throw ConfigError("decision '" + describe(c) + "' is not enabled");
    out.push_back(static_cast<std::uint32_t>(it - choices.begin()));
    w.step(c);
  }
  return out;
}

std::string encode_path(const std::vector<std::uint32_t>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

std::vector<std::uint32_t> decode_path(std::string_view text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('.', pos);
    if (end == std::string_view::npos) end = text.size();
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, v);
    if (ec != std::errc{} || ptr != text.data() + end) {
      throw ConfigError("malformed schedule string near offset " + std::to_string(pos));
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace rcusim
