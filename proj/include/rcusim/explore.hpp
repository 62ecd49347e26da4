#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rcusim/sim.hpp"

namespace rcusim {

enum class NodeKind : std::uint8_t {
  kInterior,   // more decisions available
  kComplete,   // every thread finished
  kDeadlock,   // threads remain but nothing is enabled
  kTruncated,  // step budget reached
};

/// Called on every reached world. Returning true stops the exploration and
/// records the path to this world. Must be safe to call concurrently when
/// used with the parallel explorer.
using Visitor = std::function<bool(const SimWorld&, NodeKind)>;

struct ExploreLimits {
  std::size_t max_steps = 400;
  std::uint64_t max_schedules = 20'000'000;
  bool prune = true;  // skip worlds already seen (same state key)
};

struct ExploreStats {
  std::uint64_t schedules = 0;  // leaves reached: complete + deadlock + truncated
  std::uint64_t complete = 0;
  std::uint64_t deadlocks = 0;
  std::uint64_t truncated = 0;
  std::uint64_t states = 0;
  std::uint64_t pruned = 0;
  bool stopped = false;             // the visitor asked to stop
  bool schedule_budget_hit = false;
  std::vector<std::uint32_t> stop_path;  // choice indices leading to the stop

  void merge(const ExploreStats& other);
};

/// Classification of a world under the given step budget.
NodeKind classify(const SimWorld& w, const std::vector<Choice>& choices, std::size_t max_steps);

/// Depth-first enumeration of every schedule. The reference implementation.
ExploreStats explore_dfs(const SimWorld& root, const ExploreLimits& limits, const Visitor& visit);

/// Same search split over OpenMP threads: a breadth-first prefix frontier is
/// expanded serially, then each frontier world is searched depth-first. Each
/// task keeps its own visited set, so counts can exceed the serial ones when
/// pruning; the set of reachable leaves is identical.
ExploreStats explore_parallel(const SimWorld& root, const ExploreLimits& limits,
                              const Visitor& visit, int threads = 0);

/// Uniformly random schedules, one per run, from a seeded mt19937_64.
ExploreStats explore_random(const SimWorld& root, const ExploreLimits& limits,
                            const Visitor& visit, std::uint64_t seed, std::uint64_t runs);

/// Applies a path of choice indices. Throws ConfigError when an index does not
/// name an enabled choice.
SimWorld replay_path(const SimWorld& root, const std::vector<std::uint32_t>& path,
                     TraceSink* trace = nullptr);

/// The decisions a path of indices stands for, and back. path_indices throws
/// ConfigError when a decision is not enabled at its position.
std::vector<Choice> path_choices(const SimWorld& root, const std::vector<std::uint32_t>& path);
std::vector<std::uint32_t> path_indices(const SimWorld& root, const std::vector<Choice>& choices);

std::string encode_path(const std::vector<std::uint32_t>& path);
std::vector<std::uint32_t> decode_path(std::string_view text);

}  // namespace rcusim
