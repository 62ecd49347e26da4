#include "rcusim/geometry.hpp"

#include <algorithm>
#include <string>

#include "rcusim/errors.hpp"

namespace rcusim {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_node(const TreeGeometry& geom, std::size_t node) {
  if (node >= geom.total_nodes) {
    throw ConfigError("node index " + std::to_string(node) + " out of range (" +
                      std::to_string(geom.total_nodes) + " nodes)");
  }
}

}  // namespace

TreeGeometry compute_geometry(std::size_t cpus, std::size_t leaf_fanout,
                              std::size_t interior_fanout) {
  if (cpus < 1) throw ConfigError("cpus must be >= 1");
  if (leaf_fanout < 2 || leaf_fanout > 64) throw ConfigError("leaf_fanout must be in [2, 64]");
  if (interior_fanout < 2 || interior_fanout > 64) {
    throw ConfigError("interior_fanout must be in [2, 64]");
  }
  std::size_t capacity = leaf_fanout;
  for (std::size_t i = 1; i < kMaxTreeLevels; ++i) capacity *= interior_fanout;
  if (cpus > capacity) {
    throw ConfigError(std::to_string(cpus) + " cpus need more than " +
                      std::to_string(kMaxTreeLevels) + " levels (capacity " +
                      std::to_string(capacity) + ")");
  }

  TreeGeometry geom;
  geom.cpus = cpus;
  geom.leaf_fanout = leaf_fanout;
  geom.interior_fanout = interior_fanout;

  // Build bottom-up, then reverse so the root comes first.
  std::vector<std::size_t> bottom_up{ceil_div(cpus, leaf_fanout)};
  while (bottom_up.back() > 1) bottom_up.push_back(ceil_div(bottom_up.back(), interior_fanout));
  geom.levels.assign(bottom_up.rbegin(), bottom_up.rend());

  std::size_t offset = 0;
  for (std::size_t n : geom.levels) {
    geom.level_start.push_back(offset);
    offset += n;
  }
  geom.total_nodes = offset;

  const std::size_t first_leaf = geom.level_start.back();
  geom.cpu_to_leaf.resize(cpus);
  for (std::size_t c = 0; c < cpus; ++c) geom.cpu_to_leaf[c] = first_leaf + c / leaf_fanout;
  return geom;
}

std::size_t TreeGeometry::level_of(std::size_t node) const {
  auto it = std::upper_bound(level_start.begin(), level_start.end(), node);
  return static_cast<std::size_t>(it - level_start.begin()) - 1;
}

std::size_t TreeGeometry::ordinal_in_level(std::size_t node) const {
  return node - level_start[level_of(node)];
}

std::size_t TreeGeometry::grpmask_bit(std::size_t node) const {
  if (node == 0) return 0;
  return ordinal_in_level(node) % interior_fanout;
}

std::vector<std::size_t> TreeGeometry::children_of(std::size_t node) const {
  const std::size_t level = level_of(node);
  if (level == leaf_level()) return {};
  const std::size_t first = ordinal_in_level(node) * interior_fanout;
  const std::size_t last = std::min(first + interior_fanout, levels[level + 1]);
  std::vector<std::size_t> out;
  for (std::size_t k = first; k < last; ++k) out.push_back(level_start[level + 1] + k);
  return out;
}

std::size_t TreeGeometry::child_count(std::size_t node) const {
  if (!is_leaf(node)) return children_of(node).size();
  return grphi(node) - grplo(node) + 1;
}

std::size_t TreeGeometry::grplo(std::size_t node) const {
  std::size_t level = level_of(node);
  std::size_t ordinal = ordinal_in_level(node);
  for (; level < leaf_level(); ++level) ordinal *= interior_fanout;
  return ordinal * leaf_fanout;
}

std::size_t TreeGeometry::grphi(std::size_t node) const {
  std::size_t level = level_of(node);
  std::size_t ordinal = ordinal_in_level(node) + 1;
  for (; level < leaf_level(); ++level) ordinal *= interior_fanout;
  return std::min(ordinal * leaf_fanout, cpus) - 1;
}

std::optional<std::size_t> parent_of(const TreeGeometry& geom, std::size_t node_index) {
  check_node(geom, node_index);
  const std::size_t level = geom.level_of(node_index);
  if (level == 0) return std::nullopt;
  return geom.level_start[level - 1] + geom.ordinal_in_level(node_index) / geom.interior_fanout;
}

}  // namespace rcusim
