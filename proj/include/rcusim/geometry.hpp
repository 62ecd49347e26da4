#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace rcusim {

inline constexpr std::size_t kMaxTreeLevels = 4;
inline constexpr std::size_t kDefaultLeafFanout = 16;
inline constexpr std::size_t kDefaultInteriorFanout = 64;

/// Shape of the rcu_node combining tree, laid out breadth-first in one array.
/// Level 0 is the root; level_start[i] is the array index of the left-most node
/// of level i, so a breadth-first walk is a linear scan.
struct TreeGeometry {
  std::size_t cpus = 0;
  std::size_t leaf_fanout = kDefaultLeafFanout;
  std::size_t interior_fanout = kDefaultInteriorFanout;
  std::vector<std::size_t> levels;
  std::vector<std::size_t> level_start;
  std::vector<std::size_t> cpu_to_leaf;
  std::size_t total_nodes = 0;

  std::size_t depth() const { return levels.size(); }
  std::size_t leaf_level() const { return levels.size() - 1; }
  bool is_leaf(std::size_t node) const { return level_of(node) == leaf_level(); }

  std::size_t level_of(std::size_t node) const;
  /// Position of the node among the nodes of its own level.
  std::size_t ordinal_in_level(std::size_t node) const;
  /// Bit position of the node in its parent's qsmask (0 for the root).
  std::size_t grpmask_bit(std::size_t node) const;
  /// Bit position of a CPU in its leaf's qsmask.
  std::size_t cpu_grpmask_bit(std::size_t cpu) const { return cpu % leaf_fanout; }

  std::vector<std::size_t> children_of(std::size_t node) const;
  /// Number of qsmask bits a node owns: child nodes, or CPUs for a leaf.
  std::size_t child_count(std::size_t node) const;

  /// Lowest and highest CPU covered by the subtree rooted at node.
  std::size_t grplo(std::size_t node) const;
  std::size_t grphi(std::size_t node) const;

  bool operator==(const TreeGeometry&) const = default;
};

/// Minimal-depth tree for the given CPU count. Children are packed densely
/// left to right, so only the right-most node of a level may be under-full.
/// Throws ConfigError on out-of-range fanouts or when more than four levels
/// would be needed.
TreeGeometry compute_geometry(std::size_t cpus,
                              std::size_t leaf_fanout = kDefaultLeafFanout,
                              std::size_t interior_fanout = kDefaultInteriorFanout);

/// Parent index, or nullopt for the root. Throws ConfigError when node_index
/// is out of range.
std::optional<std::size_t> parent_of(const TreeGeometry& geom, std::size_t node_index);

}  // namespace rcusim
