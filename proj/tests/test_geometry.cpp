#include <gtest/gtest.h>

#include <map>
#include <random>

#include "rcusim/errors.hpp"
#include "rcusim/geometry.hpp"

using namespace rcusim;

namespace {

// Reference parent table: walk each level's parents left to right and hand
// out children one at a time until the parent is full.
std::map<std::size_t, std::size_t> forward_parent_table(const std::vector<std::size_t>& levels,
                                                        std::size_t fanout) {
  std::map<std::size_t, std::size_t> parent;
  std::size_t level_base = 0;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const std::size_t parent_base = level_base;
    level_base += levels[l - 1];
    std::size_t p = 0, used = 0;
    for (std::size_t c = 0; c < levels[l]; ++c) {
      if (used == fanout) {
        ++p;
        used = 0;
      }
      parent[level_base + c] = parent_base + p;
      ++used;
    }
  }
  return parent;
}

void expect_invariants(const TreeGeometry& g) {
  ASSERT_FALSE(g.levels.empty());
  EXPECT_EQ(g.levels[0], 1u);
  EXPECT_LE(g.levels.size(), kMaxTreeLevels);
  for (std::size_t i = 1; i < g.levels.size(); ++i) {
    EXPECT_LE(g.levels[i], g.levels[i - 1] * g.interior_fanout);
  }
  EXPECT_GE(g.levels.back() * g.leaf_fanout, g.cpus);

  std::size_t sum = 0;
  ASSERT_EQ(g.level_start.size(), g.levels.size());
  for (std::size_t i = 0; i < g.levels.size(); ++i) {
    EXPECT_EQ(g.level_start[i], sum);
    sum += g.levels[i];
  }
  EXPECT_EQ(g.total_nodes, sum);

  ASSERT_EQ(g.cpu_to_leaf.size(), g.cpus);
  for (std::size_t c = 0; c < g.cpus; ++c) {
    EXPECT_EQ(g.cpu_to_leaf[c], g.level_start.back() + c / g.leaf_fanout);
  }

  for (std::size_t n = 1; n < g.total_nodes; ++n) {
    const auto p = parent_of(g, n);
    ASSERT_TRUE(p.has_value());
    const auto kids = g.children_of(*p);
    const auto pos = std::find(kids.begin(), kids.end(), n);
    ASSERT_NE(pos, kids.end()) << "node " << n << " missing from its parent's children";
    EXPECT_EQ(g.grpmask_bit(n), static_cast<std::size_t>(pos - kids.begin()));
  }
  EXPECT_FALSE(parent_of(g, 0).has_value());

  // Leaves cover contiguous, disjoint CPU ranges in order.
  std::size_t next_cpu = 0;
  for (std::size_t leaf = g.level_start.back(); leaf < g.total_nodes; ++leaf) {
    EXPECT_EQ(g.grplo(leaf), next_cpu);
    EXPECT_LE(g.grphi(leaf) - g.grplo(leaf) + 1, g.leaf_fanout);
    next_cpu = g.grphi(leaf) + 1;
  }
  EXPECT_EQ(next_cpu, g.cpus);
}

}  // namespace

TEST(Geometry, FourThousandCpusGiveOneFourAndTwoFiftySix) {
  const auto g = compute_geometry(4096, 16, 64);
  EXPECT_EQ(g.levels, (std::vector<std::size_t>{1, 4, 256}));
  EXPECT_EQ(g.total_nodes, 261u);
  EXPECT_EQ(g.level_start, (std::vector<std::size_t>{0, 1, 5}));
}

TEST(Geometry, TwoCpusShareTheRoot) {
  const auto g = compute_geometry(2, 16, 64);
  EXPECT_EQ(g.levels, std::vector<std::size_t>{1});
  EXPECT_EQ(g.total_nodes, 1u);
  EXPECT_EQ(g.cpu_to_leaf, (std::vector<std::size_t>{0, 0}));
}

TEST(Geometry, SingleCpuDegenerateTree) {
  EXPECT_EQ(compute_geometry(1, 2, 2).levels, std::vector<std::size_t>{1});
}

TEST(Geometry, RejectsMoreThanFourLevels) {
  EXPECT_THROW(compute_geometry(16'777'217, 64, 64), ConfigError);
  EXPECT_NO_THROW(compute_geometry(16'777'216, 64, 64));
}

TEST(Geometry, RejectsBadFanoutsAndZeroCpus) {
  EXPECT_THROW(compute_geometry(0), ConfigError);
  EXPECT_THROW(compute_geometry(4, 1, 64), ConfigError);
  EXPECT_THROW(compute_geometry(4, 16, 65), ConfigError);
}

TEST(Geometry, ParentExamples) {
  const auto g = compute_geometry(4096, 16, 64);
  EXPECT_EQ(parent_of(g, 0), std::nullopt);
  EXPECT_EQ(parent_of(g, 3), 0u);
  EXPECT_EQ(parent_of(g, 5), 1u);
  EXPECT_THROW(parent_of(g, 261), ConfigError);
}

TEST(Geometry, ParentMatchesForwardAssignmentTable) {
  const auto g = compute_geometry(4096, 16, 64);
  const auto table = forward_parent_table(g.levels, g.interior_fanout);
  for (const auto& [child, parent] : table) EXPECT_EQ(parent_of(g, child), parent) << child;
}

TEST(Geometry, RaggedEdgePacksDensely) {
  const auto g = compute_geometry(33, 16, 64);
  EXPECT_EQ(g.levels, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(g.grplo(3), 32u);
  EXPECT_EQ(g.grphi(3), 32u);
  EXPECT_EQ(g.child_count(3), 1u);
}

TEST(GeometryProperty, ThousandRandomShapesUpholdInvariants) {
  std::mt19937_64 rng(20240917);
  std::uniform_int_distribution<std::size_t> fan(2, 64);
  std::uniform_int_distribution<int> magnitude(0, 4);
  int checked = 0, rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t leaf = fan(rng), interior = fan(rng);
    std::size_t bound = 1;
    for (int k = magnitude(rng); k >= 0; --k) bound *= 10;
    const std::size_t cpus = std::uniform_int_distribution<std::size_t>(1, bound)(rng);
    const std::size_t capacity = leaf * interior * interior * interior;
    if (cpus > capacity) {
      EXPECT_THROW(compute_geometry(cpus, leaf, interior), ConfigError);
      ++rejected;
      continue;
    }
    const auto g = compute_geometry(cpus, leaf, interior);
    expect_invariants(g);
    EXPECT_EQ(g, compute_geometry(cpus, leaf, interior));
    // Minimal depth: one level fewer would not have had room.
    if (g.depth() > 1) {
      std::size_t smaller = leaf;
      for (std::size_t l = 2; l < g.depth(); ++l) smaller *= interior;
      EXPECT_GT(cpus, smaller);
    }
    const auto table = forward_parent_table(g.levels, interior);
    for (const auto& [child, parent] : table) ASSERT_EQ(parent_of(g, child), parent);
    ++checked;
  }
  EXPECT_EQ(checked + rejected, 1000);
  EXPECT_GT(checked, 900);
}
