#include <gtest/gtest.h>

#include <mutex>
#include <set>

#include "litmus_oracle.hpp"
#include "rcusim/errors.hpp"
#include "rcusim/explore.hpp"
#include "rcusim/harness.hpp"

namespace rcusim {
void PrintTo(MemoryModel m, std::ostream* os) { *os << memory_model_name(m); }
}  // namespace rcusim

using namespace rcusim;
using namespace rcusim::testing;

namespace {

std::set<Outcome2> explored_outcomes(const SimWorld& w, bool parallel, int threads = 2) {
  std::set<Outcome2> out;
  std::mutex mu;
  Visitor v = [&](const SimWorld& world, NodeKind kind) {
    if (kind == NodeKind::kComplete) {
      std::lock_guard lock(mu);
      out.insert(outcome_of(world));
    }
    return false;
  };
  ExploreLimits limits;
  const auto stats = parallel ? explore_parallel(w, limits, v, threads) : explore_dfs(w, limits, v);
  EXPECT_EQ(stats.deadlocks, 0u);
  EXPECT_EQ(stats.truncated, 0u);
  return out;
}

bool mp_stale(const Outcome2& o) { return o[1][0] == 1 && o[1][1] == 0; }
bool sb_both_zero(const Outcome2& o) { return o[0][0] == 0 && o[1][0] == 0; }

}  // namespace

TEST(Explorer, TwoThreadsOfTwoStepsHaveSixInterleavings) {
  SimWorld w(WorldConfig{});
  w.add_thread("a", 0, {ins::nop(), ins::nop()});
  w.add_thread("b", 1, {ins::nop(), ins::nop()});
  ExploreLimits limits;
  limits.prune = false;
  const auto stats = explore_dfs(w, limits, [](const SimWorld&, NodeKind) { return false; });
  EXPECT_EQ(stats.schedules, 6u);
  EXPECT_EQ(stats.complete, 6u);
}

TEST(Explorer, StopRecordsReplayablePath) {
  SimWorld w(WorldConfig{});
  w.add_thread("a", 0, {ins::store(CellId::litmus(0), 1)});
  w.add_thread("b", 1, {ins::load(CellId::litmus(0), 0)});
  const auto stats = explore_dfs(w, {}, [](const SimWorld& world, NodeKind kind) {
    return kind == NodeKind::kComplete && world.threads()[1].regs[0] == 1;
  });
  ASSERT_TRUE(stats.stopped);
  const SimWorld end = replay_path(w, stats.stop_path);
  EXPECT_EQ(end.threads()[1].regs[0], 1);
  EXPECT_EQ(decode_path(encode_path(stats.stop_path)), stats.stop_path);
  EXPECT_EQ(path_indices(w, path_choices(w, stats.stop_path)), stats.stop_path);
  EXPECT_THROW(replay_path(w, {9}), ConfigError);
}

class Litmus : public ::testing::TestWithParam<MemoryModel> {};

TEST_P(Litmus, MessagePassingMatchesOracle) {
  const auto progs = message_passing();
  const auto want = LitmusOracle(progs, GetParam()).outcomes();
  const auto got = explored_outcomes(litmus_world(progs, GetParam()), false);
  EXPECT_EQ(got, want);
  const bool stale = std::any_of(got.begin(), got.end(), mp_stale);
  EXPECT_EQ(stale, GetParam() == MemoryModel::kPSO);
}

TEST_P(Litmus, StoreBufferingMatchesOracle) {
  const auto progs = store_buffering();
  const auto want = LitmusOracle(progs, GetParam()).outcomes();
  const auto got = explored_outcomes(litmus_world(progs, GetParam()), false);
  EXPECT_EQ(got, want);
  const bool relaxed = std::any_of(got.begin(), got.end(), sb_both_zero);
  EXPECT_EQ(relaxed, GetParam() != MemoryModel::kSC);
}

TEST_P(Litmus, ParallelSearchReachesSameOutcomes) {
  for (const auto& progs : {message_passing(), store_buffering()}) {
    const SimWorld w = litmus_world(progs, GetParam());
    EXPECT_EQ(explored_outcomes(w, true, 3), explored_outcomes(w, false));
  }
}

INSTANTIATE_TEST_SUITE_P(Models, Litmus,
                         ::testing::Values(MemoryModel::kSC, MemoryModel::kTSO, MemoryModel::kPSO),
                         [](const auto& info) { return std::string(memory_model_name(info.param)); });

TEST(MemoryModels, OwnStoresForwardUnderTso) {
  WorldConfig cfg;
  cfg.memory_model = MemoryModel::kTSO;
  SimWorld w(cfg);
  w.add_thread("w", 0, {ins::store(CellId::litmus(0), 1), ins::fence()});
  w.step({.kind = Choice::Kind::kThread, .who = 0});
  EXPECT_EQ(w.view(0, CellId::litmus(0)), 1);
  EXPECT_EQ(w.view(1, CellId::litmus(0)), 0);
  EXPECT_EQ(w.memory(CellId::litmus(0)), 0);
  EXPECT_EQ(w.store_buffer(0).size(), 1u);
  w.step({.kind = Choice::Kind::kThread, .who = 0});
  EXPECT_TRUE(w.store_buffer(0).empty());
  EXPECT_EQ(w.memory(CellId::litmus(0)), 1);
}

TEST(MemoryModels, NamesParse) {
  for (auto m : {MemoryModel::kSC, MemoryModel::kTSO, MemoryModel::kPSO}) {
    EXPECT_EQ(parse_memory_model(memory_model_name(m)), m);
  }
  EXPECT_THROW(parse_memory_model("arm"), ConfigError);
}

TEST(SimWorld, ProgramLockBlocksSecondTaker) {
  SimWorld w(WorldConfig{});
  w.add_thread("a", 0, {ins::lock(0), ins::unlock(0)});
  w.add_thread("b", 1, {ins::lock(0), ins::unlock(0)});
  w.step({.kind = Choice::Kind::kThread, .who = 0});
  for (const auto& c : w.enabled()) EXPECT_FALSE(c.kind == Choice::Kind::kThread && c.who == 1);
  EXPECT_THROW(w.step({.kind = Choice::Kind::kThread, .who = 1}), ModelError);
  w.step({.kind = Choice::Kind::kThread, .who = 0});
  EXPECT_NO_THROW(w.step({.kind = Choice::Kind::kThread, .who = 1}));
}

TEST(SimWorld, TickWithInterruptsOffIsDeferredNotDropped) {
  SimWorld w(WorldConfig{});
  w.irq_save(0);
  w.inject_tick(0);
  EXPECT_EQ(w.pending_ticks(0), 1u);
  EXPECT_FALSE(w.softirq_running(0));
  w.irq_restore(0);
  EXPECT_EQ(w.pending_ticks(0), 0u);
  EXPECT_TRUE(w.softirq_running(0));
}

TEST(SimWorld, RandomStepsKeepInvariants) {
  const SimWorld root = build_world(make_scenario("prove", 2));
  std::uint64_t checked = 0;
  Visitor v = [&](const SimWorld& w, NodeKind) {
    w.check();
    ++checked;
    return false;
  };
  ExploreLimits limits;
  EXPECT_NO_THROW(explore_random(root, limits, v, 99, 50));
  EXPECT_GT(checked, 50u);
}

TEST(SimWorld, CopyForksIndependently) {
  SimWorld a = build_world(make_scenario("prove"));
  SimWorld b = a;
  a.step(a.enabled().front());
  EXPECT_NE(a.state_key(), b.state_key());
  EXPECT_EQ(b.steps(), 0u);
}
