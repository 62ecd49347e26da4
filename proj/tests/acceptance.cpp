// Runs the ten acceptance checks and prints one PASS/FAIL line per check.
// Exit status is the number of failed checks.

#include <array>
#include <chrono>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcusim/errors.hpp"
#include "rcusim/explore.hpp"
#include "rcusim/geometry.hpp"
#include "rcusim/harness.hpp"
#include "rcusim/native.hpp"

using namespace rcusim;

namespace {

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string outcome_str(Outcome o) { return std::string(outcome_name(o)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool replays_to(const Scenario& s, const RunReport& r) {
  if (!r.counterexample) return false;
  std::stringstream file;
  write_schedule(file, s, decode_path(*r.counterexample));
  return replay(read_schedule(file)).outcome == r.outcome;
}

void prove_safe(Check& c) {
  Scenario s = make_scenario("prove");
  s.max_steps = 400;
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport r = run_scenario(s);
  const double secs = seconds_since(t0);
  c.require(r.outcome == Outcome::kSafe, "outcome " + outcome_str(r.outcome));
  c.require(secs < 60.0, "took " + std::to_string(secs) + " s");

  // Independent sweep: every reached world must have a clean monitor.
  std::uint64_t breaches = 0, violated = 0, worlds = 0;
  explore_dfs(build_world(s), ExploreLimits{.max_steps = s.max_steps},
              [&](const SimWorld& w, NodeKind) {
                ++worlds;
                breaches += w.monitor().breaches();
                violated += w.monitor().violated() || litmus_violated(w);
                return false;
              });
  c.require(breaches == 0, std::to_string(breaches) + " reader breaches");
  c.require(violated == 0, std::to_string(violated) + " violating worlds");
  c.note(std::to_string(r.explore.schedules) + " schedules, " + std::to_string(worlds) +
         " worlds, " + std::to_string(secs).substr(0, 5) + " s");
}

void prove_gp(Check& c) {
  const RunReport r = run_scenario(make_scenario("prove-gp"));
  c.require(r.outcome == Outcome::kGpCompleted, "outcome " + outcome_str(r.outcome));
  const SimWorld end = replay_path(build_world(r.scenario), r.explore.stop_path);
  c.require(end.monitor().wakeups() > 0, "wakeme callback never ran");
}

void bug1(Check& c) {
  const Scenario s = make_scenario("bug1");
  const RunReport r = run_scenario(s);
  c.require(r.outcome == Outcome::kAssertionViolated, "outcome " + outcome_str(r.outcome));
  c.require(replays_to(s, r), "counterexample does not replay");
}

void hangs(Check& c) {
  for (const char* name : {"bug2", "bug3", "bug4", "bug5", "bug6"}) {
    const RunReport r = run_scenario(make_scenario(name));
    c.require(r.outcome == Outcome::kGpHung, std::string(name) + " " + outcome_str(r.outcome));
    c.require(r.explore.deadlocks > 0 && r.explore.complete == 0,
              std::string(name) + ": updater not blocked on every maximal schedule");
  }
}

void bug7(Check& c) {
  const RunReport two = run_scenario(make_scenario("bug7", 2));
  c.require(two.outcome == Outcome::kAssertionViolated, "2R " + outcome_str(two.outcome));
  const RunReport one = run_scenario(make_scenario("bug7", 1));
  c.require(one.outcome == Outcome::kAssertionViolated || one.outcome == Outcome::kBugMissed,
            "1R " + outcome_str(one.outcome));
  Scenario fixed = make_scenario("bug7", 1);
  fixed.tick_model = TickModel::kFixed;
  const RunReport pinned = run_scenario(fixed);
  c.require(pinned.outcome == Outcome::kBugMissed, "1R fixed ticks " + outcome_str(pinned.outcome));
  c.note("1R injected ticks: " + outcome_str(one.outcome) +
         ", 1R fixed ticks: " + outcome_str(pinned.outcome));
}

// Message passing with an exhaustive store-buffer enumeration as the oracle.
using Regs = std::array<int, 2>;

std::set<Regs> oracle_mp(MemoryModel model) {
  struct St {
    int pc0 = 0, pc1 = 0;
    std::array<int, 2> mem{};
    std::deque<std::pair<int, int>> buf;
    Regs regs{};
  };
  std::set<Regs> out;
  std::function<void(const St&)> go = [&](const St& s) {
    if (s.pc0 == 2 && s.pc1 == 2) {
      out.insert(s.regs);
      return;
    }
    if (s.pc0 < 2) {  // writer: x = 1; y = 1
      St n = s;
      if (model == MemoryModel::kSC) n.mem[s.pc0] = 1;
      else n.buf.emplace_back(s.pc0, 1);
      ++n.pc0;
      go(n);
    }
    if (s.pc1 < 2) {  // reader: r0 = y; r1 = x
      St n = s;
      n.regs[s.pc1] = s.mem[s.pc1 == 0 ? 1 : 0];
      ++n.pc1;
      go(n);
    }
    for (std::size_t i = 0; i < s.buf.size(); ++i) {
      if (model == MemoryModel::kTSO && i > 0) break;
      St n = s;
      n.mem[s.buf[i].first] = s.buf[i].second;
      n.buf.erase(n.buf.begin() + static_cast<std::ptrdiff_t>(i));
      go(n);
    }
  };
  go(St{});
  return out;
}

void litmus(Check& c) {
  for (MemoryModel m : {MemoryModel::kSC, MemoryModel::kTSO, MemoryModel::kPSO}) {
    WorldConfig cfg;
    cfg.memory_model = m;
    SimWorld w(cfg);
    w.add_thread("writer", 0, {ins::store(CellId::litmus(0), 1), ins::store(CellId::litmus(1), 1)});
    w.add_thread("reader", 1, {ins::load(CellId::litmus(1), 0), ins::load(CellId::litmus(0), 1)});
    std::set<Regs> seen;
    const auto st = explore_dfs(w, ExploreLimits{.prune = false}, [&](const SimWorld& world, NodeKind k) {
      if (k == NodeKind::kComplete) seen.insert({world.threads()[1].regs[0], world.threads()[1].regs[1]});
      return false;
    });
    const auto want = oracle_mp(m);
    const std::string name(memory_model_name(m));
    c.require(seen == want, name + ": outcomes differ from oracle");
    const bool stale = seen.contains(Regs{1, 0});
    c.require(stale == (m == MemoryModel::kPSO), name + ": stale read " + (stale ? "found" : "missing"));
    c.note(name + " " + std::to_string(st.schedules) + " schedules" + (stale ? " (stale)" : ""));
  }
}

void native(Check& c) {
  auto run = [](const char* name, unsigned readers) {
    Scenario s = make_scenario(name, readers);
    s.mode = Mode::kNative;
    s.runs = 200;
    s.timeout_ms = 2000;
    return run_native(s);
  };
  const NativeStats prove = run("prove", 1);
  c.require(prove.successful == 200, "prove successful " + std::to_string(prove.successful));
  for (const char* name : {"bug2", "bug3", "bug4", "bug5", "bug6"}) {
    const NativeStats n = run(name, 1);
    c.require(n.timeout == 200, std::string(name) + " timeouts " + std::to_string(n.timeout));
  }
  const NativeStats b1 = run("bug1", 1);
  c.require(b1.failing >= 1, "bug1 never failed");
  const NativeStats b7 = run("bug7", 2);
  c.require(b7.failing >= 1, "bug7 2R never failed");
  c.note("bug1 failing " + std::to_string(b1.failing) + "/200, bug7 2R failing " +
         std::to_string(b7.failing) + "/200");
}

void invariants(Check& c) {
  const SimWorld root = build_world(make_scenario("prove"));
  std::mt19937_64 seeds(2024);
  std::uint64_t steps = 0, failures = 0;
  while (steps < 10'000) {
    SimWorld w = root;
    std::mt19937_64 rng(seeds());
    for (;;) {
      const auto choices = w.enabled();
      if (choices.empty() || w.steps() >= 400) break;
      w.step(choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)]);
      ++steps;
      try {
        w.check();
      } catch (const InvariantViolation&) {
        ++failures;
      }
      if (w.monitor().clear_once_violations() + w.monitor().counter_violations() > 0) ++failures;
    }
  }
  c.require(failures == 0, std::to_string(failures) + " invariant failures");
  c.note(std::to_string(steps) + " steps checked");
}

void determinism(Check& c) {
  Scenario s = make_scenario("prove");
  s.mode = Mode::kRandom;
  s.seed = 42;
  s.runs = 100;
  std::set<std::uint64_t> hashes;
  for (int i = 0; i < 3; ++i) {
    TraceSink sink;
    hashes.insert(run_scenario(s, &sink).trace_hash);
  }
  c.require(hashes.size() == 1, "trace hashes differ across repeats");
  for (auto [name, readers] : {std::pair{"bug1", 1u}, std::pair{"bug7", 2u}, std::pair{"prove-gp", 1u}}) {
    const Scenario cs = make_scenario(name, readers);
    const RunReport r = run_scenario(cs);
    c.require(replays_to(cs, r), std::string(name) + " counterexample does not replay");
  }
}

void geometry(Check& c) {
  const TreeGeometry big = compute_geometry(4096, 16, 64);
  c.require(big.levels == std::vector<std::size_t>{1, 4, 256}, "4096 CPUs: wrong level sizes");
  std::mt19937_64 rng(10);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t leaf = 2 + rng() % 63;
    const std::size_t inner = 2 + rng() % 63;
    const std::size_t cpus = 1 + rng() % 100'000;
    TreeGeometry g;
    try {
      g = compute_geometry(cpus, leaf, inner);
    } catch (const ConfigError&) {
      // Only legal when four levels cannot cover the CPUs.
      std::size_t cap = leaf;
      for (std::size_t l = 1; l < kMaxTreeLevels; ++l) cap *= inner;
      if (cap >= cpus) ++bad;
      continue;
    }
    bool ok = g.levels.front() == 1 && g.levels.size() <= kMaxTreeLevels &&
              g.levels.back() == (cpus + leaf - 1) / leaf && g.cpu_to_leaf.size() == cpus;
    std::size_t total = 0;
    for (std::size_t l = 0; l < g.levels.size(); ++l) {
      ok = ok && g.level_start[l] == total;
      if (l > 0) ok = ok && g.levels[l - 1] == (g.levels[l] + inner - 1) / inner;
      total += g.levels[l];
    }
    ok = ok && g.total_nodes == total;
    for (std::size_t n = 1; ok && n < total; ++n) {
      const auto p = parent_of(g, n);
      ok = p && g.level_of(*p) + 1 == g.level_of(n);
    }
    for (std::size_t cpu = 0; ok && cpu < cpus; cpu += 1 + cpus / 50) {
      const std::size_t node = g.cpu_to_leaf[cpu];
      ok = g.is_leaf(node) && g.grplo(node) <= cpu && cpu <= g.grphi(node);
    }
    if (!ok) ++bad;
  }
  c.require(bad == 0, std::to_string(bad) + " of 1000 random trees broke an invariant");
}

}  // namespace

int main() {
  const std::array<std::pair<const char*, void (*)(Check&)>, 10> criteria = {{
      {"prove scenario is safe", prove_safe},
      {"grace period completes", prove_gp},
      {"bug1 violates the litmus assertion", bug1},
      {"bugs 2-6 hang the grace period", hangs},
      {"bug7 violation and fixed-tick miss", bug7},
      {"message-passing litmus matches oracle", litmus},
      {"native runs", native},
      {"invariants over 10000 random steps", invariants},
      {"deterministic traces and replay", determinism},
      {"tree geometry", geometry},
  }};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.ok();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " ("
              << seconds_since(t0) << " s)";
    const auto detail = c.summary();
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
  }
  return failed;
}
