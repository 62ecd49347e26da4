#pragma once

// Brute-force reference for two-thread store/load litmus programs under SC,
// TSO and PSO, written without any of the simulator's machinery.

#include <array>
#include <deque>
#include <set>
#include <vector>

#include "rcusim/sim.hpp"

namespace rcusim::testing {

struct LitmusOp {
  bool is_store;
  int cell;
  int value;  // store value, or destination register for loads
};

using LitmusThread = std::vector<LitmusOp>;
using Outcome2 = std::array<std::array<int, 2>, 2>;  // [thread][register]

class LitmusOracle {
 public:
  LitmusOracle(std::array<LitmusThread, 2> threads, MemoryModel model)
      : threads_(std::move(threads)), model_(model) {}

  std::set<Outcome2> outcomes() {
    State s{};
    walk(s);
    return found_;
  }

 private:
  struct State {
    std::array<std::size_t, 2> pc{};
    std::array<int, 2> mem{};
    std::array<std::deque<std::pair<int, int>>, 2> buf;
    Outcome2 regs{};
  };

  void walk(const State& s) {
    const bool finished = s.pc[0] == threads_[0].size() && s.pc[1] == threads_[1].size();
    if (finished) {
      found_.insert(s.regs);
      return;
    }
    for (int t = 0; t < 2; ++t) {
      if (s.pc[t] == threads_[t].size()) continue;
      State n = s;
      const LitmusOp& op = threads_[t][s.pc[t]];
      if (op.is_store) {
        if (model_ == MemoryModel::kSC) n.mem[op.cell] = op.value;
        else n.buf[t].emplace_back(op.cell, op.value);
      } else {
        int v = s.mem[op.cell];
        for (const auto& [c, val] : s.buf[t]) {
          if (c == op.cell) v = val;  // newest own store wins
        }
        n.regs[t][op.value] = v;
      }
      ++n.pc[t];
      walk(n);
    }
    for (int t = 0; t < 2; ++t) {
      const auto& b = s.buf[t];
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (i > 0 && model_ == MemoryModel::kTSO) break;
        bool oldest_for_cell = true;
        for (std::size_t j = 0; j < i; ++j) oldest_for_cell &= b[j].first != b[i].first;
        if (!oldest_for_cell) continue;
        State n = s;
        n.mem[b[i].first] = b[i].second;
        n.buf[t].erase(n.buf[t].begin() + static_cast<std::ptrdiff_t>(i));
        walk(n);
      }
    }
  }

  std::array<LitmusThread, 2> threads_;
  MemoryModel model_;
  std::set<Outcome2> found_;
};

/// Message passing: writer stores x then y, reader loads y then x.
inline std::array<LitmusThread, 2> message_passing() {
  return {LitmusThread{{true, 0, 1}, {true, 1, 1}}, LitmusThread{{false, 1, 0}, {false, 0, 1}}};
}
/// Store buffering: each side stores its own cell then loads the other.
inline std::array<LitmusThread, 2> store_buffering() {
  return {LitmusThread{{true, 0, 1}, {false, 1, 0}}, LitmusThread{{true, 1, 1}, {false, 0, 0}}};
}

inline Program to_program(const LitmusThread& t) {
  Program p;
  for (const auto& op : t) {
    p.push_back(op.is_store ? ins::store(CellId::litmus(op.cell), op.value)
                            : ins::load(CellId::litmus(op.cell), static_cast<std::uint8_t>(op.value)));
  }
  return p;
}

inline SimWorld litmus_world(const std::array<LitmusThread, 2>& threads, MemoryModel model) {
  WorldConfig cfg;
  cfg.memory_model = model;
  SimWorld w(cfg);
  w.add_thread("t0", 0, to_program(threads[0]));
  w.add_thread("t1", 1, to_program(threads[1]));
  return w;
}

inline Outcome2 outcome_of(const SimWorld& w) {
  Outcome2 o{};
  for (int t = 0; t < 2; ++t) {
    for (int r = 0; r < 2; ++r) o[t][r] = w.threads()[t].regs[r];
  }
  return o;
}

}  // namespace rcusim::testing
