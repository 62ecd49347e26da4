#include "rcusim/trace.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <json.hpp>

namespace rcusim {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void TraceSink::record(std::uint64_t step, std::size_t cpu, std::string_view op,
                       std::initializer_list<TraceArg> args, std::uint64_t gpnum,
                       std::uint64_t completed) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["cpu"] = cpu;
  j["op"] = op;
  auto& a = j["args"] = nlohmann::ordered_json::object();
  for (const auto& arg : args) a[std::string(arg.key)] = arg.value;
  j["gpnum"] = gpnum;
  j["completed"] = completed;
  std::string line = j.dump();
  hash_ = fnv1a(line, hash_);
  hash_ = fnv1a("\n", hash_);
  ++records_;
  if (out_) *out_ << line << '\n';
  if (keep_) lines_.push_back(std::move(line));
}

AuditResult audit_trace(std::istream& in) {
  AuditResult r;
  std::map<std::int64_t, std::int64_t> held_by_cpu;   // cpu -> lock
  std::map<std::int64_t, std::int64_t> holder_of;     // lock -> cpu
  std::uint64_t gpnum = 0, completed = 0, last_step = 0;
  const auto report_held = [&](const std::string& when) {
    for (const auto& [lock, cpu] : holder_of) {
      r.problems.push_back("lock " + std::to_string(lock) + " still held by cpu " +
                           std::to_string(cpu) + " at " + when);
    }
    holder_of.clear();
    held_by_cpu.clear();
  };
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++r.records;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      r.problems.push_back("line " + std::to_string(r.records) + ": " + e.what());
      continue;
    }
    const auto where = "record " + std::to_string(r.records) + ": ";
    const std::uint64_t step = j.value("step", std::uint64_t{0});
    if (step < last_step) {
      // Step counter restarted: a new schedule begins.
      report_held("end of schedule before " + where);
      gpnum = completed = 0;
    }
    last_step = step;
    const std::uint64_t g = j.value("gpnum", std::uint64_t{0});
    const std::uint64_t c = j.value("completed", std::uint64_t{0});
    if (g < gpnum) r.problems.push_back(where + "gpnum went backwards");
    if (c < completed) r.problems.push_back(where + "completed went backwards");
    gpnum = g;
    completed = c;

    const std::string op = j.value("op", "");
    if (op != "spin_lock" && op != "spin_unlock") continue;
    const std::int64_t cpu = j.value("cpu", -1);
    const std::int64_t lock = j["args"].value("lock", -1);
    if (op == "spin_lock") {
      ++r.lock_acquires;
      if (held_by_cpu.contains(cpu)) {
        r.problems.push_back(where + "cpu " + std::to_string(cpu) + " takes node lock " +
                             std::to_string(lock) + " while holding " +
                             std::to_string(held_by_cpu[cpu]));
      }
      if (holder_of.contains(lock)) {
        r.problems.push_back(where + "lock " + std::to_string(lock) + " already held");
      }
      held_by_cpu[cpu] = lock;
      holder_of[lock] = cpu;
    } else {
      auto it = holder_of.find(lock);
      if (it == holder_of.end() || it->second != cpu) {
        r.problems.push_back(where + "cpu " + std::to_string(cpu) + " releases lock " +
                             std::to_string(lock) + " it does not hold");
      } else {
        holder_of.erase(it);
        held_by_cpu.erase(cpu);
      }
    }
  }
  report_held("end of trace");
  return r;
}

}  // namespace rcusim
