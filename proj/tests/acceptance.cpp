// Copyright 2026 The stmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Runs the acceptance criteria against the library and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "stmc/corpus.hpp"
#include "stmc/explorer.hpp"
#include "stmc/tracer.hpp"
#include "temp_dir.hpp"

using namespace stmc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<ThreadId> tids(std::initializer_list<std::uint32_t> l) {
  std::vector<ThreadId> out;
  for (std::uint32_t t : l) out.emplace_back(t);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  ExplorationReport report;
  fs::path out;
  std::size_t bound = 0;
  std::string program;
};

Run check(const std::string& program, const fs::path& out, bool dpor = true, std::size_t bound = 0,
          std::uint32_t nodes = 1, IterationObserver observer = {}) {
  ExplorationConfig c;
  c.out_dir = out;
  c.dpor_enabled = dpor;
  c.bound = bound;
  c.node_count = nodes;
  const ProgramHandle& p = corpus::find(program);
  Run r{explore(p, c, std::move(observer)), out, effective_bound(p, c), program};
  return r;
}

std::size_t count_kind(const ExplorationReport& r, ViolationKind k) {
  return static_cast<std::size_t>(
      std::ranges::count_if(r.violations, [k](const ViolationReport& v) { return v.kind == k; }));
}

// Shared between criteria: the runs of criteria 1-3 feed 6 and 7.
std::vector<Run> corpus_runs;

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict criterion1(const fs::path& dir) {
  auto t0 = Clock::now();
  Run dpor = check("deadlock-two-mutexes", dir / "c1-dpor");
  Run full = check("deadlock-two-mutexes", dir / "c1-full", false);
  double secs = seconds_since(t0);
  corpus_runs.push_back(dpor);
  bool shape = std::ranges::any_of(dpor.report.violations, [](const ViolationReport& v) {
    return v.kind == ViolationKind::Deadlock && v.trace.steps == tids({0, 0, 1, 2});
  });
  std::size_t dd = count_kind(dpor.report, ViolationKind::Deadlock);
  std::size_t fd = count_kind(full.report, ViolationKind::Deadlock);
  std::ostringstream d;
  d << "deadlocks dpor=" << dd << " no-dpor=" << fd << " executions dpor=" << dpor.report.iterations_run
    << " no-dpor=" << full.report.iterations_run << " [0,0,1,2]=" << (shape ? "yes" : "no") << " time=" << secs
    << "s";
  return {dd >= 1 && fd >= 1 && shape && full.report.iterations_run > dpor.report.iterations_run && secs < 5,
          d.str()};
}

Verdict criterion2(const fs::path& dir) {
  auto t0 = Clock::now();
  Run racy = check("data-race-flag", dir / "c2-racy");
  Run locked = check("data-race-flag-locked", dir / "c2-locked");
  double secs = seconds_since(t0);
  corpus_runs.push_back(racy);
  corpus_runs.push_back(locked);
  // The flag is the program's first (and only) cell.
  bool on_flag = std::ranges::any_of(racy.report.violations, [](const ViolationReport& v) {
    return v.kind == ViolationKind::DataRace && v.race_detail && v.race_detail->object == ObjectId(0) &&
           v.race_detail->readers_pending >= 1 && v.race_detail->writers_pending >= 1;
  });
  std::size_t locked_races = count_kind(locked.report, ViolationKind::DataRace);
  std::ostringstream d;
  d << "race on flag=" << (on_flag ? "yes" : "no") << " locked-variant races=" << locked_races << " time=" << secs
    << "s";
  return {on_flag && locked_races == 0 && secs < 5, d.str()};
}

// Per philosopher, lock(first) try(second) unlock(first) runs in the trace.
std::map<ThreadId, int> failed_rounds(const ExecutionResult& r) {
  std::map<ThreadId, std::vector<VisibleOp>> per;
  for (const auto& s : r.steps) per[s.tid].push_back(s.op);
  std::map<ThreadId, int> out;
  for (const auto& [t, ops] : per) {
    for (std::size_t i = 0; i + 2 < ops.size(); ++i) {
      const VisibleOp &a = ops[i], &b = ops[i + 1], &c = ops[i + 2];
      if (a.token == Token::Waiting && a.touches_object() && b.token == Token::NonBlocking &&
          b.touches_object() && b.target != a.target && c.token == Token::NonBlocking && c.target == a.target) {
        ++out[t];
      }
    }
  }
  return out;
}

Verdict criterion3(const fs::path& dir) {
  auto t0 = Clock::now();
  std::size_t with_cycle = 0;
  std::set<std::size_t> lengths;
  Run run = check("livelock-philosophers", dir / "c3", true, 25, 1, [&](const IterationRecord& rec) {
    if (rec.result->outcome != Outcome::Livelock) return;
    lengths.insert(rec.result->steps.size());
    auto rounds = failed_rounds(*rec.result);
    if (rounds[ThreadId(1)] >= 2 && rounds[ThreadId(2)] >= 2) ++with_cycle;
  });
  double secs = seconds_since(t0);
  corpus_runs.push_back(run);
  std::size_t n = count_kind(run.report, ViolationKind::Livelock);
  bool length_ok = std::ranges::any_of(run.report.violations, [](const ViolationReport& v) {
    return v.kind == ViolationKind::Livelock && (v.trace.steps.size() == 25 || v.trace.steps.size() == 26);
  });
  std::ostringstream d;
  d << "livelocks=" << n << " lengths={";
  for (std::size_t l : lengths) d << ' ' << l;
  d << " } with both philosophers cycling=" << with_cycle << " time=" << secs << "s";
  return {n >= 1 && length_ok && with_cycle >= 1 && secs < 10, d.str()};
}

Verdict criterion4(const fs::path& dir) {
  auto t0 = Clock::now();
  const int programs = 300;
  int bad = 0;
  std::string first;
  for (int i = 0; i < programs; ++i) {
    stmc_test::GenProgram g = stmc_test::generate(static_cast<std::uint64_t>(40000 + i));
    stmc_test::Comparison c = stmc_test::compare_with_oracle(g, dir / "c4", true);
    if (!c.equal) {
      if (first.empty()) first = c.detail;
      ++bad;
    }
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "programs=" << programs << " discrepancies=" << bad << " time=" << secs << "s";
  if (!first.empty()) d << " first: " << first;
  return {bad == 0 && secs < 60, d.str()};
}

Verdict criterion5(const fs::path& dir) {
  auto n = [&](const char* p, bool dpor) {
    return check(p, dir / (std::string("c5-") + p + (dpor ? "-d" : "-x")), dpor).report.iterations_run;
  };
  auto id = n("independent-writes", true), ix = n("independent-writes", false);
  auto dd = n("dependent-writes", true), dx = n("dependent-writes", false);
  std::ostringstream d;
  d << "independent dpor=" << id << " exhaustive=" << ix << " dependent dpor=" << dd << " exhaustive=" << dx;
  return {id == 1 && ix == 2 && dd == 2 && dx == 2, d.str()};
}

Verdict criterion6() {
  std::size_t replayed = 0, mismatched = 0;
  std::string first;
  for (const Run& run : corpus_runs) {
    const ProgramHandle& p = corpus::find(run.program);
    ExecutionOptions o;
    o.bound = run.bound;
    for (const ViolationReport& v : run.report.violations) {
      Trace t = tracer::parse_trace(run.out / "traces" / v.trace_file);
      tracer::ReplayReport a = tracer::replay(p, t, o);
      tracer::ReplayReport b = tracer::replay(p, t, o);
      auto kinds = a.violation_kinds();
      bool same_kind = std::ranges::find(kinds, v.kind) != kinds.end();
      ++replayed;
      if (!same_kind || a.op_log != b.op_log) {
        ++mismatched;
        if (first.empty()) first = run.program + "/" + v.trace_file;
      }
    }
  }
  std::ostringstream d;
  d << "replayed=" << replayed << " mismatched=" << mismatched;
  if (!first.empty()) d << " first=" << first;
  return {replayed > 0 && mismatched == 0, d.str()};
}

Verdict criterion7() {
  static const std::regex line("([1-9][0-9]*) (0|[1-9][0-9]*)\\.");
  std::size_t files = 0, bad = 0;
  bool golden = false;
  for (const Run& run : corpus_runs) {
    if (run.program == "livelock-philosophers") continue;
    for (const auto& e : fs::directory_iterator(run.out / "traces")) {
      ++files;
      std::string text = slurp(e.path());
      std::istringstream in(text);
      std::string l;
      std::size_t expect = 1;
      bool ok = !text.empty() && text.back() == '\n';
      while (ok && std::getline(in, l)) {
        std::smatch m;
        ok = std::regex_match(l, m, line) && std::stoul(m[1]) == expect++;
      }
      if (!ok) ++bad;
      if (e.path().filename() == "bt_0_deadlock") golden = text == "1 0.\n2 0.\n3 1.\n4 2.\n";
    }
  }
  std::ostringstream d;
  d << "files=" << files << " malformed=" << bad << " deadlock golden=" << (golden ? "match" : "differs");
  return {files > 0 && bad == 0 && golden, d.str()};
}

Verdict criterion8(const fs::path& dir) {
  auto t0 = Clock::now();
  bool same = true;
  std::ostringstream d;
  for (const char* p : {"deadlock-two-mutexes", "livelock-philosophers"}) {
    std::size_t bound = std::string(p) == "livelock-philosophers" ? 25 : 0;
    std::set<ViolationKind> kinds1;
    std::set<std::vector<ThreadId>> union1;
    for (std::uint32_t nodes : {1u, 2u, 4u}) {
      Run r = check(p, dir / ("c8-" + std::string(p) + "-" + std::to_string(nodes)), true, bound, nodes);
      std::set<std::vector<ThreadId>> u;
      for (const ViolationReport& v : r.report.violations) u.insert(v.trace.steps);
      if (nodes == 1) {
        kinds1 = r.report.kinds();
        union1 = u;
        d << p << " traces=" << u.size() << ' ';
      } else {
        same = same && r.report.kinds() == kinds1 && u == union1;
      }
    }
  }
  double secs = seconds_since(t0);
  d << "identical=" << (same ? "yes" : "no") << " time=" << secs << "s";
  return {same && secs < 30, d.str()};
}

// Every thread ready at each of W consecutive steps is scheduled among
// them, W being twice the threads live when the window opens.
bool window_fair(const ExecutionResult& r) {
  std::map<ThreadId, std::size_t> first, last;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    auto see = [&](ThreadId t) {
      first.try_emplace(t, i);
      last[t] = i;
    };
    see(r.steps[i].tid);
    for (const auto& [t, op] : r.steps[i].enabled) see(t);
  }
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    std::size_t live = 0;
    for (const auto& [t, f] : first) live += f <= i && i <= last[t];
    std::size_t w = 2 * live;
    if (i + w > r.steps.size()) break;
    for (ThreadId t : r.steps[i].ready) {
      bool always = true, picked = false;
      for (std::size_t j = i; j < i + w; ++j) {
        always = always && r.steps[j].ready.contains(t);
        picked = picked || r.steps[j].tid == t;
      }
      if (always && !picked) return false;
    }
  }
  return true;
}

Verdict criterion9(const fs::path& dir) {
  std::size_t executions = 0, warnings = 0, unfair = 0, unterminated = 0;
  Run run = check("spin-flag", dir / "c9", true, 0, 1, [&](const IterationRecord& rec) {
    ++executions;
    if (rec.result->outcome == Outcome::BoundWarning) ++warnings;
    if (rec.result->outcome != Outcome::NormalEnd) ++unterminated;
    if (!window_fair(*rec.result)) ++unfair;
  });
  std::ostringstream d;
  d << "executions=" << executions << " bound_warnings=" << warnings + run.report.bound_warnings
    << " not terminated=" << unterminated << " unfair=" << unfair;
  return {executions > 0 && warnings == 0 && run.report.bound_warnings == 0 && unterminated == 0 && unfair == 0,
          d.str()};
}

Verdict criterion10() {
  stmc_test::RaceProperty r = stmc_test::check_race_protocol(20260, 500);
  std::ostringstream d;
  d << "events=" << r.events << " races=" << r.races;
  if (!r.ok) d << " failure: " << r.failure;
  return {r.ok && r.races > 0, d.str()};
}

}  // namespace

int main() {
  stmc_test::TempDir dir("stmc-acceptance");
  std::vector<std::function<Verdict()>> criteria{
      [&] { return criterion1(dir.path()); }, [&] { return criterion2(dir.path()); },
      [&] { return criterion3(dir.path()); }, [&] { return criterion4(dir.path()); },
      [&] { return criterion5(dir.path()); }, [] { return criterion6(); },
      [] { return criterion7(); },            [&] { return criterion8(dir.path()); },
      [&] { return criterion9(dir.path()); }, [] { return criterion10(); },
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return failures;
}
