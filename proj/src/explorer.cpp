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

#include "stmc/explorer.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "stmc/dispatch.hpp"

namespace stmc {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Two independently seeded 64-bit digests of a tid sequence.
struct Digest {
  std::uint64_t a = 0x243f6a8885a308d3ull;
  std::uint64_t b = 0x13198a2e03707344ull;

  void add(std::uint64_t v) {
    a = splitmix(a ^ v);
    b = splitmix(b + (v * 0x2545f4914f6cdd1dull) + 1);
  }
  std::pair<std::uint64_t, std::uint64_t> value() const { return {a, b}; }
};

Digest digest_prefix(const std::vector<ThreadId>& trace, std::size_t depth) {
  Digest d;
  for (std::size_t i = 0; i < depth; ++i) d.add(trace[i].value());
  d.add(0xffffffffull + depth);
  return d;
}

}  // namespace

// ---- store -----------------------------------------------------------------

void BacktrackStore::add(const std::vector<ThreadId>& prefix, ThreadId tid, std::uint64_t discovery_iteration,
                         std::optional<ThreadId> executed) {
  auto it = points_.find(prefix);
  if (it == points_.end()) {
    BacktrackPoint p;
    p.depth = prefix.size();
    p.prefix = prefix;
    p.discovery_iteration = discovery_iteration;
    it = points_.emplace(prefix, std::move(p)).first;
  }
  BacktrackPoint& p = it->second;
  if (executed && *executed != tid) {
    p.done.insert(*executed);
    p.pending.erase(*executed);
  }
  if (!p.done.contains(tid)) p.pending.insert(tid);
  if (p.pending.empty()) points_.erase(it);
}

void BacktrackStore::insert(BacktrackPoint point) {
  point.validate();
  if (point.pending.empty()) return;
  auto it = points_.find(point.prefix);
  if (it == points_.end()) {
    points_.emplace(point.prefix, std::move(point));
    return;
  }
  BacktrackPoint& p = it->second;
  for (ThreadId t : point.done) {
    p.done.insert(t);
    p.pending.erase(t);
  }
  for (ThreadId t : point.pending) {
    if (!p.done.contains(t)) p.pending.insert(t);
  }
  if (p.pending.empty()) points_.erase(it);
}

const BacktrackPoint& BacktrackStore::select() const {
  if (points_.empty()) throw std::out_of_range("backtrack store is empty");
  const BacktrackPoint* best = nullptr;
  for (const auto& [key, p] : points_) {
    // Map order is prefix order, so the first among equals keeps the smaller prefix.
    if (!best || p.depth > best->depth ||
        (p.depth == best->depth && p.discovery_iteration > best->discovery_iteration)) {
      best = &p;
    }
  }
  return *best;
}

ThreadId BacktrackStore::branch(const std::vector<ThreadId>& prefix) {
  auto it = points_.find(prefix);
  if (it == points_.end() || it->second.pending.empty()) {
    throw std::logic_error("branch on a point that is not in the store");
  }
  BacktrackPoint& p = it->second;
  ThreadId tid = *p.pending.begin();
  p.pending.erase(p.pending.begin());
  p.done.insert(tid);
  if (p.pending.empty()) points_.erase(it);
  return tid;
}

const BacktrackPoint* BacktrackStore::find(const std::vector<ThreadId>& prefix) const {
  auto it = points_.find(prefix);
  return it == points_.end() ? nullptr : &it->second;
}

std::vector<BacktrackPoint> BacktrackStore::points() const {
  std::vector<BacktrackPoint> out;
  out.reserve(points_.size());
  for (const auto& [key, p] : points_) out.push_back(p);
  return out;
}

void BacktrackStore::save(const fs::path& path) const {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& [key, p] : points_) out << dispatch::encode_point(p) << '\n';
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

BacktrackStore BacktrackStore::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  BacktrackStore store;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) store.insert(dispatch::decode_point(line));
  }
  return store;
}

// ---- config / report ---------------------------------------------------------

void ExplorationConfig::validate() const {
  if (node_count < 1) throw UsageError("node count must be at least 1");
}

std::size_t effective_bound(const ProgramHandle& program, const ExplorationConfig& config) {
  if (config.bound > 0) return config.bound;
  if (program.partitions.empty()) return 1000;
  return sched::estimate_bound(program.partitions) * 10;
}

std::set<ViolationKind> ExplorationReport::kinds() const {
  std::set<ViolationKind> out;
  for (const ViolationReport& v : violations) out.insert(v.kind);
  return out;
}

void ExplorationReport::merge(const ExplorationReport& other) {
  iterations_run += other.iterations_run;
  bound_warnings += other.bound_warnings;
  points_explored += other.points_explored;
  abandoned += other.abandoned;
  duplicates += other.duplicates;
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

// ---- explorer ----------------------------------------------------------------

Explorer::Explorer(const ProgramHandle& program, ExplorationConfig config, std::uint32_t node_id)
    : program_(program),
      config_(std::move(config)),
      node_id_(node_id),
      bound_(effective_bound(program_, config_)),
      tracer_(config_.out_dir, node_id, config_.keep_all_traces),
      seen_(std::make_shared<Seen>()) {
  config_.validate();
  // Worker nodes number their iterations after the master's iteration 0.
  next_iteration_ = node_id == 0 ? 0 : 1;
}

struct Explorer::Seen {
  struct Hash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& d) const {
      return static_cast<std::size_t>(d.first ^ (d.second * 0x9e3779b97f4a7c15ull));
    }
  };
  std::mutex mu;
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, Hash> pairs;
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, Hash> traces;
};

Explorer::~Explorer() = default;

void Explorer::run_initial() {
  run_iteration(config_.seed_trace, std::nullopt);
  save_store();
}

void Explorer::seed(const std::vector<BacktrackPoint>& points) {
  for (const BacktrackPoint& p : points) {
    store_.insert(p);
    for (ThreadId t : p.done) claim(p.prefix, p.depth, t);
    for (ThreadId t : p.pending) claim(p.prefix, p.depth, t);
  }
}

void Explorer::run_store() {
  std::uint64_t since_save = 0;
  while (!store_.empty()) {
    const BacktrackPoint& point = store_.select();
    std::vector<ThreadId> prefix = point.prefix;
    ThreadId tid = store_.branch(prefix);
    ++report_.points_explored;
    run_iteration(prefix, tid);
    if (++since_save == 256) {
      save_store();
      since_save = 0;
    }
  }
  save_store();
}

void Explorer::save_store() const {
  store_.save(config_.out_dir / ("btstore.node" + std::to_string(node_id_)));
}

bool Explorer::claim(const std::vector<ThreadId>& trace, std::size_t depth, ThreadId tid) {
  Digest d = digest_prefix(trace, depth);
  d.add(tid.value());
  std::lock_guard<std::mutex> g(seen_->mu);
  return seen_->pairs.insert(d.value()).second;
}

void Explorer::run_iteration(const std::vector<ThreadId>& prefix, std::optional<ThreadId> force) {
  ExecutionOptions options;
  options.prefix = prefix;
  options.force = force;
  options.sleep_sets = config_.dpor_enabled;
  options.bound = bound_;
  options.race_enabled = config_.race_enabled;
  options.strict_races = config_.strict_races;

  ExecutionResult result;
  try {
    result = execute(program_, options);
  } catch (const ReplayDivergence& e) {
    if (!force) throw;
    throw ProtocolError("backtrack store is corrupt: prefix of depth " + std::to_string(prefix.size()) +
                        " does not replay (" + e.what() + ")");
  }
  if (force) {
    bool followed = result.steps.size() >= prefix.size();
    for (std::size_t i = 0; followed && i < prefix.size(); ++i) followed = result.steps[i].tid == prefix[i];
    if (!followed) {
      throw ProtocolError("backtrack store is corrupt: prefix of depth " + std::to_string(prefix.size()) +
                          " does not replay step for step");
    }
  }
  if (result.outcome == Outcome::Abandoned) {
    ++report_.abandoned;
    return;
  }
  std::vector<ThreadId> trace = result.trace();
  Digest whole;
  for (ThreadId t : trace) whole.add(t.value());
  bool fresh;
  {
    std::lock_guard<std::mutex> g(seen_->mu);
    fresh = seen_->traces.insert(whole.value()).second;
  }
  if (!fresh) {
    ++report_.duplicates;
    return;
  }

  std::uint64_t iteration = next_iteration_++;
  ++report_.iterations_run;
  absorb(result, iteration);

  IterationRecord record{iteration, &result, {}};
  auto add_violation = [&](ViolationKind kind, tracer::OutcomeKind file_kind, std::vector<ThreadId> steps,
                           std::optional<RaceDetail> detail) {
    fs::path file = tracer_.write_violation(file_kind, iteration, steps);
    ViolationReport v{kind, iteration, Trace{std::move(steps), iteration}, detail, file.filename().string()};
    report_.violations.push_back(std::move(v));
    record.reported.push_back(kind);
  };

  // A race announced inside the replayed prefix was already reported by
  // the iteration that discovered this prefix.
  if (result.race && !(force && result.race->at_step <= prefix.size())) {
    std::vector<ThreadId> upto(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(result.race->at_step));
    add_violation(ViolationKind::DataRace, tracer::OutcomeKind::DataRace, std::move(upto), result.race->detail);
  }
  switch (result.outcome) {
    case Outcome::Deadlock:
      add_violation(ViolationKind::Deadlock, tracer::OutcomeKind::Deadlock, trace, std::nullopt);
      break;
    case Outcome::Livelock:
      add_violation(ViolationKind::Livelock, tracer::OutcomeKind::Livelock, trace, std::nullopt);
      break;
    case Outcome::BoundWarning:
      ++report_.bound_warnings;
      if (config_.keep_all_traces) tracer_.write_violation(tracer::OutcomeKind::BoundWarning, iteration, trace);
      break;
    case Outcome::NormalEnd:
      if (config_.keep_all_traces) tracer_.write_violation(tracer::OutcomeKind::NormalEnd, iteration, trace);
      break;
    case Outcome::Abandoned:
      break;
  }
  if (observer_) observer_(record);
}

void Explorer::absorb(const ExecutionResult& result, std::uint64_t iteration) {
  std::vector<ThreadId> trace = result.trace();
  dpor::ExecutionLog log;
  log.reserve(result.steps.size());
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const sched::StepRecord& s = result.steps[i];
    // Enabled in the transition-system sense: the op would progress. A
    // candidate whose waiting op would yield cannot be moved there.
    std::map<ThreadId, VisibleOp> enabled;
    for (const auto& [t, op] : s.enabled) {
      if (s.ready.contains(t)) enabled.emplace(t, op);
    }
    log.push_back(dpor::LoggedStep{i, s.op, std::move(enabled)});
    claim(trace, i, s.tid);
    std::set<dpor::Addition> additions =
        config_.dpor_enabled ? dpor::on_execute(log) : dpor::all_alternatives(log);
    for (ThreadId q : s.slept) additions.insert(dpor::Addition{i, q});
    for (const auto& [depth, tid] : additions) {
      if (result.steps[depth].asleep.contains(tid) || !claim(trace, depth, tid)) continue;
      std::vector<ThreadId> prefix(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(depth));
      store_.add(prefix, tid, iteration, trace[depth]);
    }
  }
  if (!config_.dpor_enabled || result.outcome != Outcome::Deadlock) return;
  // Ops that never ran (blocked at a deadlock, cut by the bound) still race
  // with earlier steps for the same object.
  for (const auto& [tid, op] : result.final_pending) {
    log.push_back(dpor::LoggedStep{log.size(), op, {}});
    for (const auto& [depth, who] : dpor::on_execute(log)) {
      if (result.steps[depth].asleep.contains(who) || !claim(trace, depth, who)) continue;
      std::vector<ThreadId> prefix(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(depth));
      store_.add(prefix, who, iteration, trace[depth]);
    }
    log.pop_back();
  }
}

ExplorationReport explore(const ProgramHandle& program, const ExplorationConfig& config, IterationObserver observer) {
  config.validate();
  if (config.node_count > 1) return dispatch::run_in_process(program, config, std::move(observer));
  Explorer explorer(program, config, 0);
  explorer.set_observer(std::move(observer));
  explorer.run_initial();
  explorer.run_store();
  tracer::write_report(config.out_dir, explorer.report().violations);
  return explorer.report();
}

}  // namespace stmc
