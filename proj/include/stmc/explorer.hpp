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

#ifndef STMC_EXPLORER_HPP
#define STMC_EXPLORER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "stmc/dpor.hpp"
#include "stmc/model.hpp"
#include "stmc/runtime.hpp"
#include "stmc/tracer.hpp"

namespace stmc {

/// Backtrack points of one node, keyed by trace prefix (the depth is the
/// prefix length). Stored points always have a nonempty pending set.
class BacktrackStore {
 public:
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  /// Adds `tid` to the pending set of the point at `prefix`, creating it if
  /// needed. No-op when `tid` is already pending or done there. `executed`
  /// is the thread the discovering run took at that point; it counts as done.
  void add(const std::vector<ThreadId>& prefix, ThreadId tid, std::uint64_t discovery_iteration,
           std::optional<ThreadId> executed = std::nullopt);
  /// Inserts a whole point (seeding from a workload or a store file).
  void insert(BacktrackPoint point);

  /// Deepest point; ties go to the latest discovery, then to the smaller
  /// prefix. Throws std::out_of_range on an empty store.
  const BacktrackPoint& select() const;

  /// Moves the smallest pending tid of the point at `prefix` to done and
  /// deletes the point once nothing is pending.
  ThreadId branch(const std::vector<ThreadId>& prefix);

  const BacktrackPoint* find(const std::vector<ThreadId>& prefix) const;
  std::vector<BacktrackPoint> points() const;

  void save(const std::filesystem::path& path) const;
  static BacktrackStore load(const std::filesystem::path& path);

 private:
  std::map<std::vector<ThreadId>, BacktrackPoint> points_;
};

struct ExplorationConfig {
  /// 0 picks ten times the program's partition sum.
  std::size_t bound = 0;
  bool dpor_enabled = true;
  bool race_enabled = true;
  bool strict_races = false;
  std::filesystem::path out_dir = "stmc-out";
  std::uint32_t node_count = 1;
  bool keep_all_traces = false;
  /// Replayed at the start of iteration 0.
  std::vector<ThreadId> seed_trace;

  void validate() const;
};

std::size_t effective_bound(const ProgramHandle& program, const ExplorationConfig& config);

struct ExplorationReport {
  std::uint64_t iterations_run = 0;
  std::vector<ViolationReport> violations;
  std::uint64_t bound_warnings = 0;
  std::uint64_t points_explored = 0;
  /// Forced branches whose thread could not move on arrival.
  std::uint64_t abandoned = 0;
  /// Iterations dropped because their full trace had been seen before.
  std::uint64_t duplicates = 0;

  std::set<ViolationKind> kinds() const;
  void merge(const ExplorationReport& other);
};

struct IterationRecord {
  std::uint64_t iteration = 0;
  const ExecutionResult* result = nullptr;
  /// The violations this iteration added to the report.
  std::vector<ViolationKind> reported;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Explorer for one node: owns the store, runs iterations sequentially.
class Explorer {
 public:
  Explorer(const ProgramHandle& program, ExplorationConfig config, std::uint32_t node_id = 0);
  ~Explorer();

  void set_observer(IterationObserver observer) { observer_ = std::move(observer); }

  /// Iteration 0 in free mode (after the seed trace, if any).
  void run_initial();
  void seed(const std::vector<BacktrackPoint>& points);
  /// Makes this explorer skip pairs and traces already run by `other`, and
  /// the other way round. Call before seeding.
  void share_seen(const Explorer& other) { seen_ = other.seen_; }
  /// Drains the store.
  void run_store();

  BacktrackStore& store() { return store_; }
  const ExplorationReport& report() const { return report_; }
  std::uint32_t node_id() const { return node_id_; }

 private:
  void run_iteration(const std::vector<ThreadId>& prefix, std::optional<ThreadId> force);
  void absorb(const ExecutionResult& result, std::uint64_t iteration);
  /// Records the (prefix, tid) pair; false if it was already recorded.
  bool claim(const std::vector<ThreadId>& trace, std::size_t depth, ThreadId tid);
  void save_store() const;

  const ProgramHandle& program_;
  ExplorationConfig config_;
  std::uint32_t node_id_;
  std::size_t bound_;
  tracer::Tracer tracer_;
  BacktrackStore store_;
  ExplorationReport report_;
  IterationObserver observer_;
  std::uint64_t next_iteration_ = 0;
  // (prefix, tid) pairs already added or executed, and full traces run;
  // shared between in-process nodes.
  struct Seen;
  std::shared_ptr<Seen> seen_;
};

/// Runs the full exploration; with node_count > 1 the iteration-0 points
/// are split over in-process worker nodes. Writes `report.txt` under
/// config.out_dir.
ExplorationReport explore(const ProgramHandle& program, const ExplorationConfig& config,
                          IterationObserver observer = {});

}  // namespace stmc

#endif  // STMC_EXPLORER_HPP
