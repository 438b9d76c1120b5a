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

#ifndef STMC_RACE_HPP
#define STMC_RACE_HPP

#include <functional>
#include <map>
#include <optional>

#include "stmc/model.hpp"

namespace stmc::race {

enum class Verdict { NoRace, Race };

/// Pending-access counters of one shared object.
struct RaceCounters {
  std::uint32_t readers = 0;
  std::uint32_t writers = 0;
  friend bool operator==(const RaceCounters&, const RaceCounters&) = default;
};

/// A race iff at least one pending reader and one pending writer.
Verdict check(std::uint32_t readers, std::uint32_t writers);

/// Writer/writer overlap, reported only in strict mode.
Verdict check_strict(std::uint32_t readers, std::uint32_t writers);

/// Monitors one registered object. Checks run on increments only.
class Worker {
 public:
  explicit Worker(ObjectId oid) : oid_(oid) {}

  std::optional<RaceDetail> pending(AccessKind kind, bool strict);
  void complete(AccessKind kind);
  const RaceCounters& counters() const { return counters_; }

 private:
  ObjectId oid_;
  RaceCounters counters_;
};

/// Routes access notifications to the per-object workers. Workers exist
/// from registration until on_finish().
class Detector {
 public:
  using RaceSink = std::function<void(const RaceDetail&)>;

  explicit Detector(bool strict = false) : strict_(strict) {}

  void set_sink(RaceSink sink) { sink_ = std::move(sink); }

  void on_register(ObjectId oid);
  /// Returns the race found by the check, if any; the sink sees it too.
  std::optional<RaceDetail> on_pending(ObjectId oid, AccessKind kind);
  void on_complete(ObjectId oid, AccessKind kind);
  void on_finish() { workers_.clear(); }

  bool monitors(ObjectId oid) const { return workers_.contains(oid); }
  RaceCounters counters(ObjectId oid) const;
  std::size_t worker_count() const { return workers_.size(); }

 private:
  Worker& route(ObjectId oid);

  bool strict_;
  std::map<ObjectId, Worker> workers_;
  RaceSink sink_;
};

}  // namespace stmc::race

#endif  // STMC_RACE_HPP
