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

#include "stmc/race.hpp"

#include <string>

namespace stmc::race {

Verdict check(std::uint32_t readers, std::uint32_t writers) {
  return (writers > 0 && readers > 0) ? Verdict::Race : Verdict::NoRace;
}

Verdict check_strict(std::uint32_t readers, std::uint32_t writers) {
  if (check(readers, writers) == Verdict::Race) return Verdict::Race;
  return writers >= 2 ? Verdict::Race : Verdict::NoRace;
}

std::optional<RaceDetail> Worker::pending(AccessKind kind, bool strict) {
  switch (kind) {
    case AccessKind::Read: ++counters_.readers; break;
    case AccessKind::Write: ++counters_.writers; break;
    case AccessKind::DontCare: throw ProtocolError("race worker: dc access");
  }
  Verdict v = strict ? check_strict(counters_.readers, counters_.writers)
                     : check(counters_.readers, counters_.writers);
  if (v == Verdict::NoRace) return std::nullopt;
  return RaceDetail{oid_, counters_.readers, counters_.writers};
}

void Worker::complete(AccessKind kind) {
  std::uint32_t& c = kind == AccessKind::Read ? counters_.readers : counters_.writers;
  if (kind == AccessKind::DontCare) throw ProtocolError("race worker: dc access");
  if (c == 0) {
    throw ProtocolError("race worker: completion without pending access on object " +
                        std::to_string(oid_.value()));
  }
  --c;
}

void Detector::on_register(ObjectId oid) {
  if (!workers_.try_emplace(oid, oid).second) {
    throw ProtocolError("race detector: object " + std::to_string(oid.value()) +
                        " registered twice");
  }
}

Worker& Detector::route(ObjectId oid) {
  auto it = workers_.find(oid);
  if (it == workers_.end()) {
    throw ProtocolError("race detector: no worker for object " + std::to_string(oid.value()));
  }
  return it->second;
}

std::optional<RaceDetail> Detector::on_pending(ObjectId oid, AccessKind kind) {
  auto hit = route(oid).pending(kind, strict_);
  if (hit && sink_) sink_(*hit);
  return hit;
}

void Detector::on_complete(ObjectId oid, AccessKind kind) { route(oid).complete(kind); }

RaceCounters Detector::counters(ObjectId oid) const {
  auto it = workers_.find(oid);
  return it == workers_.end() ? RaceCounters{} : it->second.counters();
}

}  // namespace stmc::race
