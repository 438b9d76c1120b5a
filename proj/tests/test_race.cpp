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

#include "doctest.h"
#include "oracle.hpp"
#include "stmc/race.hpp"

using namespace stmc;
using race::Verdict;

TEST_CASE("race check") {
  CHECK(race::check(1, 1) == Verdict::Race);
  CHECK(race::check(2, 0) == Verdict::NoRace);
  CHECK(race::check(0, 2) == Verdict::NoRace);
  CHECK(race::check(0, 0) == Verdict::NoRace);
  CHECK(race::check_strict(0, 2) == Verdict::Race);
  CHECK(race::check_strict(0, 1) == Verdict::NoRace);
  CHECK(race::check_strict(3, 0) == Verdict::NoRace);
}

TEST_CASE("detector routes to per-object workers") {
  race::Detector d;
  std::vector<RaceDetail> sunk;
  d.set_sink([&](const RaceDetail& r) { sunk.push_back(r); });
  d.on_register(ObjectId(0));
  d.on_register(ObjectId(1));
  CHECK_THROWS_AS(d.on_register(ObjectId(1)), ProtocolError);

  CHECK_FALSE(d.on_pending(ObjectId(0), AccessKind::Read));
  CHECK_FALSE(d.on_pending(ObjectId(1), AccessKind::Write));
  auto hit = d.on_pending(ObjectId(0), AccessKind::Write);
  REQUIRE(hit);
  CHECK(*hit == RaceDetail{ObjectId(0), 1, 1});
  CHECK(sunk.size() == 1);

  d.on_complete(ObjectId(0), AccessKind::Read);
  CHECK(d.counters(ObjectId(0)) == race::RaceCounters{0, 1});
  CHECK_THROWS_AS(d.on_complete(ObjectId(0), AccessKind::Read), ProtocolError);
  CHECK(d.counters(ObjectId(0)) == race::RaceCounters{0, 1});
  CHECK_THROWS_AS(d.on_pending(ObjectId(7), AccessKind::Read), ProtocolError);

  d.on_finish();
  CHECK(d.worker_count() == 0);
  CHECK_FALSE(d.monitors(ObjectId(0)));
}

TEST_CASE("completions never trigger a check") {
  race::Detector d;
  d.on_register(ObjectId(0));
  d.on_pending(ObjectId(0), AccessKind::Write);
  d.on_pending(ObjectId(0), AccessKind::Write);
  int fired = 0;
  d.set_sink([&](const RaceDetail&) { ++fired; });
  d.on_complete(ObjectId(0), AccessKind::Write);
  d.on_complete(ObjectId(0), AccessKind::Write);
  CHECK(fired == 0);
}

TEST_CASE("strict mode reports writer overlap") {
  race::Detector d(true);
  d.on_register(ObjectId(3));
  CHECK_FALSE(d.on_pending(ObjectId(3), AccessKind::Write));
  auto hit = d.on_pending(ObjectId(3), AccessKind::Write);
  REQUIRE(hit);
  CHECK(hit->writers_pending == 2);
}

TEST_CASE("race counter protocol property") {
  stmc_test::RaceProperty result = stmc_test::check_race_protocol(1234, 300);
  INFO(result.failure);
  CHECK(result.ok);
  CHECK(result.events > 10000);
  CHECK(result.races > 0);
}
