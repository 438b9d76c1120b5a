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
#include "stmc/model.hpp"

using namespace stmc;

TEST_CASE("visible op construction") {
  VisibleOp reg = make_visible_op(Token::NonBlocking, ThreadId(0), AccessKind::DontCare, ObjectId::dont_care());
  CHECK(to_string(reg) == "{n,0,dc,dc}");
  CHECK_FALSE(reg.touches_object());

  VisibleOp w = make_visible_op(Token::Waiting, ThreadId(1), AccessKind::Write, ObjectId(2));
  CHECK(to_string(w) == "{y,1,w,2}");
  CHECK(w.touches_object());

  CHECK_THROWS_AS(make_visible_op(Token::NonBlocking, ThreadId(3), AccessKind::Read, ObjectId::dont_care()),
                  UsageError);
  CHECK_THROWS_AS(make_visible_op(Token::NonBlocking, ThreadId(3), AccessKind::DontCare, ObjectId(1)),
                  UsageError);
}

TEST_CASE("visible op wire form round-trips") {
  for (const char* text : {"{n,0,dc,dc}", "{y,1,w,2}", "{n,7,r,0}", "{y,2,dc,dc}"}) {
    CHECK(to_string(parse_visible_op(text)) == text);
  }
  CHECK_THROWS_AS(parse_visible_op("n,0,dc,dc"), ParseError);
  CHECK_THROWS_AS(parse_visible_op("{n,0,dc}"), ParseError);
  CHECK_THROWS_AS(parse_visible_op("{x,0,dc,dc}"), ParseError);
  CHECK_THROWS_AS(parse_visible_op("{n,0,q,1}"), ParseError);
  CHECK_THROWS_AS(parse_visible_op("{n,-1,r,1}"), ParseError);
  CHECK_THROWS_AS(parse_visible_op("{n,0,r,dc}"), ParseError);
}

TEST_CASE("tid lists") {
  std::vector<ThreadId> tids{ThreadId(0), ThreadId(12), ThreadId(3)};
  CHECK(join_tids(tids) == "0,12,3");
  CHECK(split_tids("0,12,3") == tids);
  CHECK(split_tids("").empty());
  CHECK_THROWS_AS(split_tids("1,,2"), ParseError);
  CHECK_THROWS_AS(split_tids("1,a"), ParseError);
}

TEST_CASE("backtrack point validation") {
  BacktrackPoint p;
  p.depth = 2;
  p.prefix = {ThreadId(0), ThreadId(0)};
  p.pending = {ThreadId(1)};
  p.done = {ThreadId(2)};
  CHECK_NOTHROW(p.validate());
  p.done.insert(ThreadId(1));
  CHECK_THROWS_AS(p.validate(), ProtocolError);
  p.done.erase(ThreadId(1));
  p.depth = 3;
  CHECK_THROWS_AS(p.validate(), ProtocolError);
}

TEST_CASE("violation kinds and reports") {
  for (ViolationKind k : {ViolationKind::Deadlock, ViolationKind::Livelock, ViolationKind::DataRace}) {
    CHECK(parse_violation_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_violation_kind("starvation"), ParseError);

  ViolationReport v;
  v.kind = ViolationKind::DataRace;
  CHECK_THROWS_AS(v.validate(), ProtocolError);
  v.race_detail = RaceDetail{ObjectId(0), 1, 1};
  CHECK_NOTHROW(v.validate());
  v.race_detail = RaceDetail{ObjectId(0), 2, 0};
  CHECK_THROWS_AS(v.validate(), ProtocolError);
  v.kind = ViolationKind::Deadlock;
  v.race_detail.reset();
  CHECK_NOTHROW(v.validate());
}
