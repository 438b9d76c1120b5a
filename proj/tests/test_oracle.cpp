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
#include "temp_dir.hpp"

using namespace stmc_test;
using stmc::ViolationKind;
using K = GenOp::Kind;

TEST_CASE("enumerator on a read-modify-write against a blind write") {
  GenProgram g;
  g.cells = 1;
  g.threads = {{}, {{K::Write, 0, 1}}, {{K::Read, 0, 0}, {K::Write, 0, 1}}};
  OracleResult r = enumerate(g);
  CHECK(r.terminal_states == std::set<std::vector<int>>{{1}, {2}});
  CHECK(r.kinds == std::set<ViolationKind>{ViolationKind::DataRace});
}

TEST_CASE("enumerator sees a lock that is never released") {
  GenProgram g;
  g.cells = 1;
  g.mutex = true;
  g.threads = {{}, {{K::Lock}, {K::Write, 0, 1}}, {{K::Lock}, {K::Write, 0, 2}}};
  OracleResult r = enumerate(g);
  CHECK(r.kinds == std::set<ViolationKind>{ViolationKind::Deadlock});
  CHECK(r.terminal_states == std::set<std::vector<int>>{{1}, {2}});
}

TEST_CASE("enumerator on a single thread") {
  GenProgram g;
  g.cells = 2;
  g.threads = {{{K::Write, 1, 2}, {K::Read, 1, 0}, {K::Write, 0, 1}}};
  OracleResult r = enumerate(g);
  CHECK(r.terminal_states == std::set<std::vector<int>>{{3, 2}});
  CHECK(r.kinds.empty());
  CHECK(r.states == 4);
}

TEST_CASE("generator stays inside the program family") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    GenProgram g = generate(seed);
    REQUIRE(g.threads.size() >= 1);
    REQUIRE(g.threads.size() <= 3);
    REQUIRE(g.cells >= 1);
    REQUIRE(g.cells <= 3);
    std::size_t spawns = g.threads.size() - 1;
    CHECK(g.threads[0].size() + 2 * spawns <= 4);
    for (const auto& ops : g.threads) {
      CHECK(ops.size() <= 4);
      int held = 0;
      for (const GenOp& op : ops) {
        if (op.kind == K::Lock) CHECK(held++ == 0);
        if (op.kind == K::Unlock) CHECK(--held == 0);
        if (op.kind == K::Lock || op.kind == K::Unlock) CHECK(g.mutex);
        CHECK(op.cell < g.cells);
      }
    }
  }
}

TEST_CASE("DPOR agrees with the enumerator on generated programs") {
  TempDir dir("stmc-oracle");
  for (std::uint64_t seed = 1000; seed < 1060; ++seed) {
    Comparison c = compare_with_oracle(generate(seed), dir.path(), true);
    INFO("seed " << seed << ": " << c.detail);
    CHECK(c.equal);
  }
}

TEST_CASE("exhaustive mode agrees with the enumerator") {
  TempDir dir("stmc-oracle");
  for (std::uint64_t seed = 2000; seed < 2030; ++seed) {
    Comparison c = compare_with_oracle(generate(seed), dir.path(), false);
    INFO("seed " << seed << ": " << c.detail);
    CHECK(c.equal);
  }
}
