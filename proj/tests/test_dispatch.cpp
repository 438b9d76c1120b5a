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


#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

#include "doctest.h"
#include "stmc/corpus.hpp"
#include "stmc/dispatch.hpp"
#include "temp_dir.hpp"

using namespace stmc;
using namespace stmc::dispatch;

namespace {

std::vector<ThreadId> tids(std::initializer_list<std::uint32_t> l) {
  std::vector<ThreadId> out;
  for (std::uint32_t t : l) out.emplace_back(t);
  return out;
}

BacktrackPoint point(std::vector<ThreadId> prefix, std::set<ThreadId> pending, std::uint64_t iter = 0) {
  BacktrackPoint p;
  p.depth = prefix.size();
  p.prefix = std::move(prefix);
  p.pending = std::move(pending);
  p.discovery_iteration = iter;
  return p;
}

std::string free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a) == 0);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ::close(fd);
  return "127.0.0.1:" + std::to_string(ntohs(a.sin_port));
}

std::set<std::vector<ThreadId>> traces(const ExplorationReport& r) {
  std::set<std::vector<ThreadId>> out;
  for (const ViolationReport& v : r.violations) out.insert(v.trace.steps);
  return out;
}

ExplorationConfig config(const stmc_test::TempDir& dir, std::size_t bound = 25) {
  ExplorationConfig c;
  c.out_dir = dir.path();
  c.bound = bound;
  return c;
}

}  // namespace

TEST_CASE("point records") {
  BacktrackPoint p = point(tids({0, 0, 1}), {ThreadId(2), ThreadId(4)}, 9);
  p.done = {ThreadId(1)};
  CHECK(encode_point(p) == "depth=3 iter=9 done=1 pending=2,4 prefix=0,0,1");
  CHECK(decode_point(encode_point(p)) == p);

  BacktrackPoint root = point({}, {ThreadId(1)});
  CHECK(encode_point(root) == "depth=0 iter=0 done= pending=1 prefix=");
  CHECK(decode_point(encode_point(root)) == root);

  CHECK_THROWS_AS(decode_point("depth=1 iter=0 done= pending=1"), ParseError);
  CHECK_THROWS_AS(decode_point("iter=0 depth=1 done= pending=1 prefix=0"), ParseError);
  CHECK_THROWS_AS(decode_point("depth=2 iter=0 done= pending=1 prefix=0"), ProtocolError);
  CHECK_THROWS_AS(decode_point("depth=1 iter=0 done=1 pending=1 prefix=0"), ProtocolError);
  CHECK_THROWS_AS(decode_point("depth=1 iter=0 done= pending=x prefix=0"), ParseError);
}

TEST_CASE("partition deals deepest points round-robin") {
  std::vector<BacktrackPoint> pts{point(tids({0}), {ThreadId(1)}), point(tids({0, 0, 0}), {ThreadId(1)}),
                                  point(tids({0, 0}), {ThreadId(2)}), point({}, {ThreadId(1)})};
  std::vector<Workload> w = partition(pts, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].node_id == 0);
  CHECK(w[1].node_id == 1);
  REQUIRE(w[0].points.size() == 2);
  REQUIRE(w[1].points.size() == 2);
  CHECK(w[0].points[0].depth == 3);
  CHECK(w[1].points[0].depth == 2);
  CHECK(w[0].points[1].depth == 1);
  CHECK(w[1].points[1].depth == 0);

  std::vector<Workload> many = partition(pts, 6);
  CHECK(many.size() == 6);
  CHECK(many[5].points.empty());
  CHECK_THROWS_AS(partition(pts, 0), UsageError);
}

TEST_CASE("report lines round-trip") {
  ExplorationReport r;
  r.iterations_run = 12;
  r.bound_warnings = 1;
  r.points_explored = 11;
  r.abandoned = 2;
  r.duplicates = 3;
  r.violations.push_back(ViolationReport{ViolationKind::Deadlock, 4, Trace{tids({0, 0, 1, 2}), 4},
                                         std::nullopt, "node1_bt_4_deadlock"});
  r.violations.push_back(ViolationReport{ViolationKind::DataRace, 5, Trace{tids({0, 0}), 5},
                                         RaceDetail{ObjectId(0), 1, 1}, "node1_data_race5"});
  ExplorationReport back = decode_report(encode_report(r));
  CHECK(back.iterations_run == 12);
  CHECK(back.bound_warnings == 1);
  CHECK(back.points_explored == 11);
  CHECK(back.abandoned == 2);
  CHECK(back.duplicates == 3);
  REQUIRE(back.violations.size() == 2);
  CHECK(back.violations[0].trace.steps == tids({0, 0, 1, 2}));
  CHECK(back.violations[0].trace_file == "node1_bt_4_deadlock");
  CHECK(back.violations[1].race_detail == r.violations[1].race_detail);
  CHECK_THROWS_AS(decode_report({}), ParseError);
  CHECK_THROWS_AS(decode_report({"hello"}), ParseError);
}

TEST_CASE("socket workers give the in-process result") {
  const ProgramHandle& p = corpus::find("livelock-philosophers");
  stmc_test::TempDir local, master, w1, w2;
  ExplorationConfig lc = config(local);
  lc.node_count = 3;
  ExplorationReport in_process = run_in_process(p, lc);

  std::string a1 = free_port(), a2 = free_port();
  auto s1 = std::async(std::launch::async, [&] { serve_worker(p, config(w1), a1); });
  auto s2 = std::async(std::launch::async, [&] { serve_worker(p, config(w2), a2); });
  ExplorationReport remote = run_master(p, config(master), {a1, a2});
  s1.get();
  s2.get();

  CHECK(remote.kinds() == in_process.kinds());
  CHECK(traces(remote) == traces(in_process));
  bool prefixed = false;
  for (const auto& e : std::filesystem::directory_iterator(w1 / "traces")) {
    prefixed = prefixed || e.path().filename().string().rfind("node1_", 0) == 0;
  }
  CHECK(prefixed);
}

TEST_CASE("a worker rejects a bad handshake") {
  const ProgramHandle& p = corpus::find("single-thread");
  stmc_test::TempDir w;
  std::string addr = free_port();
  auto server = std::async(std::launch::async, [&] { serve_worker(p, config(w), addr); });

  int fd = -1;
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  a.sin_port = htons(static_cast<std::uint16_t>(std::stoi(addr.substr(addr.find(':') + 1))));
  for (int i = 0; i < 50; ++i) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&a), sizeof a) == 0) break;
    ::close(fd);
    fd = -1;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(fd >= 0);
  const char hi[] = "HOWDY\n";
  CHECK(::write(fd, hi, sizeof hi - 1) == static_cast<ssize_t>(sizeof hi - 1));
  CHECK_THROWS_AS(server.get(), ProtocolError);
  ::close(fd);
}

TEST_CASE("a master with no listener fails to connect") {
  stmc_test::TempDir dir;
  CHECK_THROWS_AS(run_master(corpus::find("single-thread"), config(dir), {"127.0.0.1:1"}), ProtocolError);
}
