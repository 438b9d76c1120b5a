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

// Splitting iteration-0 backtrack points over nodes, and the line codec
// shared by the store file and the master/worker wire protocol.

#ifndef STMC_DISPATCH_HPP
#define STMC_DISPATCH_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stmc/explorer.hpp"
#include "stmc/model.hpp"

namespace stmc::dispatch {

/// `depth=<d> iter=<i> done=<csv> pending=<csv> prefix=<csv>`
std::string encode_point(const BacktrackPoint& point);
BacktrackPoint decode_point(std::string_view line);

struct Workload {
  std::uint32_t node_id = 0;
  std::vector<BacktrackPoint> points;
};

enum class NodeState { Working, Done };

struct NodeStatus {
  std::uint32_t node_id = 0;
  NodeState state = NodeState::Working;
  std::size_t violations_so_far = 0;
};

/// Round-robin over points sorted by depth (deepest first), then discovery
/// order.
std::vector<Workload> partition(std::vector<BacktrackPoint> points, std::uint32_t n);

/// A header line with the counters, then one line per violation carrying
/// its report fields and `steps=<csv>`.
std::vector<std::string> encode_report(const ExplorationReport& report);
ExplorationReport decode_report(const std::vector<std::string>& lines);

/// Master explores iteration 0 and workload 0; nodes 1..n-1 run on threads
/// of this process. Violations are merged in node order.
ExplorationReport run_in_process(const ProgramHandle& program, const ExplorationConfig& config,
                                 IterationObserver observer = {});

/// Master side of the socket transport; one worker per `host:port`. The
/// node count is workers + 1.
ExplorationReport run_master(const ProgramHandle& program, const ExplorationConfig& config,
                             const std::vector<std::string>& workers);

/// Worker side: accepts one master connection on `listen` (`host:port`),
/// explores the received workload, answers with its report.
void serve_worker(const ProgramHandle& program, const ExplorationConfig& config, const std::string& listen);

}  // namespace stmc::dispatch

#endif  // STMC_DISPATCH_HPP
