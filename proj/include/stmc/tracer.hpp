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

#ifndef STMC_TRACER_HPP
#define STMC_TRACER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stmc/model.hpp"
#include "stmc/runtime.hpp"

namespace stmc::tracer {

/// `"<index> <tid>.\n"` per step, 1-based.
std::string format_trace(const std::vector<ThreadId>& steps);
/// Strict inverse of format_trace; errors name the offending line.
std::vector<ThreadId> parse_trace_text(std::string_view text);
Trace parse_trace(const std::filesystem::path& path);

enum class OutcomeKind { NormalEnd, Deadlock, Livelock, BoundWarning, DataRace };

/// `bt_<i>_deadlock`, `bt_<i>_livelock`, `data_race<i>`, `trace<i>`,
/// with `node<k>_` in front for worker nodes.
std::string trace_file_name(OutcomeKind kind, std::uint64_t iteration, std::uint32_t node = 0);

/// `deadlock iteration=<n> trace=<file>` or the data-race form with counters.
std::string report_line(const ViolationReport& v);
ViolationReport parse_report_line(std::string_view line);

/// Records the steps of open iterations and writes trace files under
/// `<out>/traces/`.
class Tracer {
 public:
  Tracer(std::filesystem::path out_dir, std::uint32_t node, bool keep_all);

  void open_iteration(std::uint64_t iteration);
  void record_step(std::uint64_t iteration, ThreadId tid);
  /// Writes the trace file for `kind` (normal ends only when keeping all
  /// traces) and returns the paths written.
  std::vector<std::filesystem::path> close_iteration(std::uint64_t iteration, OutcomeKind kind);
  /// Writes a violation trace with explicit steps (races use the prefix at
  /// detection time).
  std::filesystem::path write_violation(OutcomeKind kind, std::uint64_t iteration,
                                        const std::vector<ThreadId>& steps);

  const std::filesystem::path& traces_dir() const { return traces_dir_; }
  const std::vector<ThreadId>& current() const { return steps_; }

 private:
  std::filesystem::path write_file(const std::string& name, const std::vector<ThreadId>& steps);

  std::filesystem::path traces_dir_;
  std::uint32_t node_;
  bool keep_all_;
  std::optional<std::uint64_t> open_;
  std::vector<ThreadId> steps_;
};

/// Writes `report.txt`: a timestamp header line, then one line per violation.
void write_report(const std::filesystem::path& out_dir, const std::vector<ViolationReport>& violations);

struct ReplayReport {
  Outcome outcome = Outcome::NormalEnd;
  std::optional<RaceHit> race;
  std::string op_log;
  std::vector<ThreadId> executed;

  std::vector<ViolationKind> violation_kinds() const;
};

/// Re-executes `trace` step for step, then lets the fair scheduler finish
/// the run. A trace the program cannot follow raises ReplayDivergence.
ReplayReport replay(const ProgramHandle& program, const Trace& trace, ExecutionOptions options);

}  // namespace stmc::tracer

#endif  // STMC_TRACER_HPP
