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

#ifndef STMC_SCHEDULER_HPP
#define STMC_SCHEDULER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stmc/model.hpp"

namespace stmc::sched {

enum class ThreadState { Runnable, PendingWaiting, Yielded, Executing, Ended };
enum class Mode { Free, Replay, Force };
std::string_view to_string(Mode mode);

/// Side-effect-free test of whether a pending op would progress if granted.
using ReadyProbe = std::function<bool()>;

struct ThreadStatus {
  ThreadState state = ThreadState::Executing;
  std::optional<VisibleOp> pending_op;
  ReadyProbe ready;
  int priority = 0;
  std::uint32_t yields_since_progress = 0;
  // Consecutive grants that went to someone else while this thread was a candidate.
  std::uint32_t passed_over = 0;
  // Step count when the current run of passes began.
  std::size_t passed_since = 0;
  // Threads that must be scheduled before a yielder regains full priority.
  std::set<ThreadId> blockers;
};

struct Pick {
  // Abandon: the forced branch thread is not enabled here.
  enum class Kind { Grant, Deadlock, NormalEnd, Abandon };
  Kind kind = Kind::NormalEnd;
  ThreadId tid;
  Mode mode = Mode::Free;
};

struct Decision {
  std::size_t step = 0;  // 1-based index of the step this grant would record
  ThreadId pick;
  Mode mode = Mode::Free;
  bool progressed = false;
};

/// One recorded step with the scheduler state it was taken from.
struct StepRecord {
  ThreadId tid;
  VisibleOp op;
  /// Candidate threads and their pending ops when the step was picked.
  std::map<ThreadId, VisibleOp> enabled;
  /// Threads whose pending op would have progressed at that moment.
  std::set<ThreadId> ready;
  /// Sleeping threads at that moment (covered by a branch explored elsewhere).
  std::set<ThreadId> asleep;
  /// Threads put to sleep by this step; each needs its own branch here.
  std::set<ThreadId> slept;
};

enum class BoundCheck { Continue, Exceeded };
BoundCheck check_bound(std::size_t steps_executed, std::size_t bound);

/// Sum of per-thread partition counts.
std::size_t estimate_bound(std::span<const std::size_t> partitions);

/// W: the number of trailing steps inspected by the livelock classifier
/// and the fairness checker.
std::size_t fairness_window(std::size_t live_threads);

enum class BoundVerdict { Livelock, Warning };

/// Livelock iff every thread that was ready at each of the last `window`
/// steps got scheduled at least once among them.
BoundVerdict classify_overrun(std::span<const StepRecord> steps, std::size_t window);

/// Fair, non-preemptive decision logic. Holds no threads; the runtime feeds
/// it announcements and outcomes and asks it whom to grant next.
class Scheduler {
 public:
  /// Replay `prefix` exactly, then optionally force `force`, then run free.
  /// Only window-fair forced branches are taken. With `sleep_sets`, a step
  /// that overtakes a smaller ready thread with an independent op puts it
  /// to sleep until a dependent step wakes it.
  void set_plan(std::vector<ThreadId> prefix, std::optional<ThreadId> force, bool sleep_sets = false);

  void on_spawn(ThreadId tid);
  void on_announce(const VisibleOp& op, ReadyProbe ready);
  Pick pick_next();
  /// The granted thread passed its waiting op or completed a non-blocking one.
  void on_progress(ThreadId tid);
  /// The granted thread failed its waiting op.
  void on_yield(ThreadId tid);
  void on_end(ThreadId tid);
  /// Hash of the shared state right after the latest step.
  void note_state(std::uint64_t hash);

  std::size_t steps_executed() const { return steps_.size(); }
  const std::vector<StepRecord>& steps() const { return steps_; }
  std::vector<ThreadId> trace_steps() const;
  const std::vector<Decision>& decisions() const { return decisions_; }
  const std::map<ThreadId, ThreadStatus>& threads() const { return threads_; }
  std::size_t live_count() const;
  bool all_ended() const { return live_count() == 0; }

  /// True once the forced branch was found unusable: its thread yielded, was
  /// not enabled, or would have starved another thread.
  bool forced_branch_failed() const { return forced_failed_; }
  bool force_used() const { return force_used_; }
  std::size_t prefix_length() const { return prefix_.size(); }
  const std::set<ThreadId>& sleeping() const { return sleep_; }
  bool replaying() const { return replay_pos_ < prefix_.size(); }

  /// `step=<n> pick=<tid> mode=<free|replay|force>` per decision.
  std::string decision_log() const;

 private:
  bool is_candidate(const ThreadStatus& s) const;
  ThreadStatus& status(ThreadId tid, const char* who);
  ThreadId pick_free();
  // Granting `tid` would pass over a ready thread for a full fairness
  // window during which the shared state went nowhere. Forced branches that
  // do this are abandoned.
  bool starves_other(ThreadId tid) const;
  void grant(ThreadId tid, Mode mode);
  void update_sleep(ThreadId tid, const VisibleOp& done);

  std::map<ThreadId, ThreadStatus> threads_;
  std::vector<StepRecord> steps_;
  std::vector<std::uint64_t> states_;
  std::vector<Decision> decisions_;
  std::vector<ThreadId> prefix_;
  // Trace entries consumed. A replayed grant that yields consumes one
  // without recording a step.
  std::size_t replay_pos_ = 0;
  std::optional<ThreadId> force_;
  bool force_used_ = false;
  bool forced_failed_ = false;
  bool sleep_sets_ = false;
  std::set<ThreadId> sleep_;
  std::optional<ThreadId> executing_;
  // Snapshot taken at the grant, attached to the step if it progresses.
  std::map<ThreadId, VisibleOp> grant_enabled_;
  std::set<ThreadId> grant_ready_;
};

/// One `step=<n> pick=<tid> mode=<mode>` line per decision.
std::string format_decisions(const std::vector<Decision>& decisions);

}  // namespace stmc::sched

#endif  // STMC_SCHEDULER_HPP
