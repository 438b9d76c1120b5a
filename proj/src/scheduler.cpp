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

#include "stmc/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "stmc/dpor.hpp"

namespace stmc::sched {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Free: return "free";
    case Mode::Replay: return "replay";
    case Mode::Force: return "force";
  }
  return "?";
}

BoundCheck check_bound(std::size_t steps_executed, std::size_t bound) {
  if (bound < 1) throw UsageError("depth bound must be >= 1");
  return steps_executed > bound ? BoundCheck::Exceeded : BoundCheck::Continue;
}

std::size_t estimate_bound(std::span<const std::size_t> partitions) {
  if (partitions.empty()) throw UsageError("estimate_bound: no partition counts given");
  for (std::size_t p : partitions) {
    if (p < 1) throw UsageError("estimate_bound: partition counts must be >= 1");
  }
  return std::accumulate(partitions.begin(), partitions.end(), std::size_t{0});
}

std::size_t fairness_window(std::size_t live_threads) { return 2 * std::max<std::size_t>(live_threads, 1); }

BoundVerdict classify_overrun(std::span<const StepRecord> steps, std::size_t window) {
  if (steps.empty() || window == 0) return BoundVerdict::Warning;
  window = std::min(window, steps.size());
  auto tail = steps.last(window);
  std::set<ThreadId> always_ready = tail.front().ready;
  std::set<ThreadId> scheduled;
  for (const StepRecord& s : tail) {
    std::set<ThreadId> keep;
    std::ranges::set_intersection(always_ready, s.ready, std::inserter(keep, keep.end()));
    always_ready = std::move(keep);
    scheduled.insert(s.tid);
  }
  return std::ranges::includes(scheduled, always_ready) ? BoundVerdict::Livelock
                                                        : BoundVerdict::Warning;
}

void Scheduler::set_plan(std::vector<ThreadId> prefix, std::optional<ThreadId> force, bool sleep_sets) {
  prefix_ = std::move(prefix);
  force_ = force;
  sleep_sets_ = sleep_sets;
  sleep_.clear();
  force_used_ = false;
  forced_failed_ = false;
  replay_pos_ = 0;
}

ThreadStatus& Scheduler::status(ThreadId tid, const char* who) {
  auto it = threads_.find(tid);
  if (it == threads_.end()) {
    throw ProtocolError(std::string(who) + ": unknown thread " + std::to_string(tid.value()));
  }
  return it->second;
}

void Scheduler::on_spawn(ThreadId tid) {
  if (!threads_.try_emplace(tid).second) {
    throw ProtocolError("thread " + std::to_string(tid.value()) + " spawned twice");
  }
}

void Scheduler::on_announce(const VisibleOp& op, ReadyProbe ready) {
  ThreadStatus& s = status(op.tid, "announce");
  if (s.state != ThreadState::Executing) {
    throw ProtocolError("announce from thread " + std::to_string(op.tid.value()) +
                        " that is not running");
  }
  if (executing_ == op.tid) executing_.reset();
  s.pending_op = op;
  s.ready = std::move(ready);
  s.state = op.token == Token::Waiting ? ThreadState::PendingWaiting : ThreadState::Runnable;
}

bool Scheduler::is_candidate(const ThreadStatus& s) const {
  return s.state == ThreadState::Runnable || s.state == ThreadState::PendingWaiting;
}

std::size_t Scheduler::live_count() const {
  return static_cast<std::size_t>(std::ranges::count_if(
      threads_, [](const auto& kv) { return kv.second.state != ThreadState::Ended; }));
}

bool Scheduler::starves_other(ThreadId tid) const {
  const std::size_t window = fairness_window(live_count());
  auto state_before = [&](std::size_t step) { return step == 0 ? 0 : states_.at(step - 1); };
  std::map<ThreadId, VisibleOp> pending;
  for (const auto& [t, s] : threads_) {
    if (is_candidate(s)) pending.emplace(t, *s.pending_op);
  }
  return std::ranges::any_of(threads_, [&](const auto& kv) {
    const ThreadStatus& s = kv.second;
    // This grant would be the W-th in a row to pass it over, and shared state
    // and every pending op repeat a configuration seen while it was being
    // passed over: an unfair cycle.
    if (kv.first == tid || !is_candidate(s) || s.passed_over + 1 < window || (s.ready && !s.ready())) {
      return false;
    }
    const std::size_t n = states_.size();
    return state_before(std::min(s.passed_since, n)) == state_before(n);
  });
}

ThreadId Scheduler::pick_free() {
  int best = std::numeric_limits<int>::min();
  for (const auto& [tid, s] : threads_) {
    if (is_candidate(s) && !sleep_.contains(tid)) best = std::max(best, s.priority);
  }
  const std::size_t threshold = live_count();
  std::optional<ThreadId> lowest;
  std::optional<ThreadId> starved;
  std::uint32_t starved_for = 0;
  for (const auto& [tid, s] : threads_) {
    if (!is_candidate(s) || s.priority != best || sleep_.contains(tid)) continue;
    if (!lowest) lowest = tid;
    if (s.passed_over >= threshold && s.passed_over > starved_for) {
      starved = tid;
      starved_for = s.passed_over;
    }
  }
  return starved ? *starved : *lowest;
}

void Scheduler::grant(ThreadId tid, Mode mode) {
  grant_enabled_.clear();
  grant_ready_.clear();
  for (auto& [t, s] : threads_) {
    if (!is_candidate(s)) continue;
    grant_enabled_.emplace(t, *s.pending_op);
    if (!s.ready || s.ready()) grant_ready_.insert(t);
    if (t == tid) s.passed_over = 0;
    else if (s.passed_over++ == 0) s.passed_since = steps_.size();
  }
  ThreadStatus& s = threads_.at(tid);
  s.state = ThreadState::Executing;
  executing_ = tid;
  decisions_.push_back(Decision{steps_.size() + 1, tid, mode, false});
}

Pick Scheduler::pick_next() {
  if (executing_) throw ProtocolError("pick_next while a permit is outstanding");
  const std::size_t at = replay_pos_;
  if (at < prefix_.size()) {
    ThreadId want = prefix_[at];
    auto it = threads_.find(want);
    if (it == threads_.end() || !is_candidate(it->second)) {
      throw ReplayDivergence(at + 1, "replay divergence at step " + std::to_string(at + 1) +
                                         ": thread " + std::to_string(want.value()) +
                                         " is not enabled");
    }
    ++replay_pos_;
    grant(want, Mode::Replay);
    return Pick{Pick::Kind::Grant, want, Mode::Replay};
  }
  if (force_ && !force_used_) {
    force_used_ = true;
    auto it = threads_.find(*force_);
    if (it == threads_.end() || !is_candidate(it->second) || starves_other(*force_)) {
      forced_failed_ = true;
      return Pick{Pick::Kind::Abandon, *force_, Mode::Force};
    }
    grant(*force_, Mode::Force);
    return Pick{Pick::Kind::Grant, *force_, Mode::Force};
  }
  bool any_candidate = std::ranges::any_of(threads_, [&](const auto& kv) { return is_candidate(kv.second); });
  if (!any_candidate) {
    return Pick{all_ended() ? Pick::Kind::NormalEnd : Pick::Kind::Deadlock, ThreadId{}, Mode::Free};
  }
  bool any_awake = std::ranges::any_of(
      threads_, [&](const auto& kv) { return is_candidate(kv.second) && !sleep_.contains(kv.first); });
  // Only sleepers are left: the rest of the run may repeat an explored one,
  // but it still ends the execution.
  if (!any_awake) sleep_.clear();
  ThreadId tid = pick_free();
  grant(tid, Mode::Free);
  return Pick{Pick::Kind::Grant, tid, Mode::Free};
}

void Scheduler::on_progress(ThreadId tid) {
  ThreadStatus& s = status(tid, "progress");
  if (executing_ != tid || s.state != ThreadState::Executing || !s.pending_op) {
    throw ProtocolError("progress from thread " + std::to_string(tid.value()) +
                        " without the permit");
  }
  steps_.push_back(StepRecord{tid, *s.pending_op, std::move(grant_enabled_), std::move(grant_ready_), sleep_, {}});
  decisions_.back().progressed = true;
  update_sleep(tid, *s.pending_op);
  s.pending_op.reset();
  s.ready = nullptr;
  s.priority = 0;
  s.yields_since_progress = 0;
  s.blockers.clear();
  for (auto& [t, other] : threads_) {
    if (t == tid) continue;
    other.blockers.erase(tid);
    if (other.blockers.empty()) other.priority = 0;
    // Shared state may have changed: a yielder gets to try again.
    if (other.state == ThreadState::Yielded) other.state = ThreadState::PendingWaiting;
  }
}

void Scheduler::note_state(std::uint64_t hash) {
  if (states_.size() + 1 != steps_.size()) throw ProtocolError("state noted without a new step");
  states_.push_back(hash);
}

void Scheduler::update_sleep(ThreadId tid, const VisibleOp& done) {
  if (!sleep_sets_) return;
  StepRecord& step = steps_.back();
  // A smaller ready thread passed over for an independent op goes to sleep;
  // the explorer branches it at this depth. Only object-touching ops sleep:
  // a join waits on a thread's end, which no visible op describes.
  for (ThreadId q : step.ready) {
    if (q >= tid || sleep_.contains(q)) continue;
    const VisibleOp& op = step.enabled.at(q);
    if (op.touches_object() && !dpor::dependent(op, done)) step.slept.insert(q);
  }
  sleep_.erase(tid);
  std::erase_if(sleep_, [&](ThreadId q) {
    const ThreadStatus& qs = threads_.at(q);
    return !is_candidate(qs) || !qs.pending_op || dpor::dependent(*qs.pending_op, done);
  });
  sleep_.insert(step.slept.begin(), step.slept.end());
}

void Scheduler::on_yield(ThreadId tid) {
  ThreadStatus& s = status(tid, "yield");
  if (executing_ != tid || s.state != ThreadState::Executing || !s.pending_op ||
      s.pending_op->token != Token::Waiting) {
    throw ProtocolError("yield from thread " + std::to_string(tid.value()) +
                        " without a granted waiting op");
  }
  executing_.reset();
  if (decisions_.back().mode == Mode::Force) forced_failed_ = true;
  // The failed attempt waits on something a sleeper may hold.
  if (!sleep_.empty() && s.pending_op->touches_object()) {
    const VisibleOp attempted = *s.pending_op;
    std::erase_if(sleep_, [&](ThreadId q) {
      const ThreadStatus& qs = threads_.at(q);
      return qs.pending_op && dpor::dependent(*qs.pending_op, attempted);
    });
  }
  int lowest = 0;
  std::set<ThreadId> blockers;
  for (const auto& [t, other] : threads_) {
    if (other.state == ThreadState::Ended) continue;
    lowest = std::min(lowest, other.priority);
    if (t != tid && is_candidate(other)) blockers.insert(t);
  }
  s.state = ThreadState::Yielded;
  s.priority = lowest - 1;
  s.blockers = std::move(blockers);
  ++s.yields_since_progress;
}

void Scheduler::on_end(ThreadId tid) {
  ThreadStatus& s = status(tid, "end");
  if (s.state != ThreadState::Executing) {
    throw ProtocolError("end from thread " + std::to_string(tid.value()) + " that is not running");
  }
  if (executing_ == tid) executing_.reset();
  s.state = ThreadState::Ended;
  s.pending_op.reset();
  s.ready = nullptr;
  for (auto& [t, other] : threads_) {
    other.blockers.erase(tid);
    if (other.state == ThreadState::Ended) continue;
    if (other.blockers.empty()) other.priority = 0;
    if (other.state == ThreadState::Yielded) other.state = ThreadState::PendingWaiting;
  }
}

std::vector<ThreadId> Scheduler::trace_steps() const {
  std::vector<ThreadId> out;
  out.reserve(steps_.size());
  for (const StepRecord& s : steps_) out.push_back(s.tid);
  return out;
}

std::string Scheduler::decision_log() const { return format_decisions(decisions_); }

std::string format_decisions(const std::vector<Decision>& decisions) {
  std::ostringstream out;
  for (const Decision& d : decisions) {
    out << "step=" << d.step << " pick=" << d.pick.value() << " mode=" << to_string(d.mode) << '\n';
  }
  return out.str();
}

}  // namespace stmc::sched
