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

// The shadow threading API programs under test are written against, and the
// runtime that executes one program run under scheduler control.
//
// Every primitive announces a VisibleOp, parks until the scheduler grants it
// the permit, then performs its effect. Code between two primitives runs
// while the thread holds the permit, so at most one program thread executes
// at any time and a run is a pure function of its schedule.

#ifndef STMC_RUNTIME_HPP
#define STMC_RUNTIME_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stmc/model.hpp"
#include "stmc/registry.hpp"
#include "stmc/scheduler.hpp"

namespace stmc {

class Thread;
class Runtime;

using ThreadBody = std::function<void(Thread&)>;

struct SharedCell {
  ObjectHandle handle;
};
struct ShadowMutex {
  ObjectHandle handle;
};
struct ShadowSemaphore {
  ObjectHandle handle;
};
struct ShadowCondVar {
  ObjectHandle handle;
};

/// A program under test. `entry` is the body of the main thread (tid 0).
/// Bodies must be deterministic: no ambient randomness, clocks, or I/O.
struct ProgramHandle {
  std::string name;
  std::string description;
  ThreadBody entry;
  /// Declared partition counts, one per thread; feeds the default bound.
  std::vector<std::size_t> partitions;
};

/// Calling-thread context handed to every thread body.
class Thread {
 public:
  ThreadId id() const { return tid_; }

  /// Creates a thread running `body`. The child runs up to its first
  /// visible operation before this returns; then the spawner announces
  /// `{n,tid,dc,dc}` and waits for its next permit.
  ThreadId spawn(ThreadBody body);
  void join(ThreadId target);

  SharedCell register_shared(int initial);
  int read(SharedCell cell);
  void write(SharedCell cell, int value);

  ShadowMutex make_mutex();
  void lock(ShadowMutex m);
  void unlock(ShadowMutex m);
  /// Non-blocking acquisition attempt.
  bool try_lock(ShadowMutex m);

  ShadowSemaphore make_semaphore(int count);
  void sem_wait(ShadowSemaphore s);
  void sem_post(ShadowSemaphore s);

  ShadowCondVar make_condvar();
  void cond_wait(ShadowCondVar c, ShadowMutex m);
  void cond_signal(ShadowCondVar c);

  // Stand-ins for random() and gettimeofday(): fixed values.
  static constexpr int random() { return 4; }
  static constexpr std::int64_t now() { return 0; }

 private:
  friend class Runtime;
  Thread(Runtime& rt, ThreadId tid) : rt_(rt), tid_(tid) {}
  Runtime& rt_;
  ThreadId tid_;
};

/// What a program thread runs on. Fibers switch in user space; OS threads
/// are kept for bodies that need a real thread (thread-local state, blocking
/// system calls between visible operations).
enum class Backend { Fiber, Thread };

struct ExecutionOptions {
  std::vector<ThreadId> prefix;
  std::optional<ThreadId> force;
  /// Put overtaken independent threads to sleep (see Scheduler::set_plan).
  bool sleep_sets = false;
  std::size_t bound = 1000;
  bool race_enabled = true;
  bool strict_races = false;
  Backend backend = Backend::Fiber;
};

enum class Outcome { NormalEnd, Deadlock, Livelock, BoundWarning, Abandoned };
std::string_view to_string(Outcome outcome);

struct RaceHit {
  RaceDetail detail;
  /// Steps recorded when the overlapping access was announced.
  std::size_t at_step = 0;
};

enum class ObjectKind { Cell, Mutex, Semaphore, CondVar };

struct ExecutionResult {
  Outcome outcome = Outcome::NormalEnd;
  std::vector<sched::StepRecord> steps;
  std::vector<sched::Decision> decisions;
  std::string decision_log() const { return sched::format_decisions(decisions); }
  std::optional<RaceHit> race;
  /// Cell values at the end of the run, in object-id order.
  std::vector<int> final_cells;
  std::vector<ObjectKind> objects;
  std::uint32_t threads_created = 0;
  /// Hash of all shadow-object state after each recorded step.
  std::vector<std::uint64_t> state_hashes;
  /// Ops still announced but not executed when the run stopped.
  std::map<ThreadId, VisibleOp> final_pending;

  std::vector<ThreadId> trace() const;
  /// `<idx> {<token>,<tid>,<op>,<oid>}` per executed step.
  std::string op_log() const;
};

/// Executes `program` once under the plan in `options`. Usage and protocol
/// errors raised by program threads are rethrown here after every program
/// thread has been torn down.
ExecutionResult execute(const ProgramHandle& program, const ExecutionOptions& options);

}  // namespace stmc

#endif  // STMC_RUNTIME_HPP
