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

#include "stmc/runtime.hpp"

#include <exception>
#include <map>
#include <set>
#include <sstream>

#include "contexts.hpp"
#include "stmc/race.hpp"

namespace stmc {

namespace {

// Unwinds a parked program thread at teardown. Deliberately not derived
// from std::exception so program bodies catching std::exception let it pass.
struct Shutdown {};

struct ObjectState {
  ObjectKind kind = ObjectKind::Cell;
  int value = 0;                      // cell value / semaphore count
  std::optional<ThreadId> holder;     // mutex
  int signal_flag = 0;                // condvar
  int waiters = 0;                    // condvar
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::NormalEnd: return "normal-end";
    case Outcome::Deadlock: return "deadlock";
    case Outcome::Livelock: return "livelock";
    case Outcome::BoundWarning: return "bound-warning";
    case Outcome::Abandoned: return "abandoned";
  }
  return "?";
}

std::vector<ThreadId> ExecutionResult::trace() const {
  std::vector<ThreadId> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.tid);
  return out;
}

std::string ExecutionResult::op_log() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out << (i + 1) << ' ' << to_string(steps[i].op) << '\n';
  }
  return out.str();
}

class Runtime {
 public:
  Runtime(const ProgramHandle& program, const ExecutionOptions& options)
      : program_(program), options_(options), ctx_(detail::make_contexts(options.backend)),
        race_(options.strict_races) {
    sched_.set_plan(options.prefix, options.force, options.sleep_sets);
    race_.set_sink([this](const RaceDetail& d) {
      if (!first_race_) first_race_ = RaceHit{d, sched_.steps_executed()};
    });
  }

  ~Runtime() { teardown(); }

  ExecutionResult run();

  // Thread-side entry points. All run on program threads.
  ThreadId spawn(ThreadId self, ThreadBody body);
  void join(ThreadId self, ThreadId target);
  SharedCell register_shared(int initial);
  int read(ThreadId self, SharedCell cell);
  void write(ThreadId self, SharedCell cell, int value);
  ShadowMutex make_mutex();
  void lock(ThreadId self, ShadowMutex m);
  void unlock(ThreadId self, ShadowMutex m);
  bool try_lock(ThreadId self, ShadowMutex m);
  ShadowSemaphore make_semaphore(int count);
  void sem_wait(ThreadId self, ShadowSemaphore s);
  void sem_post(ThreadId self, ShadowSemaphore s);
  ShadowCondVar make_condvar();
  void cond_wait(ThreadId self, ShadowCondVar c, ShadowMutex m);
  void cond_signal(ThreadId self, ShadowCondVar c);

 private:
  struct Control {
    bool granted = false;
    bool parked_once = false;  // reached its first announce or ended
    // Set while the spawner waits for this thread's first park.
    std::optional<ThreadId> spawner;
  };

  using Lock = detail::Lock;

  void start_thread(Lock& lk, ThreadId tid, ThreadBody body);
  void thread_main(ThreadId tid, ThreadBody body);
  // Announce `op` and park until granted.
  void announce(Lock& lk, const VisibleOp& op, sched::ReadyProbe ready);
  // Park again after a failed waiting attempt.
  void yield(Lock& lk, ThreadId self);
  void wait_for_grant(Lock& lk, ThreadId self);
  // Called by whichever context just gave up the permit: hands it to the
  // next thread, or ends the run.
  void schedule();
  // A thread stopped running: wake its spawner if it is a fresh child,
  // otherwise make the next scheduling decision.
  void release(Control& c);
  void finish(Outcome outcome) {
    outcome_ = outcome;
    finished_ = true;
    ctx_->wake_controller();
  }
  void progress(ThreadId self);
  void check_alive() const {
    if (shutting_down_ || error_) throw Shutdown{};
  }
  ObjectHandle new_object(ObjectKind kind, int value);
  ObjectState& object(ObjectHandle h, ObjectKind kind, const char* what);
  ObjectId oid_of(ObjectHandle h) const { return registry_.resolve(h); }
  std::uint64_t state_hash() const;
  void teardown();
  void record_error(std::exception_ptr e) {
    if (!error_) error_ = e;
  }

  const ProgramHandle& program_;
  const ExecutionOptions& options_;
  std::unique_ptr<detail::Contexts> ctx_;
  std::map<ThreadId, std::unique_ptr<Control>> controls_;
  bool finished_ = false;
  Outcome outcome_ = Outcome::NormalEnd;
  bool shutting_down_ = false;
  std::exception_ptr error_;

  Registry registry_;
  sched::Scheduler sched_;
  race::Detector race_;
  std::optional<RaceHit> first_race_;
  std::vector<ObjectState> objects_;
  std::set<ThreadId> ended_;
  std::vector<std::uint64_t> hashes_;
};

// ---- thread lifecycle ------------------------------------------------------

void Runtime::start_thread(Lock&, ThreadId tid, ThreadBody body) {
  sched_.on_spawn(tid);
  controls_.emplace(tid, std::make_unique<Control>());
  ctx_->create(tid, [this, tid, body = std::move(body)]() mutable { thread_main(tid, std::move(body)); });
}

void Runtime::thread_main(ThreadId tid, ThreadBody body) {
  Thread self(*this, tid);
  bool clean = false;
  try {
    body(self);
    clean = true;
  } catch (const Shutdown&) {
  } catch (...) {
    Lock lk = ctx_->guard();
    record_error(std::current_exception());
  }
  Lock lk = ctx_->guard();
  Control& c = *controls_.at(tid);
  if (clean && !shutting_down_ && !error_) {
    try {
      sched_.on_end(tid);
      ended_.insert(tid);
    } catch (...) {
      record_error(std::current_exception());
    }
  }
  if (!shutting_down_) release(c);
}

void Runtime::release(Control& c) {
  c.parked_once = true;
  if (c.spawner) {
    ctx_->wake(*c.spawner);
    c.spawner.reset();
    return;
  }
  schedule();
}

void Runtime::schedule() {
  if (finished_) return;
  if (error_) return finish(Outcome::NormalEnd);
  try {
    if (sched_.forced_branch_failed()) return finish(Outcome::Abandoned);
    const auto& decisions = sched_.decisions();
    if (!decisions.empty() && decisions.back().progressed &&
        sched::check_bound(sched_.steps_executed(), options_.bound) == sched::BoundCheck::Exceeded) {
      auto verdict = sched::classify_overrun(sched_.steps(), sched::fairness_window(sched_.live_count()));
      return finish(verdict == sched::BoundVerdict::Livelock ? Outcome::Livelock : Outcome::BoundWarning);
    }
    sched::Pick pick = sched_.pick_next();
    switch (pick.kind) {
      case sched::Pick::Kind::NormalEnd: return finish(Outcome::NormalEnd);
      case sched::Pick::Kind::Deadlock: return finish(Outcome::Deadlock);
      case sched::Pick::Kind::Abandon: return finish(Outcome::Abandoned);
      case sched::Pick::Kind::Grant: break;
    }
    controls_.at(pick.tid)->granted = true;
    ctx_->wake(pick.tid);
  } catch (...) {
    record_error(std::current_exception());
    finish(Outcome::NormalEnd);
  }
}

void Runtime::wait_for_grant(Lock& lk, ThreadId self) {
  Control& c = *controls_.at(self);
  release(c);
  ctx_->wait(lk, self, [&] { return c.granted || shutting_down_; });
  if (shutting_down_) throw Shutdown{};
  c.granted = false;
}

void Runtime::announce(Lock& lk, const VisibleOp& op, sched::ReadyProbe ready) {
  check_alive();
  sched_.on_announce(op, std::move(ready));
  if (options_.race_enabled && op.touches_object() && race_.monitors(op.target)) {
    race_.on_pending(op.target, op.access);
  }
  wait_for_grant(lk, op.tid);
}

void Runtime::yield(Lock& lk, ThreadId self) {
  sched_.on_yield(self);
  wait_for_grant(lk, self);
}

void Runtime::progress(ThreadId self) {
  sched_.on_progress(self);
  hashes_.push_back(state_hash());
  sched_.note_state(hashes_.back());
}

// ---- controller ------------------------------------------------------------

ExecutionResult Runtime::run() {
  Lock lk = ctx_->guard();
  ExecutionResult result;
  std::exception_ptr controller_error;
  try {
    ThreadId main = registry_.register_thread();
    start_thread(lk, main, program_.entry);
    ctx_->wake(main);
    ctx_->wait_controller(lk, [this] { return finished_; });
    result.outcome = outcome_;
  } catch (...) {
    controller_error = std::current_exception();
  }
  if (lk.owns_lock()) lk.unlock();
  teardown();
  if (controller_error) std::rethrow_exception(controller_error);
  if (error_) std::rethrow_exception(error_);

  result.steps = sched_.steps();
  result.decisions = sched_.decisions();
  result.race = first_race_;
  result.threads_created = registry_.thread_count();
  result.state_hashes = hashes_;
  for (const auto& [tid, st] : sched_.threads()) {
    if (st.state != sched::ThreadState::Ended && st.pending_op) result.final_pending.emplace(tid, *st.pending_op);
  }
  for (const ObjectState& o : objects_) {
    result.objects.push_back(o.kind);
    if (o.kind == ObjectKind::Cell) result.final_cells.push_back(o.value);
  }
  return result;
}

void Runtime::teardown() {
  {
    Lock lk = ctx_->guard();
    shutting_down_ = true;
  }
  ctx_->shutdown();
}

std::uint64_t Runtime::state_hash() const {
  std::uint64_t h = 0;
  for (const ObjectState& o : objects_) {
    h = mix(h, static_cast<std::uint64_t>(o.kind));
    h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(o.value)));
    h = mix(h, o.holder ? o.holder->value() + 1 : 0);
    h = mix(h, static_cast<std::uint64_t>(o.signal_flag));
    h = mix(h, static_cast<std::uint64_t>(o.waiters));
  }
  return h;
}

// ---- objects ---------------------------------------------------------------

ObjectHandle Runtime::new_object(ObjectKind kind, int value) {
  check_alive();
  ObjectHandle h = registry_.mint_handle();
  ObjectId oid = registry_.register_object(h);
  objects_.push_back(ObjectState{kind, value, std::nullopt, 0, 0});
  if (kind == ObjectKind::Cell && options_.race_enabled) race_.on_register(oid);
  return h;
}

ObjectState& Runtime::object(ObjectHandle h, ObjectKind kind, const char* what) {
  ObjectId oid = registry_.resolve(h);
  ObjectState& o = objects_.at(oid.value());
  if (o.kind != kind) throw UsageError(std::string(what) + ": object has the wrong kind");
  return o;
}

SharedCell Runtime::register_shared(int initial) {
  Lock lk = ctx_->guard();
  return SharedCell{new_object(ObjectKind::Cell, initial)};
}

ShadowMutex Runtime::make_mutex() {
  Lock lk = ctx_->guard();
  return ShadowMutex{new_object(ObjectKind::Mutex, 0)};
}

ShadowSemaphore Runtime::make_semaphore(int count) {
  if (count < 0) throw UsageError("semaphore count must be non-negative");
  Lock lk = ctx_->guard();
  return ShadowSemaphore{new_object(ObjectKind::Semaphore, count)};
}

ShadowCondVar Runtime::make_condvar() {
  Lock lk = ctx_->guard();
  return ShadowCondVar{new_object(ObjectKind::CondVar, 0)};
}

// ---- operations ------------------------------------------------------------

ThreadId Runtime::spawn(ThreadId self, ThreadBody body) {
  Lock lk = ctx_->guard();
  check_alive();
  ThreadId child = registry_.register_thread();
  start_thread(lk, child, std::move(body));
  Control& c = *controls_.at(child);
  c.spawner = self;
  ctx_->wake(child);
  ctx_->wait(lk, self, [&] { return c.parked_once || shutting_down_; });
  check_alive();
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::DontCare, ObjectId::dont_care()),
           nullptr);
  progress(self);
  return child;
}

void Runtime::join(ThreadId self, ThreadId target) {
  Lock lk = ctx_->guard();
  if (target == self) throw UsageError("join on self");
  if (target.value() >= registry_.thread_count()) throw UsageError("join on a thread that was never spawned");
  auto ready = [this, target] { return ended_.contains(target); };
  announce(lk, make_visible_op(Token::Waiting, self, AccessKind::DontCare, ObjectId::dont_care()), ready);
  while (!ready()) yield(lk, self);
  progress(self);
}

int Runtime::read(ThreadId self, SharedCell cell) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(cell.handle);
  object(cell.handle, ObjectKind::Cell, "read");
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Read, oid), nullptr);
  int v = objects_[oid.value()].value;
  if (options_.race_enabled) race_.on_complete(oid, AccessKind::Read);
  progress(self);
  return v;
}

void Runtime::write(ThreadId self, SharedCell cell, int value) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(cell.handle);
  object(cell.handle, ObjectKind::Cell, "write");
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Write, oid), nullptr);
  objects_[oid.value()].value = value;
  if (options_.race_enabled) race_.on_complete(oid, AccessKind::Write);
  progress(self);
}

void Runtime::lock(ThreadId self, ShadowMutex m) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(m.handle);
  if (object(m.handle, ObjectKind::Mutex, "lock").holder == self) {
    throw UsageError("relock of a non-recursive mutex by its holder");
  }
  auto ready = [this, oid] { return !objects_[oid.value()].holder.has_value(); };
  announce(lk, make_visible_op(Token::Waiting, self, AccessKind::Write, oid), ready);
  while (!ready()) yield(lk, self);
  objects_[oid.value()].holder = self;
  progress(self);
}

void Runtime::unlock(ThreadId self, ShadowMutex m) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(m.handle);
  if (object(m.handle, ObjectKind::Mutex, "unlock").holder != self) {
    throw UsageError("unlock by a thread that does not hold the mutex");
  }
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Write, oid), nullptr);
  objects_[oid.value()].holder.reset();
  progress(self);
}

bool Runtime::try_lock(ThreadId self, ShadowMutex m) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(m.handle);
  if (object(m.handle, ObjectKind::Mutex, "try_lock").holder == self) {
    throw UsageError("try_lock of a non-recursive mutex by its holder");
  }
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Write, oid), nullptr);
  ObjectState& o = objects_[oid.value()];
  bool acquired = !o.holder.has_value();
  if (acquired) o.holder = self;
  progress(self);
  return acquired;
}

void Runtime::sem_wait(ThreadId self, ShadowSemaphore s) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(s.handle);
  object(s.handle, ObjectKind::Semaphore, "sem_wait");
  auto ready = [this, oid] { return objects_[oid.value()].value > 0; };
  announce(lk, make_visible_op(Token::Waiting, self, AccessKind::Write, oid), ready);
  while (!ready()) yield(lk, self);
  --objects_[oid.value()].value;
  progress(self);
}

void Runtime::sem_post(ThreadId self, ShadowSemaphore s) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(s.handle);
  object(s.handle, ObjectKind::Semaphore, "sem_post");
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Write, oid), nullptr);
  ++objects_[oid.value()].value;
  progress(self);
}

void Runtime::cond_wait(ThreadId self, ShadowCondVar c, ShadowMutex m) {
  Lock lk = ctx_->guard();
  ObjectId coid = oid_of(c.handle);
  ObjectId moid = oid_of(m.handle);
  object(c.handle, ObjectKind::CondVar, "cond_wait");
  if (object(m.handle, ObjectKind::Mutex, "cond_wait").holder != self) {
    throw UsageError("cond_wait without holding the mutex");
  }
  announce(lk, make_visible_op(Token::Waiting, self, AccessKind::Write, coid), nullptr);
  // Objects may have been created while parked; re-fetch after every park.
  ObjectState* cv = &objects_[coid.value()];
  ObjectState* mx = &objects_[moid.value()];
  if (cv->waiters > 0 && cv->signal_flag == 1) {
    // A signal is already pending: take it and keep the mutex.
    cv->signal_flag = 0;
    progress(self);
    return;
  }
  mx->holder.reset();
  cv->waiters += 1;
  progress(self);

  auto ready = [this, coid, moid] {
    return objects_[coid.value()].signal_flag == 1 && !objects_[moid.value()].holder.has_value();
  };
  announce(lk, make_visible_op(Token::Waiting, self, AccessKind::Write, coid), ready);
  while (!ready()) yield(lk, self);
  cv = &objects_[coid.value()];
  mx = &objects_[moid.value()];
  cv->waiters -= 1;
  cv->signal_flag = 0;
  mx->holder = self;
  progress(self);
}

void Runtime::cond_signal(ThreadId self, ShadowCondVar c) {
  Lock lk = ctx_->guard();
  ObjectId oid = oid_of(c.handle);
  object(c.handle, ObjectKind::CondVar, "cond_signal");
  announce(lk, make_visible_op(Token::NonBlocking, self, AccessKind::Write, oid), nullptr);
  ObjectState& cv = objects_[oid.value()];
  if (cv.waiters > 0) cv.signal_flag = 1;
  progress(self);
}

// ---- Thread forwarding -----------------------------------------------------

ThreadId Thread::spawn(ThreadBody body) { return rt_.spawn(tid_, std::move(body)); }
void Thread::join(ThreadId target) { rt_.join(tid_, target); }
SharedCell Thread::register_shared(int initial) { return rt_.register_shared(initial); }
int Thread::read(SharedCell cell) { return rt_.read(tid_, cell); }
void Thread::write(SharedCell cell, int value) { rt_.write(tid_, cell, value); }
ShadowMutex Thread::make_mutex() { return rt_.make_mutex(); }
void Thread::lock(ShadowMutex m) { rt_.lock(tid_, m); }
void Thread::unlock(ShadowMutex m) { rt_.unlock(tid_, m); }
bool Thread::try_lock(ShadowMutex m) { return rt_.try_lock(tid_, m); }
ShadowSemaphore Thread::make_semaphore(int count) { return rt_.make_semaphore(count); }
void Thread::sem_wait(ShadowSemaphore s) { rt_.sem_wait(tid_, s); }
void Thread::sem_post(ShadowSemaphore s) { rt_.sem_post(tid_, s); }
ShadowCondVar Thread::make_condvar() { return rt_.make_condvar(); }
void Thread::cond_wait(ShadowCondVar c, ShadowMutex m) { rt_.cond_wait(tid_, c, m); }
void Thread::cond_signal(ShadowCondVar c) { rt_.cond_signal(tid_, c); }

ExecutionResult execute(const ProgramHandle& program, const ExecutionOptions& options) {
  if (!program.entry) throw UsageError("program '" + program.name + "' has no entry body");
  if (options.bound < 1) throw UsageError("depth bound must be >= 1");
  Runtime rt(program, options);
  return rt.run();
}

}  // namespace stmc
