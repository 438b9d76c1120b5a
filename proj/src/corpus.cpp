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

#include "stmc/corpus.hpp"

#include <string>

namespace stmc::corpus {

namespace {

// t1 reads flag, t2 clears it, main joins both. Nothing orders the two
// accesses, so the read and the write can be pending together.
void data_race_flag(Thread& main) {
  SharedCell flag = main.register_shared(0);
  main.write(flag, 0);
  ThreadId t1 = main.spawn([flag](Thread& t) {
    if (t.read(flag) == 1) {
      // "flag is set"
    }
  });
  ThreadId t2 = main.spawn([flag](Thread& t) { t.write(flag, 0); });
  main.join(t1);
  main.join(t2);
}

void data_race_flag_locked(Thread& main) {
  SharedCell flag = main.register_shared(0);
  ShadowMutex m = main.make_mutex();
  main.write(flag, 0);
  ThreadId t1 = main.spawn([flag, m](Thread& t) {
    t.lock(m);
    t.read(flag);
    t.unlock(m);
  });
  ThreadId t2 = main.spawn([flag, m](Thread& t) {
    t.lock(m);
    t.write(flag, 0);
    t.unlock(m);
  });
  main.join(t1);
  main.join(t2);
}

// Opposite lock orders.
void deadlock_two_mutexes(Thread& main) {
  SharedCell counter = main.register_shared(0);
  ShadowMutex a = main.make_mutex();
  ShadowMutex b = main.make_mutex();
  ThreadId t1 = main.spawn([=](Thread& t) {
    t.lock(a);
    t.lock(b);
    t.write(counter, t.read(counter) + 1);
    t.unlock(b);
    t.unlock(a);
  });
  ThreadId t2 = main.spawn([=](Thread& t) {
    t.lock(b);
    t.lock(a);
    t.write(counter, t.read(counter) - 1);
    t.unlock(a);
    t.unlock(b);
  });
  main.join(t1);
  main.join(t2);
}

constexpr int kPhilosophers = 2;

void livelock_philosophers(Thread& main) {
  std::vector<ShadowMutex> forks;
  for (int i = 0; i < kPhilosophers; ++i) forks.push_back(main.make_mutex());
  std::vector<ThreadId> tids;
  for (int i = 0; i < kPhilosophers; ++i) {
    ShadowMutex mine = forks[i];
    ShadowMutex next = forks[(i + 1) % kPhilosophers];
    tids.push_back(main.spawn([mine, next](Thread& t) {
      for (;;) {
        t.lock(mine);
        if (t.try_lock(next)) break;
        t.unlock(mine);
      }
      // eat
      t.unlock(mine);
      t.unlock(next);
    }));
  }
  for (ThreadId tid : tids) main.join(tid);
}

void spin_flag(Thread& main) {
  SharedCell flag = main.register_shared(0);
  ThreadId spinner = main.spawn([flag](Thread& t) {
    while (t.read(flag) == 0) {
    }
  });
  ThreadId setter = main.spawn([flag](Thread& t) { t.write(flag, 1); });
  main.join(spinner);
  main.join(setter);
}

void independent_writes(Thread& main) {
  SharedCell x = main.register_shared(0);
  SharedCell y = main.register_shared(0);
  ThreadId t1 = main.spawn([x](Thread& t) { t.write(x, 1); });
  ThreadId t2 = main.spawn([y](Thread& t) { t.write(y, 1); });
  main.join(t1);
  main.join(t2);
}

void dependent_writes(Thread& main) {
  SharedCell x = main.register_shared(0);
  ThreadId t1 = main.spawn([x](Thread& t) { t.write(x, 1); });
  ThreadId t2 = main.spawn([x](Thread& t) { t.write(x, 2); });
  main.join(t1);
  main.join(t2);
}

void single_thread(Thread& main) {
  SharedCell x = main.register_shared(0);
  ShadowMutex m = main.make_mutex();
  main.lock(m);
  main.write(x, main.read(x) + 1);
  main.unlock(m);
}

void semaphore_handoff(Thread& main) {
  SharedCell data = main.register_shared(0);
  ShadowSemaphore ready = main.make_semaphore(0);
  ThreadId consumer = main.spawn([=](Thread& t) {
    t.sem_wait(ready);
    t.read(data);
  });
  ThreadId producer = main.spawn([=](Thread& t) {
    t.write(data, 42);
    t.sem_post(ready);
  });
  main.join(consumer);
  main.join(producer);
}

void condvar_handoff(Thread& main) {
  SharedCell done = main.register_shared(0);
  ShadowMutex m = main.make_mutex();
  ShadowCondVar cv = main.make_condvar();
  ThreadId waiter = main.spawn([=](Thread& t) {
    t.lock(m);
    while (t.read(done) == 0) t.cond_wait(cv, m);
    t.unlock(m);
  });
  ThreadId signaler = main.spawn([=](Thread& t) {
    t.lock(m);
    t.write(done, 1);
    t.cond_signal(cv);
    t.unlock(m);
  });
  main.join(waiter);
  main.join(signaler);
}

std::vector<ProgramHandle> build() {
  return {
      {"data-race-flag", "unprotected read and write of a shared flag", data_race_flag, {5, 2, 2}},
      {"data-race-flag-locked", "the flag program with both accesses under one mutex",
       data_race_flag_locked, {5, 4, 4}},
      {"deadlock-two-mutexes", "two threads taking two mutexes in opposite orders",
       deadlock_two_mutexes, {5, 7, 7}},
      {"livelock-philosophers", "two philosophers that release and retry when the second fork is taken",
       livelock_philosophers, {5, 5, 5}},
      {"spin-flag", "one thread spins reading a flag until another sets it", spin_flag, {5, 3, 2}},
      {"independent-writes", "two threads writing different cells", independent_writes, {5, 2, 2}},
      {"dependent-writes", "two threads writing the same cell", dependent_writes, {5, 2, 2}},
      {"single-thread", "main alone, no branching", single_thread, {5}},
      {"semaphore-handoff", "producer posts a semaphore the consumer waits on", semaphore_handoff,
       {5, 3, 3}},
      {"condvar-handoff", "waiter sleeps on a condition variable until signalled", condvar_handoff,
       {5, 6, 5}},
  };
}

}  // namespace

const std::vector<ProgramHandle>& programs() {
  static const std::vector<ProgramHandle> all = build();
  return all;
}

const ProgramHandle& find(std::string_view name) {
  for (const ProgramHandle& p : programs()) {
    if (p.name == name) return p;
  }
  std::string msg = "unknown program '" + std::string(name) + "'; available:";
  for (const ProgramHandle& p : programs()) msg += " " + p.name;
  throw UsageError(msg);
}

}  // namespace stmc::corpus
