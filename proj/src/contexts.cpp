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

#include "contexts.hpp"

#include <boost/context/fiber.hpp>
#include <boost/context/pooled_fixedsize_stack.hpp>

#include <condition_variable>
#include <map>
#include <thread>
#include <vector>

namespace stmc::detail {

namespace {

// One OS thread per program thread, parked on its own condition variable.
class ThreadContexts final : public Contexts {
 public:
  ~ThreadContexts() override { shutdown(); }

  Lock guard() override { return Lock(mu_); }

  void create(ThreadId tid, std::function<void()> body) override {
    auto slot = std::make_unique<Slot>();
    Slot& s = *slot;
    slots_.emplace(tid, std::move(slot));
    s.thread = std::thread([this, &s, body = std::move(body)] {
      {
        Lock lk(mu_);
        s.cv.wait(lk, [&] { return s.started; });
      }
      body();
    });
  }

  void wake(ThreadId tid) override {
    Slot& s = *slots_.at(tid);
    s.started = true;
    s.cv.notify_one();
  }

  void wake_controller() override { controller_cv_.notify_one(); }

  void wait(Lock& lk, ThreadId self, const Predicate& ready) override {
    slots_.at(self)->cv.wait(lk, ready);
  }

  void wait_controller(Lock& lk, const Predicate& ready) override { controller_cv_.wait(lk, ready); }

  void shutdown() override {
    {
      Lock lk(mu_);
      for (auto& [tid, s] : slots_) {
        s->started = true;
        s->cv.notify_all();
      }
    }
    for (auto& [tid, s] : slots_) {
      if (s->thread.joinable()) s->thread.join();
    }
  }

 private:
  struct Slot {
    std::thread thread;
    std::condition_variable cv;
    bool started = false;
  };

  std::mutex mu_;
  std::condition_variable controller_cv_;
  std::map<ThreadId, std::unique_ptr<Slot>> slots_;
};

namespace ctx = boost::context;

constexpr std::size_t kStackSize = 256 * 1024;

ctx::pooled_fixedsize_stack& stack_pool() {
  // Stacks are reused across executions on the same OS thread.
  thread_local ctx::pooled_fixedsize_stack pool(kStackSize);
  return pool;
}

// Program threads as fibers on the caller's OS thread. Switching is a
// direct transfer to the context named by the last wake.
class FiberContexts final : public Contexts {
 public:
  ~FiberContexts() override { shutdown(); }

  Lock guard() override { return Lock(); }

  void create(ThreadId tid, std::function<void()> body) override {
    const int who = static_cast<int>(tid.value());
    if (slots_.size() <= tid.value()) slots_.resize(tid.value() + 1);
    slots_[who].handle = ctx::fiber(std::allocator_arg, stack_pool(),
                                    [this, who, body = std::move(body)](ctx::fiber&& caller) mutable {
                                      handle(prev_) = std::move(caller);
                                      body();
                                      slots_[who].done = true;
                                      const int next = shutting_down_ ? kController : target_;
                                      prev_ = who;
                                      current_ = next;
                                      return std::move(handle(next));
                                    });
  }

  void wake(ThreadId tid) override { target_ = static_cast<int>(tid.value()); }
  void wake_controller() override { target_ = kController; }

  void wait(Lock&, ThreadId, const Predicate& ready) override {
    while (!ready()) switch_to(target_);
  }

  void wait_controller(Lock&, const Predicate& ready) override {
    while (!ready()) switch_to(target_);
  }

  void shutdown() override {
    shutting_down_ = true;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i].done && slots_[i].handle) {
        target_ = kController;
        switch_to(static_cast<int>(i));
      }
    }
  }

 private:
  static constexpr int kController = -1;

  struct Slot {
    ctx::fiber handle;
    bool done = false;
  };

  ctx::fiber& handle(int who) { return who == kController ? controller_ : slots_[who].handle; }

  void switch_to(int dest) {
    if (dest == current_) return;
    prev_ = current_;
    current_ = dest;
    ctx::fiber back = std::move(handle(dest)).resume();
    // Whoever resumed us recorded itself in prev_.
    handle(prev_) = std::move(back);
  }

  std::vector<Slot> slots_;
  ctx::fiber controller_;
  int current_ = kController;
  int prev_ = kController;
  int target_ = kController;
  bool shutting_down_ = false;
};

}  // namespace

std::unique_ptr<Contexts> make_contexts(Backend backend) {
  if (backend == Backend::Thread) return std::make_unique<ThreadContexts>();
  return std::make_unique<FiberContexts>();
}

}  // namespace stmc::detail
