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

// Execution contexts for program threads. The runtime hands the permit
// around with wake()/wait(); a backend decides what a context is.
//
// Exactly one context runs at a time. Every wait() is preceded by exactly
// one wake() naming the context that should run next.

#ifndef STMC_SRC_CONTEXTS_HPP
#define STMC_SRC_CONTEXTS_HPP

#include <functional>
#include <memory>
#include <mutex>

#include "stmc/model.hpp"
#include "stmc/runtime.hpp"

namespace stmc::detail {

using Lock = std::unique_lock<std::mutex>;
using Predicate = std::function<bool()>;

class Contexts {
 public:
  virtual ~Contexts() = default;

  /// Held around every touch of runtime state. Empty for fibers.
  virtual Lock guard() = 0;
  /// Registers a context that starts running `body` on its first wake.
  virtual void create(ThreadId tid, std::function<void()> body) = 0;
  virtual void wake(ThreadId tid) = 0;
  virtual void wake_controller() = 0;
  /// Suspends the calling program context until `ready` holds.
  virtual void wait(Lock& lk, ThreadId self, const Predicate& ready) = 0;
  virtual void wait_controller(Lock& lk, const Predicate& ready) = 0;
  /// Runs every unfinished context to its end; their wait predicates must
  /// all hold by now. Called by the controller without the guard held.
  virtual void shutdown() = 0;
};

std::unique_ptr<Contexts> make_contexts(Backend backend);

}  // namespace stmc::detail

#endif  // STMC_SRC_CONTEXTS_HPP
