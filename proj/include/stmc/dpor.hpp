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

#ifndef STMC_DPOR_HPP
#define STMC_DPOR_HPP

#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "stmc/model.hpp"

namespace stmc::dpor {

/// One executed transition and the threads enabled in the state before it.
struct LoggedStep {
  std::size_t depth = 0;
  VisibleOp op;
  std::map<ThreadId, VisibleOp> enabled;
};

using ExecutionLog = std::vector<LoggedStep>;

/// (depth, thread) to add to the backtrack set of the state at that depth.
using Addition = std::pair<std::size_t, ThreadId>;

/// Same real object and at least one write.
bool dependent(const VisibleOp& a, const VisibleOp& b);

/// Was `tid` enabled in the state at `depth`? Throws std::out_of_range.
bool co_enabled(const ExecutionLog& log, std::size_t depth, ThreadId tid);

/// Last-dependent rule for the most recent step of `log`: the latest earlier
/// depth whose op is dependent, by another thread, with the new step's
/// thread enabled there.
std::set<Addition> on_execute(const ExecutionLog& log);

/// At least two mutually dependent transitions among `ops`.
bool is_backtrack_point(std::span<const VisibleOp> ops);

/// Exhaustive alternative to on_execute: every enabled object-touching
/// thread becomes an alternative at every object-touching step.
std::set<Addition> all_alternatives(const ExecutionLog& log);

}  // namespace stmc::dpor

#endif  // STMC_DPOR_HPP
