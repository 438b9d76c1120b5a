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

#include "stmc/dpor.hpp"

#include <stdexcept>
#include <string>

namespace stmc::dpor {

bool dependent(const VisibleOp& a, const VisibleOp& b) {
  if (a.target.is_dont_care() || a.target != b.target) return false;
  return a.access == AccessKind::Write || b.access == AccessKind::Write;
}

bool co_enabled(const ExecutionLog& log, std::size_t depth, ThreadId tid) {
  if (depth >= log.size()) {
    throw std::out_of_range("co_enabled: depth " + std::to_string(depth) + " beyond log of " +
                            std::to_string(log.size()));
  }
  return log[depth].enabled.contains(tid);
}

std::set<Addition> on_execute(const ExecutionLog& log) {
  std::set<Addition> out;
  if (log.size() < 2) return out;
  const LoggedStep& last = log.back();
  for (std::size_t j = log.size() - 1; j-- > 0;) {
    const LoggedStep& earlier = log[j];
    if (earlier.op.tid == last.op.tid) continue;
    if (!dependent(earlier.op, last.op)) continue;
    if (!co_enabled(log, j, last.op.tid)) continue;
    out.emplace(j, last.op.tid);
    break;
  }
  return out;
}

bool is_backtrack_point(std::span<const VisibleOp> ops) {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t k = i + 1; k < ops.size(); ++k) {
      if (ops[i].tid != ops[k].tid && dependent(ops[i], ops[k])) return true;
    }
  }
  return false;
}

std::set<Addition> all_alternatives(const ExecutionLog& log) {
  std::set<Addition> out;
  if (log.empty()) return out;
  const LoggedStep& last = log.back();
  if (!last.op.touches_object()) return out;
  for (const auto& [tid, op] : last.enabled) {
    if (tid != last.op.tid && op.touches_object()) out.emplace(log.size() - 1, tid);
  }
  return out;
}

}  // namespace stmc::dpor
