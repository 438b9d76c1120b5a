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

#ifndef STMC_CLI_HPP
#define STMC_CLI_HPP

#include <iosfwd>

namespace stmc::cli {

enum ExitCode : int { kClean = 0, kViolations = 1, kUsage = 2, kInternal = 3 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stmc::cli

#endif  // STMC_CLI_HPP
