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

// Built-in programs, addressed by name from the command line.

#ifndef STMC_CORPUS_HPP
#define STMC_CORPUS_HPP

#include <string_view>
#include <vector>

#include "stmc/runtime.hpp"

namespace stmc::corpus {

const std::vector<ProgramHandle>& programs();

/// Throws UsageError listing the available names.
const ProgramHandle& find(std::string_view name);

}  // namespace stmc::corpus

#endif  // STMC_CORPUS_HPP
