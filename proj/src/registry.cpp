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

#include "stmc/registry.hpp"

#include <string>

namespace stmc {

ObjectId Registry::register_object(ObjectHandle handle) {
  if (handle.token == 0 || handle.token > last_handle_) {
    throw UsageError("register_object: handle was not minted by this registry");
  }
  if (object_map_.contains(handle.token)) {
    throw UsageError("register_object: handle " + std::to_string(handle.token) +
                     " already registered");
  }
  ObjectId oid(next_oid_++);
  object_map_.emplace(handle.token, oid);
  if (listener_) listener_(handle, oid);
  return oid;
}

ObjectId Registry::resolve(ObjectHandle handle) const {
  auto it = object_map_.find(handle.token);
  if (it == object_map_.end()) {
    throw UsageError("access to unregistered shared object");
  }
  return it->second;
}

}  // namespace stmc
