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

#ifndef STMC_REGISTRY_HPP
#define STMC_REGISTRY_HPP

#include <cstdint>
#include <functional>
#include <unordered_map>

#include "stmc/model.hpp"

namespace stmc {

/// Opaque token minted by the shadow API when a primitive is constructed.
/// Handle 0 is never minted, so a default-constructed handle is unregistered.
struct ObjectHandle {
  std::uint64_t token = 0;
  friend bool operator==(ObjectHandle, ObjectHandle) = default;
};

/// Assigns thread and object identities by creation order. One table lives
/// for one execution; identical schedules produce identical assignments.
class Registry {
 public:
  using RegistrationListener = std::function<void(ObjectHandle, ObjectId)>;

  ThreadId register_thread() { return ThreadId(next_tid_++); }

  ObjectHandle mint_handle() { return ObjectHandle{++last_handle_}; }

  ObjectId register_object(ObjectHandle handle);
  ObjectId resolve(ObjectHandle handle) const;
  bool is_registered(ObjectHandle handle) const { return object_map_.contains(handle.token); }

  std::uint32_t thread_count() const { return next_tid_; }
  std::uint32_t object_count() const { return next_oid_; }

  void set_listener(RegistrationListener listener) { listener_ = std::move(listener); }

 private:
  std::uint32_t next_tid_ = 0;
  std::uint32_t next_oid_ = 0;
  std::uint64_t last_handle_ = 0;
  std::unordered_map<std::uint64_t, ObjectId> object_map_;
  RegistrationListener listener_;
};

}  // namespace stmc

#endif  // STMC_REGISTRY_HPP
