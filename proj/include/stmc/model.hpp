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

#ifndef STMC_MODEL_HPP
#define STMC_MODEL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stmc {

/// Misuse of the shadow API by a program under test (unlock by non-holder,
/// access to an unregistered cell, ...).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violation of the checker's internal message protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A recorded trace could not be followed by the program.
class ReplayDivergence : public std::runtime_error {
 public:
  ReplayDivergence(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thread identity, dense in creation order; the main thread is 0.
class ThreadId {
 public:
  constexpr ThreadId() = default;
  constexpr explicit ThreadId(std::uint32_t v) : value_(v) {}
  constexpr std::uint32_t value() const { return value_; }
  friend constexpr auto operator<=>(ThreadId, ThreadId) = default;

 private:
  std::uint32_t value_ = 0;
};

/// Shared-object identity, dense in registration order. The distinguished
/// dont_care() value fills the fourth slot of ops that touch no object.
class ObjectId {
 public:
  constexpr ObjectId() = default;
  constexpr explicit ObjectId(std::uint32_t v) : value_(v) {}
  static constexpr ObjectId dont_care() { return ObjectId(kDontCare); }
  constexpr bool is_dont_care() const { return value_ == kDontCare; }
  constexpr std::uint32_t value() const { return value_; }
  friend constexpr auto operator<=>(ObjectId, ObjectId) = default;

 private:
  static constexpr std::uint32_t kDontCare = 0xffffffffu;
  std::uint32_t value_ = kDontCare;
};

enum class AccessKind { Read, Write, DontCare };
enum class Token { NonBlocking, Waiting };

/// The announcement `{Token, Tid, Op, Oid}` a thread sends before each
/// visible operation.
struct VisibleOp {
  Token token = Token::NonBlocking;
  ThreadId tid;
  AccessKind access = AccessKind::DontCare;
  ObjectId target = ObjectId::dont_care();

  bool touches_object() const { return !target.is_dont_care(); }
  friend bool operator==(const VisibleOp&, const VisibleOp&) = default;
};

/// Validating constructor. Access and target are DontCare together or not at all.
VisibleOp make_visible_op(Token token, ThreadId tid, AccessKind access, ObjectId target);

/// Wire form `{n,0,dc,dc}` / `{y,1,w,2}`.
std::string to_string(const VisibleOp& op);
VisibleOp parse_visible_op(std::string_view text);

std::string_view to_string(AccessKind kind);
std::string_view to_string(Token token);

struct Trace {
  std::vector<ThreadId> steps;
  std::uint64_t iteration = 0;
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct BacktrackPoint {
  std::size_t depth = 0;
  std::vector<ThreadId> prefix;
  std::set<ThreadId> pending;
  std::set<ThreadId> done;
  std::uint64_t discovery_iteration = 0;

  /// Checks pending/done disjointness and prefix length.
  void validate() const;
  friend bool operator==(const BacktrackPoint&, const BacktrackPoint&) = default;
};

enum class ViolationKind { Deadlock, Livelock, DataRace };
std::string_view to_string(ViolationKind kind);
ViolationKind parse_violation_kind(std::string_view text);

struct RaceDetail {
  ObjectId object;
  std::uint32_t readers_pending = 0;
  std::uint32_t writers_pending = 0;
  friend bool operator==(const RaceDetail&, const RaceDetail&) = default;
};

struct ViolationReport {
  ViolationKind kind = ViolationKind::Deadlock;
  std::uint64_t iteration = 0;
  Trace trace;
  std::optional<RaceDetail> race_detail;
  /// File name of the emitted trace, relative to the traces directory.
  std::string trace_file;

  void validate() const;
  friend bool operator==(const ViolationReport&, const ViolationReport&) = default;
};

/// Comma-separated tid list, used by several record formats.
std::string join_tids(const std::vector<ThreadId>& tids);
std::vector<ThreadId> split_tids(std::string_view csv);

}  // namespace stmc

template <>
struct std::hash<stmc::ThreadId> {
  std::size_t operator()(stmc::ThreadId t) const noexcept { return t.value(); }
};

#endif  // STMC_MODEL_HPP
