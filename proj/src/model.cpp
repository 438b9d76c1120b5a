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

#include "stmc/model.hpp"

#include <charconv>

namespace stmc {

namespace {

std::uint32_t parse_u32(std::string_view s, std::string_view what) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ParseError("bad " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

VisibleOp make_visible_op(Token token, ThreadId tid, AccessKind access, ObjectId target) {
  if ((access == AccessKind::DontCare) != target.is_dont_care()) {
    throw UsageError("invalid visible op: access '" + std::string(to_string(access)) +
                     "' requires " + (target.is_dont_care() ? "a target object" : "dc target"));
  }
  return VisibleOp{token, tid, access, target};
}

std::string_view to_string(AccessKind kind) {
  switch (kind) {
    case AccessKind::Read: return "r";
    case AccessKind::Write: return "w";
    case AccessKind::DontCare: return "dc";
  }
  return "?";
}

std::string_view to_string(Token token) { return token == Token::Waiting ? "y" : "n"; }

std::string to_string(const VisibleOp& op) {
  std::string out = "{";
  out += to_string(op.token);
  out += ',';
  out += std::to_string(op.tid.value());
  out += ',';
  out += to_string(op.access);
  out += ',';
  out += op.target.is_dont_care() ? std::string("dc") : std::to_string(op.target.value());
  out += '}';
  return out;
}

VisibleOp parse_visible_op(std::string_view text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
    throw ParseError("visible op must be braced: '" + std::string(text) + "'");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 4) throw ParseError("visible op needs 4 fields");
  Token token;
  if (parts[0] == "n") token = Token::NonBlocking;
  else if (parts[0] == "y") token = Token::Waiting;
  else throw ParseError("bad token '" + std::string(parts[0]) + "'");
  ThreadId tid(parse_u32(parts[1], "tid"));
  AccessKind access;
  if (parts[2] == "r") access = AccessKind::Read;
  else if (parts[2] == "w") access = AccessKind::Write;
  else if (parts[2] == "dc") access = AccessKind::DontCare;
  else throw ParseError("bad op '" + std::string(parts[2]) + "'");
  ObjectId target = parts[3] == "dc" ? ObjectId::dont_care() : ObjectId(parse_u32(parts[3], "oid"));
  try {
    return make_visible_op(token, tid, access, target);
  } catch (const UsageError& e) {
    throw ParseError(e.what());
  }
}

void BacktrackPoint::validate() const {
  if (prefix.size() != depth) throw ProtocolError("backtrack point prefix length != depth");
  for (ThreadId t : pending) {
    if (done.contains(t)) throw ProtocolError("backtrack point pending and done overlap");
  }
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Deadlock: return "deadlock";
    case ViolationKind::Livelock: return "livelock";
    case ViolationKind::DataRace: return "data-race";
  }
  return "?";
}

ViolationKind parse_violation_kind(std::string_view text) {
  if (text == "deadlock") return ViolationKind::Deadlock;
  if (text == "livelock") return ViolationKind::Livelock;
  if (text == "data-race") return ViolationKind::DataRace;
  throw ParseError("unknown violation kind '" + std::string(text) + "'");
}

void ViolationReport::validate() const {
  if (race_detail.has_value() != (kind == ViolationKind::DataRace)) {
    throw ProtocolError("race detail must be present exactly for data races");
  }
  if (race_detail) {
    // Writer-only overlaps are legal under the strict-race extension.
    if (race_detail->writers_pending < 1 ||
        race_detail->readers_pending + race_detail->writers_pending < 2) {
      throw ProtocolError("race detail needs a writer and a second access");
    }
  }
}

std::string join_tids(const std::vector<ThreadId>& tids) {
  std::string out;
  for (std::size_t i = 0; i < tids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(tids[i].value());
  }
  return out;
}

std::vector<ThreadId> split_tids(std::string_view csv) {
  std::vector<ThreadId> out;
  if (csv.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      out.emplace_back(parse_u32(csv.substr(start, i - start), "tid"));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace stmc
