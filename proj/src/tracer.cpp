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

#include "stmc/tracer.hpp"

#include <charconv>
#include <chrono>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fcntl.h>
#include <unistd.h>

namespace stmc::tracer {

namespace fs = std::filesystem;

std::string format_trace(const std::vector<ThreadId>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += std::to_string(i + 1);
    out += ' ';
    out += std::to_string(steps[i].value());
    out += ".\n";
  }
  return out;
}

namespace {

bool parse_number(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::vector<ThreadId> parse_trace_text(std::string_view text) {
  std::vector<ThreadId> steps;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw ParseError("trace line " + std::to_string(line_no) + ": missing newline terminator");
    }
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    auto fail = [&](const std::string& why) {
      return ParseError("trace line " + std::to_string(line_no) + " ('" + std::string(line) + "'): " + why);
    };
    std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos || line.size() < sp + 3 || line.back() != '.') {
      throw fail("expected '<index> <tid>.'");
    }
    std::uint64_t index = 0, tid = 0;
    if (!parse_number(line.substr(0, sp), index)) throw fail("bad index");
    if (!parse_number(line.substr(sp + 1, line.size() - sp - 2), tid) || tid > 0xfffffffeull) {
      throw fail("bad thread id");
    }
    if (index != steps.size() + 1) {
      throw fail("expected index " + std::to_string(steps.size() + 1));
    }
    steps.emplace_back(static_cast<std::uint32_t>(tid));
  }
  return steps;
}

Trace parse_trace(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return Trace{parse_trace_text(buf.str()), 0};
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string trace_file_name(OutcomeKind kind, std::uint64_t iteration, std::uint32_t node) {
  std::string prefix = node == 0 ? "" : "node" + std::to_string(node) + "_";
  std::string i = std::to_string(iteration);
  switch (kind) {
    case OutcomeKind::Deadlock: return prefix + "bt_" + i + "_deadlock";
    case OutcomeKind::Livelock: return prefix + "bt_" + i + "_livelock";
    case OutcomeKind::BoundWarning: return prefix + "bt_" + i + "_warning";
    case OutcomeKind::DataRace: return prefix + "data_race" + i;
    case OutcomeKind::NormalEnd: return prefix + "trace" + i;
  }
  return prefix + "trace" + i;
}

std::string report_line(const ViolationReport& v) {
  std::string out(to_string(v.kind));
  out += " iteration=" + std::to_string(v.iteration);
  if (v.race_detail) {
    out += " object=" + std::to_string(v.race_detail->object.value());
    out += " readers=" + std::to_string(v.race_detail->readers_pending);
    out += " writers=" + std::to_string(v.race_detail->writers_pending);
  }
  out += " trace=" + v.trace_file;
  return out;
}

ViolationReport parse_report_line(std::string_view line) {
  ViolationReport v;
  std::istringstream in{std::string(line)};
  std::string word;
  if (!(in >> word)) throw ParseError("empty report line");
  v.kind = parse_violation_kind(word);
  RaceDetail detail;
  while (in >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("bad report field '" + word + "'");
    std::string key = word.substr(0, eq), val = word.substr(eq + 1);
    std::uint64_t n = 0;
    if (key == "trace") {
      v.trace_file = val;
      continue;
    }
    if (!parse_number(val, n)) throw ParseError("bad number in '" + word + "'");
    if (key == "iteration") v.iteration = n;
    else if (key == "object") detail.object = ObjectId(static_cast<std::uint32_t>(n));
    else if (key == "readers") detail.readers_pending = static_cast<std::uint32_t>(n);
    else if (key == "writers") detail.writers_pending = static_cast<std::uint32_t>(n);
    else throw ParseError("unknown report field '" + key + "'");
  }
  if (v.kind == ViolationKind::DataRace) v.race_detail = detail;
  return v;
}

Tracer::Tracer(fs::path out_dir, std::uint32_t node, bool keep_all)
    : traces_dir_(std::move(out_dir) / "traces"), node_(node), keep_all_(keep_all) {
  std::error_code ec;
  fs::create_directories(traces_dir_, ec);
  if (ec) throw std::runtime_error("cannot create " + traces_dir_.string() + ": " + ec.message());
}

void Tracer::open_iteration(std::uint64_t iteration) {
  if (open_) throw ProtocolError("tracer: iteration " + std::to_string(*open_) + " still open");
  open_ = iteration;
  steps_.clear();
}

void Tracer::record_step(std::uint64_t iteration, ThreadId tid) {
  if (open_ != iteration) throw ProtocolError("tracer: step for an iteration that is not open");
  steps_.push_back(tid);
}

std::vector<fs::path> Tracer::close_iteration(std::uint64_t iteration, OutcomeKind kind) {
  if (open_ != iteration) throw ProtocolError("tracer: closing an iteration that is not open");
  open_.reset();
  std::vector<fs::path> written;
  if (kind == OutcomeKind::Deadlock || kind == OutcomeKind::Livelock || keep_all_) {
    written.push_back(write_file(trace_file_name(kind, iteration, node_), steps_));
  }
  return written;
}

fs::path Tracer::write_violation(OutcomeKind kind, std::uint64_t iteration, const std::vector<ThreadId>& steps) {
  return write_file(trace_file_name(kind, iteration, node_), steps);
}

fs::path Tracer::write_file(const std::string& name, const std::vector<ThreadId>& steps) {
  fs::path path = traces_dir_ / name;
  std::string text = format_trace(steps);
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot write trace file " + path.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < text.size()) {
    ssize_t n = ::write(fd, text.data() + off, text.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      int err = errno;
      ::close(fd);
      throw std::runtime_error("cannot write trace file " + path.string() + ": " + std::strerror(err));
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
  return path;
}

void write_report(const fs::path& out_dir, const std::vector<ViolationReport>& violations) {
  fs::create_directories(out_dir);
  fs::path path = out_dir / "report.txt";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "# generated " << stamp << '\n';
  for (const ViolationReport& v : violations) out << report_line(v) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<ViolationKind> ReplayReport::violation_kinds() const {
  std::vector<ViolationKind> out;
  if (race) out.push_back(ViolationKind::DataRace);
  if (outcome == Outcome::Deadlock) out.push_back(ViolationKind::Deadlock);
  if (outcome == Outcome::Livelock) out.push_back(ViolationKind::Livelock);
  return out;
}

ReplayReport replay(const ProgramHandle& program, const Trace& trace, ExecutionOptions options) {
  options.prefix = trace.steps;
  options.force.reset();
  ExecutionResult r = execute(program, options);
  return ReplayReport{r.outcome, r.race, r.op_log(), r.trace()};
}

}  // namespace stmc::tracer
