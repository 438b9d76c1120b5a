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

#include "stmc/dispatch.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "stmc/tracer.hpp"

namespace stmc::dispatch {

namespace {

std::uint64_t parse_u64(std::string_view s, std::string_view field) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError("bad value for " + std::string(field) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::set<ThreadId> to_set(const std::vector<ThreadId>& v) { return {v.begin(), v.end()}; }
std::vector<ThreadId> to_vec(const std::set<ThreadId>& s) { return {s.begin(), s.end()}; }

// Splits `key=value` fields separated by single spaces; values may be empty.
std::vector<std::pair<std::string, std::string>> fields(std::string_view line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(line)};
  std::string word;
  while (in >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + word + "'");
    out.emplace_back(word.substr(0, eq), word.substr(eq + 1));
  }
  return out;
}

}  // namespace

std::string encode_point(const BacktrackPoint& point) {
  return "depth=" + std::to_string(point.depth) + " iter=" + std::to_string(point.discovery_iteration) +
         " done=" + join_tids(to_vec(point.done)) + " pending=" + join_tids(to_vec(point.pending)) +
         " prefix=" + join_tids(point.prefix);
}

BacktrackPoint decode_point(std::string_view line) {
  static constexpr const char* kOrder[] = {"depth", "iter", "done", "pending", "prefix"};
  auto f = fields(line);
  if (f.size() != 5) throw ParseError("backtrack record needs 5 fields: '" + std::string(line) + "'");
  for (std::size_t i = 0; i < 5; ++i) {
    if (f[i].first != kOrder[i]) {
      throw ParseError("backtrack record field " + std::to_string(i + 1) + " should be '" + kOrder[i] + "'");
    }
  }
  BacktrackPoint p;
  p.depth = parse_u64(f[0].second, "depth");
  p.discovery_iteration = parse_u64(f[1].second, "iter");
  p.done = to_set(split_tids(f[2].second));
  p.pending = to_set(split_tids(f[3].second));
  p.prefix = split_tids(f[4].second);
  p.validate();
  return p;
}

std::vector<Workload> partition(std::vector<BacktrackPoint> points, std::uint32_t n) {
  if (n < 1) throw UsageError("partition needs at least one node");
  std::stable_sort(points.begin(), points.end(), [](const BacktrackPoint& a, const BacktrackPoint& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    if (a.discovery_iteration != b.discovery_iteration) return a.discovery_iteration < b.discovery_iteration;
    return a.prefix < b.prefix;
  });
  std::vector<Workload> out(n);
  for (std::uint32_t k = 0; k < n; ++k) out[k].node_id = k;
  for (std::size_t i = 0; i < points.size(); ++i) out[i % n].points.push_back(std::move(points[i]));
  return out;
}

std::vector<std::string> encode_report(const ExplorationReport& report) {
  std::vector<std::string> lines;
  lines.push_back("report iterations=" + std::to_string(report.iterations_run) +
                  " bound_warnings=" + std::to_string(report.bound_warnings) +
                  " points=" + std::to_string(report.points_explored) +
                  " abandoned=" + std::to_string(report.abandoned) +
                  " duplicates=" + std::to_string(report.duplicates) +
                  " violations=" + std::to_string(report.violations.size()));
  for (const ViolationReport& v : report.violations) {
    lines.push_back(tracer::report_line(v) + " steps=" + join_tids(v.trace.steps));
  }
  return lines;
}

ExplorationReport decode_report(const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0].rfind("report ", 0) != 0) throw ParseError("report must start with a 'report' line");
  ExplorationReport r;
  std::uint64_t count = 0;
  for (const auto& [k, v] : fields(std::string_view(lines[0]).substr(7))) {
    std::uint64_t n = parse_u64(v, k);
    if (k == "iterations") r.iterations_run = n;
    else if (k == "bound_warnings") r.bound_warnings = n;
    else if (k == "points") r.points_explored = n;
    else if (k == "abandoned") r.abandoned = n;
    else if (k == "duplicates") r.duplicates = n;
    else if (k == "violations") count = n;
    else throw ParseError("unknown report field '" + k + "'");
  }
  if (lines.size() != count + 1) {
    throw ParseError("report announces " + std::to_string(count) + " violations but carries " +
                     std::to_string(lines.size() - 1));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    auto at = line.rfind(" steps=");
    if (at == std::string_view::npos) throw ParseError("violation record without steps");
    ViolationReport v = tracer::parse_report_line(line.substr(0, at));
    v.trace = Trace{split_tids(line.substr(at + 7)), v.iteration};
    r.violations.push_back(std::move(v));
  }
  return r;
}

ExplorationReport run_in_process(const ProgramHandle& program, const ExplorationConfig& config,
                                 IterationObserver observer) {
  config.validate();
  std::mutex observer_mu;
  IterationObserver shared;
  if (observer) {
    shared = [&](const IterationRecord& r) {
      std::lock_guard<std::mutex> g(observer_mu);
      observer(r);
    };
  }

  Explorer master(program, config, 0);
  master.set_observer(shared);
  master.run_initial();
  std::vector<BacktrackPoint> initial = master.store().points();
  master.store() = BacktrackStore{};
  std::vector<Workload> workloads = partition(std::move(initial), config.node_count);
  master.seed(workloads[0].points);

  std::vector<std::unique_ptr<Explorer>> nodes;
  std::vector<std::exception_ptr> errors(config.node_count);
  std::vector<std::thread> threads;
  for (std::uint32_t k = 1; k < config.node_count; ++k) {
    nodes.push_back(std::make_unique<Explorer>(program, config, k));
    nodes.back()->set_observer(shared);
    nodes.back()->share_seen(master);
    nodes.back()->seed(workloads[k].points);
  }
  for (std::uint32_t k = 1; k < config.node_count; ++k) {
    threads.emplace_back([&, k] {
      try {
        nodes[k - 1]->run_store();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  try {
    master.run_store();
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExplorationReport total = master.report();
  for (const auto& node : nodes) total.merge(node->report());
  tracer::write_report(config.out_dir, total.violations);
  return total;
}

// ---- socket transport ----------------------------------------------------------

namespace {

class Connection {
 public:
  explicit Connection(int fd, std::string peer) : fd_(fd), peer_(std::move(peer)) {}
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection() {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(const std::string& line) {
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ProtocolError(peer_ + ": send failed: " + std::strerror(errno));
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    for (;;) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ProtocolError(peer_ + ": connection closed");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void expect(const std::string& want) {
    std::string got = read_line();
    if (got != want) throw ProtocolError(peer_ + ": expected '" + want + "', got '" + got + "'");
  }

  std::uint64_t expect_count(const std::string& keyword) {
    std::string got = read_line();
    if (got.rfind(keyword + " ", 0) != 0) {
      throw ProtocolError(peer_ + ": expected '" + keyword + " <n>', got '" + got + "'");
    }
    return parse_u64(std::string_view(got).substr(keyword.size() + 1), keyword);
  }

  const std::string& peer() const { return peer_; }

 private:
  int fd_;
  std::string peer_;
  std::string buf_;
};

std::pair<std::string, std::string> split_address(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) {
    throw UsageError("address must be host:port, got '" + addr + "'");
  }
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  return {host, addr.substr(colon + 1)};
}

struct AddrInfo {
  addrinfo* head = nullptr;
  AddrInfo(const std::string& addr, bool passive) {
    auto [host, port] = split_address(addr);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &head);
    if (rc != 0) throw ProtocolError(addr + ": " + ::gai_strerror(rc));
  }
  ~AddrInfo() {
    if (head) ::freeaddrinfo(head);
  }
};

std::unique_ptr<Connection> connect_to(const std::string& addr) {
  AddrInfo info(addr, false);
  int err = 0;
  // Workers started alongside the master may not be listening yet.
  for (int attempt = 0; attempt < 20; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    for (addrinfo* a = info.head; a; a = a->ai_next) {
      int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) return std::make_unique<Connection>(fd, addr);
      err = errno;
      ::close(fd);
    }
    if (err != ECONNREFUSED) break;
  }
  throw ProtocolError(addr + ": cannot connect: " + std::strerror(err));
}

}  // namespace

ExplorationReport run_master(const ProgramHandle& program, const ExplorationConfig& base,
                             const std::vector<std::string>& workers) {
  ExplorationConfig config = base;
  config.node_count = static_cast<std::uint32_t>(workers.size() + 1);
  config.validate();

  Explorer master(program, config, 0);
  master.run_initial();
  std::vector<BacktrackPoint> initial = master.store().points();
  master.store() = BacktrackStore{};
  std::vector<Workload> workloads = partition(std::move(initial), config.node_count);
  master.seed(workloads[0].points);

  std::vector<std::unique_ptr<Connection>> links;
  for (std::size_t i = 0; i < workers.size(); ++i) {
    std::uint32_t node = static_cast<std::uint32_t>(i + 1);
    auto c = connect_to(workers[i]);
    c->send_line("HELLO " + std::to_string(node));
    c->expect("HELLO " + std::to_string(node));
    c->send_line("WORKLOAD " + std::to_string(workloads[node].points.size()));
    for (const BacktrackPoint& p : workloads[node].points) c->send_line(encode_point(p));
    links.push_back(std::move(c));
  }

  master.run_store();

  std::vector<NodeStatus> status(config.node_count);
  ExplorationReport total = master.report();
  status[0] = NodeStatus{0, NodeState::Done, total.violations.size()};
  for (std::size_t i = 0; i < links.size(); ++i) {
    Connection& c = *links[i];
    c.expect("DONE");
    std::vector<std::string> lines{c.read_line()};
    std::string head = lines[0];
    auto at = head.rfind("violations=");
    if (head.rfind("report ", 0) != 0 || at == std::string::npos) {
      throw ProtocolError(c.peer() + ": malformed report header '" + head + "'");
    }
    std::uint64_t count = parse_u64(std::string_view(head).substr(at + 11), "violations");
    for (std::uint64_t k = 0; k < count; ++k) lines.push_back(c.read_line());
    ExplorationReport r = decode_report(lines);
    status[i + 1] = NodeStatus{static_cast<std::uint32_t>(i + 1), NodeState::Done, r.violations.size()};
    total.merge(r);
    c.send_line("BYE");
  }
  tracer::write_report(config.out_dir, total.violations);
  return total;
}

void serve_worker(const ProgramHandle& program, const ExplorationConfig& config, const std::string& listen) {
  AddrInfo info(listen, true);
  int server = -1;
  for (addrinfo* a = info.head; a; a = a->ai_next) {
    server = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (server < 0) continue;
    int one = 1;
    ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(server, a->ai_addr, a->ai_addrlen) == 0 && ::listen(server, 1) == 0) break;
    ::close(server);
    server = -1;
  }
  if (server < 0) throw ProtocolError(listen + ": cannot listen: " + std::strerror(errno));
  int fd = ::accept(server, nullptr, nullptr);
  ::close(server);
  if (fd < 0) throw ProtocolError(listen + ": accept failed: " + std::strerror(errno));
  Connection c(fd, "master");

  std::string hello = c.read_line();
  if (hello.rfind("HELLO ", 0) != 0) throw ProtocolError("master: expected 'HELLO <node_id>', got '" + hello + "'");
  std::uint32_t node = static_cast<std::uint32_t>(parse_u64(std::string_view(hello).substr(6), "node id"));
  if (node == 0) throw ProtocolError("master: node id 0 is reserved for the master");
  c.send_line(hello);

  std::uint64_t count = c.expect_count("WORKLOAD");
  std::vector<BacktrackPoint> points;
  for (std::uint64_t i = 0; i < count; ++i) points.push_back(decode_point(c.read_line()));

  Explorer worker(program, config, node);
  worker.seed(points);
  worker.run_store();

  c.send_line("DONE");
  for (const std::string& line : encode_report(worker.report())) c.send_line(line);
  c.expect("BYE");
}

}  // namespace stmc::dispatch
