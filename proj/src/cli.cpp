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

#include "stmc/cli.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "stmc/corpus.hpp"
#include "stmc/dispatch.hpp"
#include "stmc/explorer.hpp"
#include "stmc/tracer.hpp"

namespace stmc::cli {

namespace {

struct Flags {
  std::string program;
  std::size_t bound = 0;
  std::uint32_t nodes = 1;
  std::vector<std::string> workers;
  std::string out = "stmc-out";
  bool no_dpor = false;
  bool no_race = false;
  bool strict_races = false;
  bool keep_all = false;
  std::string seed_trace;
  std::string trace;
  std::string listen;
  std::vector<std::size_t> partitions;
};

void add_exploration_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--program", f.program, "corpus program name")->required();
  cmd->add_option("--bound", f.bound, "depth bound (default: 10x the partition sum)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--no-dpor", f.no_dpor, "branch on every enabled object access");
  cmd->add_flag("--no-race", f.no_race, "disable the race detector");
  cmd->add_flag("--strict-races", f.strict_races, "also report overlapping writes (extension)");
  cmd->add_flag("--keep-all-traces", f.keep_all, "write a trace file for every iteration");
}

ExplorationConfig to_config(const Flags& f) {
  ExplorationConfig c;
  c.bound = f.bound;
  c.dpor_enabled = !f.no_dpor;
  c.race_enabled = !f.no_race;
  c.strict_races = f.strict_races;
  c.out_dir = f.out;
  c.node_count = f.nodes;
  c.keep_all_traces = f.keep_all;
  if (!f.seed_trace.empty()) c.seed_trace = tracer::parse_trace(f.seed_trace).steps;
  return c;
}

void print_violations(std::ostream& out, const std::vector<ViolationReport>& violations) {
  for (const ViolationReport& v : violations) out << tracer::report_line(v) << '\n';
}

int do_check(const Flags& f, std::ostream& out) {
  const ProgramHandle& program = corpus::find(f.program);
  ExplorationConfig config = to_config(f);
  if (f.nodes < 1) throw UsageError("--nodes must be at least 1");
  ExplorationReport report = f.workers.empty() ? explore(program, config)
                                               : dispatch::run_master(program, config, f.workers);
  out << "program=" << program.name << " iterations=" << report.iterations_run
      << " points=" << report.points_explored << " violations=" << report.violations.size()
      << " bound_warnings=" << report.bound_warnings << " abandoned=" << report.abandoned
      << " duplicates=" << report.duplicates << '\n';
  print_violations(out, report.violations);
  return report.violations.empty() ? kClean : kViolations;
}

int do_replay(const Flags& f, std::ostream& out) {
  const ProgramHandle& program = corpus::find(f.program);
  Trace trace = tracer::parse_trace(f.trace);
  ExecutionOptions options;
  options.bound = effective_bound(program, to_config(f));
  options.race_enabled = !f.no_race;
  options.strict_races = f.strict_races;
  tracer::ReplayReport r = tracer::replay(program, trace, options);
  out << r.op_log;
  out << "outcome=" << to_string(r.outcome) << '\n';
  if (r.race) {
    out << "data-race object=" << r.race->detail.object.value() << " readers=" << r.race->detail.readers_pending
        << " writers=" << r.race->detail.writers_pending << " step=" << r.race->at_step << '\n';
  }
  return r.violation_kinds().empty() ? kClean : kViolations;
}

int do_worker(const Flags& f, std::ostream& out) {
  const ProgramHandle& program = corpus::find(f.program);
  dispatch::serve_worker(program, to_config(f), f.listen);
  out << "worker done\n";
  return kClean;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stateless model checker for programs written against the stmc shadow threading API", "stmc"};
  app.require_subcommand(1, 1);
  Flags f;

  CLI::App* check = app.add_subcommand("check", "explore a program's interleavings");
  add_exploration_flags(check, f);
  check->add_option("--nodes", f.nodes, "in-process exploration nodes");
  check->add_option("--workers", f.workers, "worker addresses host:port,...")->delimiter(',');
  check->add_option("--seed-trace", f.seed_trace, "trace file replayed at the start of iteration 0");

  CLI::App* replay = app.add_subcommand("replay", "re-execute a trace file");
  replay->add_option("--program", f.program, "corpus program name")->required();
  replay->add_option("--trace", f.trace, "trace file")->required();
  replay->add_option("--bound", f.bound, "depth bound; use the bound the trace was found with");
  replay->add_flag("--no-race", f.no_race, "disable the race detector");
  replay->add_flag("--strict-races", f.strict_races, "also report overlapping writes (extension)");

  CLI::App* worker = app.add_subcommand("worker", "serve one master as an exploration node");
  add_exploration_flags(worker, f);
  worker->add_option("--listen", f.listen, "address to listen on, host:port")->required();

  CLI::App* estimate = app.add_subcommand("estimate-bound", "sum of per-thread partition counts");
  estimate->add_option("partitions", f.partitions, "partition count per thread")->required();

  app.add_subcommand("list-programs", "list the built-in programs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (check->parsed()) return do_check(f, out);
    if (replay->parsed()) return do_replay(f, out);
    if (worker->parsed()) return do_worker(f, out);
    if (estimate->parsed()) {
      out << sched::estimate_bound(f.partitions) << '\n';
      return kClean;
    }
    for (const ProgramHandle& p : corpus::programs()) out << p.name << "  " << p.description << '\n';
    return kClean;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ReplayDivergence& e) {
    err << "error: trace diverges at step " << e.step() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ProtocolError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace stmc::cli
