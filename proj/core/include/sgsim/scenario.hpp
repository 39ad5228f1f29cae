#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgsim/aco.hpp"
#include "sgsim/bench.hpp"
#include "sgsim/orbit.hpp"

namespace sgsim {

// A scenario file describes one workload run. Line-based: top-level
// "key value" pairs, "[section]" headers, '#' comments. Unknown keys are
// rejected with their line number.
//
//   name demo
//   seed 42
//   ticks 200000
//   expect completed          # or: deadlock
//
//   [orbit]                   # exactly one workload section:
//   variant sd                # [orbit], [aco] or [mix]
//   space 10000
//   x0 1
//   workers 8
//   group_size 4
//   generator affine 3 1      # repeatable
//
//   [aco]
//   variant sr
//   colonies 16
//   ants 4
//   ant_iters 2
//   global_iters 8
//   fanout 4
//   ant_compute 50
//   instance path/to/file     # or: random_jobs 30
//   heartbeat 100
//
//   [mix]
//   p2p 0.9999
//   global 0.0001
//   local 0
//   nodes 60
//   topology sgroups          # or: mesh
//   group_size 10
//
//   [chaos]
//   period 1000
//   seed 7
//   exclude aco.master        # repeatable
struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Tick ticks = 200'000;
  enum class Expect { completed, deadlock } expect = Expect::completed;

  enum class Workload { none, orbit, aco, mix } workload = Workload::none;
  OrbitSpec orbit;
  bool orbit_conservation = true;

  AcoTopology aco;
  std::optional<std::string> aco_instance_path;
  int aco_random_jobs = 0;
  std::uint64_t aco_instance_seed = 99;
  Tick heartbeat = 0;

  MixConfig mix;

  Tick chaos_period = 0;
  std::uint64_t chaos_seed = 7;

  static ScenarioSpec parse(const std::string& text);  // throws ParseError
  static ScenarioSpec load(const std::string& path);
  // "section.key=value" (or "key=value" for top-level); throws SimError on
  // unknown keys.
  void apply_override(const std::string& assignment);
};

struct ScenarioResult {
  int exit_code = 2;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> path
};

// Runs the scenario and writes its CSV outputs (metrics.csv plus a
// per-workload result file) under out_dir. Exit codes: 0 run matched the
// expectation, 1 assertion/expectation failure, 2 usage or parse errors.
ScenarioResult run_scenario(const ScenarioSpec& spec,
                            const std::string& out_dir);

}  // namespace sgsim
