// sgsim: scenario runner, lockstep test driver, command-mix benchmark, and
// topology census for the group-partitioned actor system simulator.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sgsim/bench.hpp"
#include "sgsim/mbt.hpp"
#include "sgsim/scenario.hpp"

using namespace sgsim;

namespace {

int cmd_run(const std::string& file, std::uint64_t seed_override, bool has_seed,
            Tick ticks_override, const std::vector<std::string>& overrides,
            const std::string& out_dir) {
  ScenarioSpec spec;
  try {
    spec = ScenarioSpec::load(file);
    if (has_seed) spec.seed = seed_override;
    if (ticks_override > 0) spec.ticks = ticks_override;
    for (const auto& o : overrides) spec.apply_override(o);
  } catch (const std::exception& e) {
    std::cerr << "sgsim: " << file << ": " << e.what() << "\n";
    return 2;
  }
  try {
    ScenarioResult result = run_scenario(spec, out_dir);
    std::cout << result.summary << "\n";
    for (const auto& [name, path] : result.outputs)
      std::cout << "  " << name << ": " << path << "\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "sgsim: " << e.what() << "\n";
    return 1;
  }
}

int cmd_mbt(int cases, int max_nodes, int max_commands, std::uint64_t seed,
            const std::string& replay, const std::string& out_dir) {
  if (!replay.empty()) {
    std::ifstream f(replay);
    if (!f) {
      std::cerr << "sgsim: cannot open " << replay << "\n";
      return 2;
    }
    CommandCase c;
    try {
      c = CommandCase::from_trace(f);
    } catch (const std::exception& e) {
      std::cerr << "sgsim: " << replay << ": " << e.what() << "\n";
      return 2;
    }
    LockstepOutcome out = run_lockstep(c);
    if (out.pass) {
      std::cout << "replay passed (" << c.commands.size() << " commands)\n";
      return 0;
    }
    std::cout << "replay failed at command " << out.failed_index << ": "
              << out.reason << "\n  abstract: " << to_string(out.abstract_value)
              << "\n  concrete: " << to_string(out.concrete_value) << "\n";
    return 1;
  }

  CaseBounds bounds;
  bounds.max_nodes = max_nodes;
  bounds.max_commands = max_commands;
  for (int i = 0; i < cases; ++i) {
    std::uint64_t case_seed = seed + static_cast<std::uint64_t>(i);
    LockstepOutcome out = run_lockstep(generate_case(case_seed, bounds));
    if (out.pass) continue;
    std::cout << "case " << case_seed << " failed at command "
              << out.failed_index << ": " << out.reason << "\n";
    if (out.counterexample) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      fs::path trace = fs::path(out_dir) /
                       ("counterexample_" + std::to_string(case_seed) + ".trace");
      std::ofstream f(trace);
      f << out.counterexample->to_trace();
      std::cout << "minimised replay: " << trace.string() << "\n";
    }
    return 1;
  }
  std::cout << cases << " lockstep cases passed\n";
  return 0;
}

int cmd_bench(const std::vector<int>& nodes, const std::string& mix_str,
              const std::string& topology, int group_size, Tick ticks,
              std::uint64_t seed, const std::string& out_dir) {
  CommandMix mix;
  if (std::sscanf(mix_str.c_str(), "%lf,%lf,%lf", &mix.p2p, &mix.global,
                  &mix.local) != 3) {
    std::cerr << "sgsim: --mix expects p2p,global,local fractions\n";
    return 2;
  }
  MixTopology topo;
  if (topology == "mesh") {
    topo.kind = MixTopology::Kind::mesh;
  } else if (topology == "sgroups") {
    topo.kind = MixTopology::Kind::sgroups;
    topo.group_size = group_size;
  } else {
    std::cerr << "sgsim: --topology must be mesh or sgroups\n";
    return 2;
  }
  try {
    mix.validate();
    std::vector<MixResult> rows;
    for (int n : nodes) {
      MixConfig cfg;
      cfg.nodes = n;
      cfg.mix = mix;
      cfg.topology = topo;
      cfg.ticks = ticks;
      cfg.seed = seed;
      rows.push_back(run_mix(cfg));
      const MixResult& r = rows.back();
      std::printf("n=%-4d %-10s throughput=%.6g med_latency p2p=%lld "
                  "global=%lld local=%lld\n",
                  r.nodes, r.topology.c_str(), r.throughput,
                  static_cast<long long>(r.median_latency_p2p),
                  static_cast<long long>(r.median_latency_global),
                  static_cast<long long>(r.median_latency_local));
    }
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::path csv = fs::path(out_dir) / "bench.csv";
    std::ofstream f(csv);
    write_mix_csv(f, rows);
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sgsim: " << e.what() << "\n";
    return 2;
  }
}

int cmd_census(const std::vector<int>& nodes, int group_size,
               const std::string& out_dir) {
  std::vector<CensusRow> rows;
  for (int n : nodes) {
    rows.push_back(census(n, {MixTopology::Kind::mesh, group_size}));
    rows.push_back(census(n, {MixTopology::Kind::sgroups, group_size}));
  }
  for (const auto& r : rows)
    std::printf("n=%-4d %-10s links=%zu (expected %zu)\n", r.nodes,
                r.topology.c_str(), r.links, r.expected);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::path csv = fs::path(out_dir) / "census.csv";
  std::ofstream f(csv);
  write_census_csv(f, rows);
  std::cout << "wrote " << csv.string() << "\n";
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.links == r.expected;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic simulator for group-partitioned actor systems"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  app.add_option("--out", out_dir, "output directory for CSV files");

  // run
  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string scenario_file;
  std::uint64_t run_seed = 0;
  Tick run_ticks = 0;
  std::vector<std::string> overrides;
  run->add_option("scenario", scenario_file, "scenario file")->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "override the seed");
  run->add_option("--ticks", run_ticks, "override the tick budget");
  run->add_option("--override", overrides,
                  "override a scenario key, e.g. mix.nodes=40");

  // mbt
  auto* mbt = app.add_subcommand("mbt", "lockstep model-based test suite");
  int mbt_cases = 1000;
  int mbt_nodes = 8;
  int mbt_commands = 30;
  std::uint64_t mbt_seed = 10'000;
  std::string replay;
  mbt->add_option("--cases", mbt_cases, "number of generated cases");
  mbt->add_option("--max-nodes", mbt_nodes, "roster size bound");
  mbt->add_option("--max-commands", mbt_commands, "commands per case bound");
  mbt->add_option("--seed", mbt_seed, "first case seed");
  mbt->add_option("--replay", replay, "replay a counterexample trace file");

  // bench
  auto* bench = app.add_subcommand("bench", "command-mix benchmark sweep");
  std::vector<int> bench_nodes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::string bench_mix = "0.9989,0.0001,0.0010";
  std::string bench_topology = "mesh";
  int bench_group = 10;
  Tick bench_ticks = 100'000;
  std::uint64_t bench_seed = 4242;
  bench->add_option("--nodes", bench_nodes, "node counts to sweep");
  bench->add_option("--mix", bench_mix, "p2p,global,local fractions");
  bench->add_option("--topology", bench_topology, "mesh or sgroups");
  bench->add_option("--group-size", bench_group, "sgroups block size");
  bench->add_option("--ticks", bench_ticks, "ticks per sweep point");
  bench->add_option("--seed", bench_seed, "world seed");

  // census
  auto* census_cmd = app.add_subcommand("census", "connection count report");
  std::vector<int> census_nodes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int census_group = 10;
  census_cmd->add_option("--nodes", census_nodes, "node counts");
  census_cmd->add_option("--group-size", census_group, "sgroups block size");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(scenario_file, run_seed, seed_opt->count() > 0, run_ticks,
                   overrides, out_dir);
  if (mbt->parsed())
    return cmd_mbt(mbt_cases, mbt_nodes, mbt_commands, mbt_seed, replay,
                   out_dir);
  if (bench->parsed())
    return cmd_bench(bench_nodes, bench_mix, bench_topology, bench_group,
                     bench_ticks, bench_seed, out_dir);
  if (census_cmd->parsed())
    return cmd_census(census_nodes, census_group, out_dir);
  return 2;
}
