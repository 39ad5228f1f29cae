// Acceptance suite: every criterion prints one PASS/FAIL line; the binary
// exits non-zero if any criterion fails. Each run is seed-pinned and all
// thresholds are fixed here.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sgsim/aco.hpp"
#include "sgsim/bench.hpp"
#include "sgsim/det_rng.hpp"
#include "sgsim/mbt.hpp"
#include "sgsim/orbit.hpp"
#include "sgsim/scenario.hpp"
#include "sgsim/smtwtp.hpp"

using namespace sgsim;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (detail.empty()) detail = what;
  }
};

// ---------------------------------------------------------------------------
// 1. Lockstep model-based testing
// ---------------------------------------------------------------------------

Check criterion_lockstep() {
  Check c;
  const int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    std::uint64_t seed = 10'000 + static_cast<std::uint64_t>(i);
    LockstepOutcome out = run_lockstep(generate_case(seed));
    if (!out.pass) {
      c.fail("case seed " + std::to_string(seed) + " failed at command " +
             std::to_string(out.failed_index) + " (" + out.reason + ")");
      if (out.counterexample) {
        std::ofstream f("lockstep_counterexample.trace");
        f << out.counterexample->to_trace();
        c.fail("replay written to lockstep_counterexample.trace");
      }
      return c;
    }
  }

  // The seeded mutant must be caught: remove_nodes that raises on a
  // non-member instead of returning an error value.
  LockstepFaults faults;
  faults.remove_nodes_abort_on_nonmember = true;
  bool detected = false;
  for (std::uint64_t seed = 1; seed <= 500 && !detected; ++seed) {
    LockstepOutcome out = run_lockstep(generate_case(seed), faults);
    if (!out.pass && out.counterexample &&
        out.counterexample->commands.back().op == Op::remove_nodes)
      detected = true;
  }
  if (!detected) c.fail("the remove_nodes mutant went undetected");
  c.note(std::to_string(kCases) + " cases, mutant detected");
  return c;
}

// ---------------------------------------------------------------------------
// 2. Orbit correctness and credit conservation
// ---------------------------------------------------------------------------

Check criterion_orbit() {
  Check c;
  DetRng rng(777);
  const int kSpecs = 200;
  for (int i = 0; i < kSpecs; ++i) {
    OrbitSpec spec;
    spec.space = 10 + rng.below(9'991);  // X <= 10^4
    spec.x0 = rng.below(spec.space + 1);
    int gens = 1 + static_cast<int>(rng.below(5));  // <= 5 generators
    for (int g = 0; g < gens; ++g)
      spec.generators.push_back({OrbitGenerator::Kind::affine,
                                 1 + rng.below(spec.space),
                                 rng.below(spec.space),
                                 {}});
    spec.workers = 1 + static_cast<int>(rng.below(8));
    spec.group_size = 1 + static_cast<int>(rng.below(3));

    auto expected = orbit_oracle(spec);
    OrbitRunConfig cfg;
    cfg.seed = rng.below(100'000);
    cfg.check_conservation = true;  // asserts the exact ledger at every tick

    spec.variant = OrbitSpec::Variant::d;
    OrbitOutcome d;
    try {
      d = run_orbit(spec, cfg);
    } catch (const SimError& e) {
      c.fail("spec " + std::to_string(i) + " (d): " + e.what());
      return c;
    }
    spec.variant = OrbitSpec::Variant::sd;
    OrbitOutcome sd;
    try {
      sd = run_orbit(spec, cfg);
    } catch (const SimError& e) {
      c.fail("spec " + std::to_string(i) + " (sd): " + e.what());
      return c;
    }
    if (!d.completed || !sd.completed) {
      c.fail("spec " + std::to_string(i) + " did not terminate by credit");
      return c;
    }
    if (d.vertices != expected || sd.vertices != expected) {
      c.fail("spec " + std::to_string(i) + " diverged from the oracle");
      return c;
    }
    if (sd.cross_group_violations != 0) {
      c.fail("spec " + std::to_string(i) +
             ": inter-group traffic off the submaster links");
      return c;
    }
  }
  c.note(std::to_string(kSpecs) + " random specs, d == sd == oracle");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Connection census
// ---------------------------------------------------------------------------

Check criterion_census() {
  Check c;
  for (int n = 10; n <= 100; n += 10) {
    CensusRow mesh = census(n, {MixTopology::Kind::mesh, 10});
    std::size_t want = static_cast<std::size_t>(n) *
                       (static_cast<std::size_t>(n) - 1) / 2;
    if (mesh.links != want)
      c.fail("mesh n=" + std::to_string(n) + ": " +
             std::to_string(mesh.links) + " links, expected " +
             std::to_string(want));

    CensusRow part = census(n, {MixTopology::Kind::sgroups, 10});
    if (part.links != expected_sgroup_links(n, 10))
      c.fail("sgroups n=" + std::to_string(n) + ": " +
             std::to_string(part.links) + " links, formula says " +
             std::to_string(expected_sgroup_links(n, 10)));
    if (n >= 20 && part.links >= mesh.links)
      c.fail("sgroups n=" + std::to_string(n) + " not below the mesh");
  }
  c.note("mesh n(n-1)/2 exact, partitioned counts exact and smaller");
  return c;
}

// ---------------------------------------------------------------------------
// 4 & 5. Scalability and latency shapes over the same sweep
// ---------------------------------------------------------------------------

struct SweepData {
  std::vector<MixResult> pure_p2p;
  std::vector<MixResult> global_mesh;
  std::vector<MixResult> global_sgroups;
};

SweepData run_sweep() {
  SweepData data;
  const Tick kTicks = 100'000;
  const std::uint64_t kSeed = 4242;
  for (int n = 10; n <= 100; n += 10) {
    MixConfig cfg;
    cfg.nodes = n;
    cfg.ticks = kTicks;
    cfg.seed = kSeed;

    cfg.mix = {1.0, 0.0, 0.0, 16};
    cfg.topology = {MixTopology::Kind::mesh, 10};
    data.pure_p2p.push_back(run_mix(cfg));

    cfg.mix = {0.9989, 0.0001, 0.0010, 16};  // 0.01% global commands
    cfg.topology = {MixTopology::Kind::mesh, 10};
    data.global_mesh.push_back(run_mix(cfg));

    cfg.topology = {MixTopology::Kind::sgroups, 10};
    data.global_sgroups.push_back(run_mix(cfg));
  }
  return data;
}

Check criterion_scalability(const SweepData& data) {
  Check c;
  auto monotone = [&](const std::vector<MixResult>& rows, const char* what) {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].completed_total < rows[i - 1].completed_total)
        c.fail(std::string(what) + " throughput drops between n=" +
               std::to_string(rows[i - 1].nodes) + " and n=" +
               std::to_string(rows[i].nodes));
  };
  monotone(data.pure_p2p, "pure p2p");
  monotone(data.global_sgroups, "sgroups(10)");

  // The mesh with 0.01% global commands must peak at n in [40,70] and be
  // below its peak at n=100.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < data.global_mesh.size(); ++i)
    if (data.global_mesh[i].completed_total >
        data.global_mesh[peak].completed_total)
      peak = i;
  int peak_nodes = data.global_mesh[peak].nodes;
  if (peak_nodes < 40 || peak_nodes > 70)
    c.fail("mesh throughput peak at n=" + std::to_string(peak_nodes) +
           ", outside [40,70]");
  if (data.global_mesh.back().completed_total >=
      data.global_mesh[peak].completed_total)
    c.fail("mesh throughput at n=100 is not below its peak");
  c.note("peak at n=" + std::to_string(peak_nodes) +
         ", n=100 throughput " +
         std::to_string(data.global_mesh.back().completed_total) + " vs peak " +
         std::to_string(data.global_mesh[peak].completed_total));
  return c;
}

Check criterion_latency(const SweepData& data) {
  Check c;
  const MixResult& small = data.global_mesh.front();   // n=10
  const MixResult& large = data.global_mesh.back();    // n=100
  if (small.median_latency_global < 0 || large.median_latency_global < 0) {
    c.fail("missing global latency samples");
    return c;
  }
  double global_ratio = static_cast<double>(large.median_latency_global) /
                        static_cast<double>(std::max<Tick>(1, small.median_latency_global));
  if (global_ratio < 5.0)
    c.fail("global latency grew only " + std::to_string(global_ratio) + "x");

  auto stable = [&](Tick lo, Tick hi, const char* what) {
    double ratio = static_cast<double>(hi) /
                   static_cast<double>(std::max<Tick>(1, lo));
    if (hi > lo && ratio > 1.5)
      c.fail(std::string(what) + " latency grew " + std::to_string(ratio) +
             "x, above 1.5x");
  };
  stable(small.median_latency_p2p, large.median_latency_p2p, "p2p");
  stable(small.median_latency_local, large.median_latency_local, "local");
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "global median %lld -> %lld ticks, p2p %lld -> %lld, local "
                "%lld -> %lld",
                static_cast<long long>(small.median_latency_global),
                static_cast<long long>(large.median_latency_global),
                static_cast<long long>(small.median_latency_p2p),
                static_cast<long long>(large.median_latency_p2p),
                static_cast<long long>(small.median_latency_local),
                static_cast<long long>(large.median_latency_local));
  c.note(buf);
  return c;
}

// ---------------------------------------------------------------------------
// 6. ACO optimality at desk scale
// ---------------------------------------------------------------------------

double enumerate_optimum(const SmtwtpInstance& inst, Check& c) {
  // Independent oracle: full enumeration with tardiness recomputed here.
  std::vector<int> perm(inst.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::sort(perm.begin(), perm.end());
  double best = -1;
  do {
    double completion = 0, cost = 0;
    for (int j : perm) {
      const Job& job = inst.jobs[static_cast<std::size_t>(j)];
      completion += job.processing;
      if (completion > job.due) cost += job.weight * (completion - job.due);
    }
    if (evaluate_schedule(inst, perm) != cost) {
      c.fail("evaluate_schedule mismatch against the enumeration oracle");
      return -1;
    }
    if (best < 0 || cost < best) best = cost;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Check criterion_aco_optimality() {
  Check c;
  DetRng rng(31337);
  for (int i = 0; i < 20 && c.ok; ++i) {
    int jobs = 2 + static_cast<int>(rng.below(7));  // <= 8 jobs
    SmtwtpInstance inst = SmtwtpInstance::random(rng, jobs);
    enumerate_optimum(inst, c);
  }
  if (!c.ok) return c;

  // Seed-pinned runs of all four variants on the fixed five-job instance.
  SmtwtpInstance inst;
  inst.jobs = {{4, 3, 5}, {2, 8, 3}, {6, 1, 14}, {3, 5, 4}, {1, 9, 2}};
  double optimum = enumerate_optimum(inst, c);
  AcoTopology topo;
  topo.colonies = 4;
  topo.ants = 6;
  topo.ant_iters = 2;
  topo.global_iters = 6;
  topo.fanout = 2;
  AcoRunConfig cfg;
  cfg.seed = 2718;
  for (AcoVariant v :
       {AcoVariant::tl, AcoVariant::ml, AcoVariant::gr, AcoVariant::sr}) {
    topo.variant = v;
    AcoOutcome out = run_aco(inst, topo, cfg);
    if (!out.completed) {
      c.fail(to_string(v) + " did not complete");
    } else if (out.best.cost != optimum) {
      c.fail(to_string(v) + " returned " + std::to_string(out.best.cost) +
             ", optimum is " + std::to_string(optimum));
    } else if (!out.best.valid_for(inst)) {
      c.fail(to_string(v) + " returned an invalid permutation");
    }
  }
  c.note("20 instances enumerated; all variants hit the optimum " +
         std::to_string(optimum));
  return c;
}

// ---------------------------------------------------------------------------
// 7. ACO reliability under chaos
// ---------------------------------------------------------------------------

Check criterion_aco_reliability() {
  Check c;
  DetRng rng(606);
  SmtwtpInstance inst = SmtwtpInstance::random(rng, 20);
  AcoTopology topo;
  topo.colonies = 16;
  topo.ants = 4;
  topo.ant_iters = 2;
  topo.global_iters = 20;
  topo.fanout = 4;
  topo.ant_compute = 60;

  AcoRunConfig cfg;
  cfg.seed = 905;
  cfg.max_ticks = 60'000;
  cfg.chaos_period = 1'000;  // one kill per node per 1000 ticks
  cfg.chaos_seed = 11;

  for (AcoVariant v : {AcoVariant::gr, AcoVariant::sr}) {
    topo.variant = v;
    AcoOutcome out = run_aco(inst, topo, cfg);
    if (!out.completed)
      c.fail(to_string(v) + " did not run to completion under chaos");
    else if (!out.best.valid_for(inst))
      c.fail(to_string(v) + " returned an invalid schedule");
    if (!out.names_resolve)
      c.fail(to_string(v) + " left a registered name unresolvable");
    if (out.chaos_kills == 0)
      c.fail(to_string(v) + " saw no kills; chaos was ineffective");
    if (out.restarts == 0)
      c.fail(to_string(v) + " never restarted anything under chaos");
  }

  topo.variant = AcoVariant::ml;
  AcoOutcome ml = run_aco(inst, topo, cfg);
  if (ml.completed)
    c.fail("ml completed despite chaos; expected an indefinite stall");
  if (ml.end_tick < cfg.max_ticks)
    c.fail("ml stopped before exhausting the tick budget");
  c.note("gr and sr recover, ml exceeds its tick budget");
  return c;
}

// ---------------------------------------------------------------------------
// 8. ACO traffic ordering
// ---------------------------------------------------------------------------

Check criterion_aco_traffic() {
  Check c;
  DetRng rng(909);
  SmtwtpInstance inst = SmtwtpInstance::random(rng, 20);
  AcoTopology topo;
  topo.colonies = 16;  // one colony per simulated node
  topo.ants = 4;
  topo.ant_iters = 2;
  topo.global_iters = 8;
  topo.fanout = 4;
  topo.ant_compute = 50;

  AcoRunConfig cfg;
  cfg.seed = 1234;
  cfg.heartbeat_period = 100;  // connection maintenance traffic on

  std::map<AcoVariant, std::uint64_t> sent;
  for (AcoVariant v : {AcoVariant::ml, AcoVariant::gr, AcoVariant::sr}) {
    topo.variant = v;
    AcoOutcome out = run_aco(inst, topo, cfg);
    if (!out.completed) c.fail(to_string(v) + " did not complete");
    sent[v] = out.total_link_packets;
  }
  if (!(sent[AcoVariant::sr] < sent[AcoVariant::ml]))
    c.fail("sent(sr) is not below sent(ml)");
  if (!(sent[AcoVariant::ml] < sent[AcoVariant::gr]))
    c.fail("sent(ml) is not below sent(gr)");
  c.note("packets: sr " + std::to_string(sent[AcoVariant::sr]) + " < ml " +
         std::to_string(sent[AcoVariant::ml]) + " < gr " +
         std::to_string(sent[AcoVariant::gr]));
  return c;
}

// ---------------------------------------------------------------------------
// 9. Determinism of every CSV-producing run
// ---------------------------------------------------------------------------

bool same_dir_outputs(const std::filesystem::path& a,
                      const std::filesystem::path& b, Check& c) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    c.fail("no outputs under " + a.string());
    return false;
  }
  for (const auto& f : files) {
    std::ifstream f1(f, std::ios::binary);
    std::ifstream f2(b / f.filename(), std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    if (s1.str() != s2.str() || s1.str().empty()) {
      c.fail("outputs differ for " + f.filename().string());
      return false;
    }
  }
  return true;
}

Check criterion_determinism() {
  Check c;
  namespace fs = std::filesystem;
  const char* kScenarios[] = {
      "name det_orbit\nseed 5\nticks 100000\n"
      "[orbit]\nvariant sd\nspace 2000\nx0 1\nworkers 4\ngroup_size 2\n"
      "generator affine 2 1\ngenerator affine 7 3\n",

      "name det_aco\nseed 6\nticks 100000\n"
      "[aco]\nvariant sr\ncolonies 8\nants 3\nant_iters 1\nglobal_iters 4\n"
      "fanout 4\nrandom_jobs 10\n",

      "name det_mix\nseed 7\nticks 20000\n"
      "[mix]\nnodes 20\np2p 0.997\nglobal 0.001\nlocal 0.002\n"
      "topology mesh\n",
  };
  int idx = 0;
  for (const char* text : kScenarios) {
    ScenarioSpec spec = ScenarioSpec::parse(text);
    fs::path base = fs::temp_directory_path() /
                    ("sgsim_det_" + std::to_string(idx++));
    fs::remove_all(base.string() + "_a");
    fs::remove_all(base.string() + "_b");
    ScenarioResult r1 = run_scenario(spec, base.string() + "_a");
    ScenarioResult r2 = run_scenario(spec, base.string() + "_b");
    if (r1.exit_code != 0 || r2.exit_code != 0) {
      c.fail(spec.name + " exited non-zero");
      continue;
    }
    same_dir_outputs(base.string() + "_a", base.string() + "_b", c);
  }
  c.note("orbit, aco and mix reruns byte-identical");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    double budget_seconds;  // 0 = no limit
    std::function<Check()> run;
  };

  SweepData sweep;  // shared by criteria 4 and 5
  bool sweep_done = false;
  auto ensure_sweep = [&] {
    if (!sweep_done) {
      sweep = run_sweep();
      sweep_done = true;
    }
  };

  std::vector<Entry> entries = {
      {1, "lockstep equivalence over 1000 generated cases + seeded mutant",
       120.0, criterion_lockstep},
      {2, "orbit: d == sd == oracle on 200 specs with exact credit ledger",
       300.0, criterion_orbit},
      {3, "connection census: mesh quadratic, partitioned counts exact", 0,
       criterion_census},
      {4, "throughput shapes: p2p and sgroups monotone, mesh peak in [40,70]",
       600.0, [&] { ensure_sweep(); return criterion_scalability(sweep); }},
      {5, "latency shapes: global >= 5x, p2p/local <= 1.5x", 0,
       [&] { ensure_sweep(); return criterion_latency(sweep); }},
      {6, "aco optimality against exhaustive enumeration", 0,
       criterion_aco_optimality},
      {7, "aco reliability: gr/sr recover under chaos, ml stalls", 0,
       criterion_aco_reliability},
      {8, "aco traffic ordering: sr < ml < gr", 0, criterion_aco_traffic},
      {9, "determinism: byte-identical outputs on reruns", 0,
       criterion_determinism},
  };

  int failures = 0;
  for (const auto& e : entries) {
    auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = e.run();
    } catch (const std::exception& ex) {
      result.ok = false;
      result.detail = std::string("exception: ") + ex.what();
    }
    auto secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    if (e.budget_seconds > 0 && secs > e.budget_seconds)
      result.fail("over its runtime budget of " +
                  std::to_string(e.budget_seconds) + "s");
    std::printf("%s criterion %d: %s (%.1fs)%s%s\n",
                result.ok ? "PASS" : "FAIL", e.id, e.title, secs,
                result.detail.empty() ? "" : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
