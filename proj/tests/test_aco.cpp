#include <doctest.h>

#include <algorithm>

#include "sgsim/aco.hpp"
#include "sgsim/det_rng.hpp"
#include "sgsim/smtwtp.hpp"

using namespace sgsim;

namespace {

// Independent reference: full enumeration over all permutations, with the
// tardiness recomputed from scratch.
double brute_force_optimum(const SmtwtpInstance& inst) {
  std::vector<int> perm(inst.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  double best = -1;
  do {
    double completion = 0;
    double cost = 0;
    for (int j : perm) {
      const Job& job = inst.jobs[static_cast<std::size_t>(j)];
      completion += job.processing;
      double tardiness = completion - job.due;
      if (tardiness > 0) cost += job.weight * tardiness;
    }
    if (best < 0 || cost < best) best = cost;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

SmtwtpInstance five_jobs() {
  // Fixed instance used by the seed-pinned variant runs.
  SmtwtpInstance inst;
  inst.jobs = {{4, 3, 5}, {2, 8, 3}, {6, 1, 14}, {3, 5, 4}, {1, 9, 2}};
  return inst;
}

}  // namespace

TEST_CASE("a single early job has zero tardiness") {
  SmtwtpInstance inst;
  inst.jobs = {{1, 3, 5}};
  CHECK(evaluate_schedule(inst, {0}) == 0.0);
}

TEST_CASE("order matters: the two-job worked example") {
  SmtwtpInstance inst;
  inst.jobs = {{2, 1, 2}, {1, 10, 1}};  // A, B
  CHECK(evaluate_schedule(inst, {1, 0}) == 1.0);   // [B,A]
  CHECK(evaluate_schedule(inst, {0, 1}) == 20.0);  // [A,B]
}

TEST_CASE("zero weights mean zero cost for any order") {
  SmtwtpInstance inst;
  inst.jobs = {{3, 0, 0}, {5, 0, 1}, {2, 0, 0}};
  CHECK(evaluate_schedule(inst, {0, 1, 2}) == 0.0);
  CHECK(evaluate_schedule(inst, {2, 1, 0}) == 0.0);
}

TEST_CASE("evaluate_schedule matches exhaustive enumeration") {
  DetRng rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    int jobs = 2 + static_cast<int>(rng.below(6));  // up to 7 jobs here
    SmtwtpInstance inst = SmtwtpInstance::random(rng, jobs);
    // The brute force recomputes every permutation's cost independently;
    // spot-check evaluate_schedule against a few of them.
    std::vector<int> perm(inst.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    double best_eval = -1;
    do {
      double via_eval = evaluate_schedule(inst, perm);
      if (best_eval < 0 || via_eval < best_eval) best_eval = via_eval;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(best_eval == brute_force_optimum(inst));
  }
}

TEST_CASE("instance files parse and validate") {
  SmtwtpInstance inst = SmtwtpInstance::parse("4 3 5\n2 8 3\n# comment\n6 1 14\n");
  CHECK(inst.size() == 3);
  CHECK(inst.jobs[1].weight == 8);
  CHECK_THROWS_AS(SmtwtpInstance::parse("1 2\n"), ParseError);
  CHECK_THROWS_AS(SmtwtpInstance::parse("0 2 3\n"), SimError);  // p must be > 0
}

TEST_CASE("ant construction is deterministic and valid") {
  SmtwtpInstance inst = five_jobs();
  PheromoneConfig cfg;
  PheromoneMatrix tau(inst.size(), cfg);
  DetRng rng1(7);
  DetRng rng2(7);
  Schedule a = ant_construct(inst, tau, cfg, rng1);
  Schedule b = ant_construct(inst, tau, cfg, rng2);
  CHECK(a.perm == b.perm);
  CHECK(a.cost == b.cost);
  CHECK(a.valid_for(inst));
  CHECK(a.cost == evaluate_schedule(inst, a.perm));
}

TEST_CASE("pheromone updates stay inside the bounds") {
  SmtwtpInstance inst = five_jobs();
  PheromoneConfig cfg;
  PheromoneMatrix tau(inst.size(), cfg);
  DetRng rng(11);
  for (int i = 0; i < 200; ++i) {
    Schedule s = ant_construct(inst, tau, cfg, rng);
    tau.update(s, cfg);
    REQUIRE(tau.within_bounds(cfg));
  }
}

TEST_CASE("degenerate topology returns the single constructed schedule") {
  AcoTopology topo;
  topo.variant = AcoVariant::tl;
  topo.colonies = 1;
  topo.ants = 1;
  topo.ant_iters = 1;
  topo.global_iters = 1;
  SmtwtpInstance inst = five_jobs();
  AcoOutcome out = run_aco(inst, topo, {});
  CHECK(out.completed);
  CHECK(out.best.valid_for(inst));
  CHECK(out.round_bests.size() == 1);
  CHECK(out.best.cost == evaluate_schedule(inst, out.best.perm));
}

TEST_CASE("reported best cost never increases across rounds") {
  AcoTopology topo;
  topo.variant = AcoVariant::ml;
  topo.colonies = 6;
  topo.ants = 3;
  topo.ant_iters = 1;
  topo.global_iters = 8;
  topo.fanout = 2;
  DetRng rng(404);
  SmtwtpInstance inst = SmtwtpInstance::random(rng, 12);
  AcoOutcome out = run_aco(inst, topo, {21, 500'000, 0, 7, 0, 10});
  CHECK(out.completed);
  REQUIRE(out.round_bests.size() == 8);
  for (std::size_t i = 1; i < out.round_bests.size(); ++i)
    CHECK(out.round_bests[i] <= out.round_bests[i - 1]);
}

TEST_CASE("all four variants find the five-job optimum at a pinned seed") {
  SmtwtpInstance inst = five_jobs();
  double optimum = brute_force_optimum(inst);
  AcoTopology topo;
  topo.colonies = 4;
  topo.ants = 6;
  topo.ant_iters = 2;
  topo.global_iters = 6;
  topo.fanout = 2;
  for (AcoVariant v :
       {AcoVariant::tl, AcoVariant::ml, AcoVariant::gr, AcoVariant::sr}) {
    topo.variant = v;
    AcoOutcome out = run_aco(inst, topo, {2718, 500'000, 0, 7, 0, 10});
    CAPTURE(to_string(v));
    CHECK(out.completed);
    CHECK(out.best.cost == optimum);
  }
}

TEST_CASE("gr and sr agree on the result but not on the traffic") {
  DetRng rng(31);
  SmtwtpInstance inst = SmtwtpInstance::random(rng, 15);
  AcoTopology topo;
  topo.colonies = 8;
  topo.ants = 4;
  topo.ant_iters = 2;
  topo.global_iters = 5;
  topo.fanout = 4;
  AcoRunConfig cfg;
  cfg.seed = 99;
  topo.variant = AcoVariant::gr;
  AcoOutcome gr = run_aco(inst, topo, cfg);
  topo.variant = AcoVariant::sr;
  AcoOutcome sr = run_aco(inst, topo, cfg);
  CHECK(gr.completed);
  CHECK(sr.completed);
  CHECK(gr.best.cost == sr.best.cost);
  CHECK(gr.round_bests == sr.round_bests);
  CHECK(gr.total_sent != sr.total_sent);
  CHECK(sr.links < gr.links);  // partitioned vs full mesh
}

TEST_CASE("bad topologies are rejected") {
  AcoTopology topo;
  topo.colonies = 0;
  CHECK_THROWS_AS(topo.validate(), SimError);
  topo.colonies = 2;
  topo.fanout = 0;
  CHECK_THROWS_AS(topo.validate(), SimError);
}
