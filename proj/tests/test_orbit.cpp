#include <doctest.h>

#include "sgsim/credit.hpp"
#include "sgsim/det_rng.hpp"
#include "sgsim/orbit.hpp"

using namespace sgsim;

TEST_CASE("credit halving is exact") {
  auto [a, b] = credit_split(Credit{0});
  CHECK(a == Credit{1});
  CHECK(b == Credit{1});
  CreditPool pool;
  pool.add(a);
  pool.add(b);
  CHECK(pool.is_one());
}

TEST_CASE("three sequential spawns leave the master an eighth") {
  // Master starts with the unit credit and halves it per spawned worker.
  Credit master{0};
  std::vector<Credit> workers;
  for (int i = 0; i < 3; ++i) {
    auto [give, keep] = credit_split(master);
    workers.push_back(give);
    master = keep;
  }
  CHECK(workers[0] == Credit{1});  // 1/2
  CHECK(workers[1] == Credit{2});  // 1/4
  CHECK(workers[2] == Credit{3});  // 1/8
  CHECK(master == Credit{3});      // 1/8 kept

  CreditPool sum;
  sum.add(master);
  for (const auto& c : workers) sum.add(c);
  CHECK(sum.is_one());
}

TEST_CASE("splitting deep shares stays exact") {
  Credit deep{62};
  auto [a, b] = credit_split(deep);
  CHECK(a == Credit{63});
  CHECK(b == Credit{63});
  CreditPool pool;
  pool.add(a);
  pool.add(b);
  for (int i = 0; i < 1000; ++i) {
    // Keep halving one share and returning both halves.
    auto [x, y] = credit_split(Credit{63 + i});
    pool.sub(Credit{63 + i});
    pool.add(x);
    pool.add(y);
  }
  CHECK(pool.to_string() == "1/2^62");
}

TEST_CASE("ledger transfers preserve the unit total") {
  CreditLedger ledger;
  ledger.start();
  CHECK(ledger.conserved());
  ledger.held_to_flight(Credit{0});
  CHECK(ledger.conserved());
  ledger.flight_to_held(Credit{0});
  auto [a, b] = credit_split(Credit{0});
  ledger.held_to_flight(a);
  CHECK(ledger.conserved());
  ledger.flight_to_pool(a);
  ledger.held_to_flight(b);
  ledger.flight_to_pool(b);
  CHECK(ledger.conserved());
  CHECK(ledger.finished());
}

TEST_CASE("identity generator fixes its start vertex") {
  OrbitSpec spec;
  spec.space = 100;
  spec.x0 = 7;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 1, 0, {}});
  CHECK(orbit_oracle(spec) == std::set<std::uint64_t>{7});

  spec.workers = 3;
  OrbitOutcome out = run_orbit(spec);
  CHECK(out.completed);
  CHECK(out.vertices == std::set<std::uint64_t>{7});
}

TEST_CASE("doubling plus shift covers the whole space") {
  // X=9, generators {2x mod 10, x+3 mod 10}, x0=1: the closure is 0..9.
  OrbitSpec spec;
  spec.space = 9;
  spec.x0 = 1;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 2, 0, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 1, 3, {}});
  std::set<std::uint64_t> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(orbit_oracle(spec) == all);

  spec.workers = 4;
  spec.variant = OrbitSpec::Variant::d;
  CHECK(run_orbit(spec).vertices == all);
  spec.variant = OrbitSpec::Variant::sd;
  spec.group_size = 2;
  CHECK(run_orbit(spec).vertices == all);
}

TEST_CASE("table generators validate their range") {
  OrbitSpec spec;
  spec.space = 3;
  spec.x0 = 0;
  spec.generators.push_back(
      {OrbitGenerator::Kind::table, 0, 0, {1, 2, 3, 7}});  // 7 > space
  CHECK_THROWS_AS(spec.validate(), SimError);
  spec.generators[0].table = {1, 2, 3};  // wrong size
  CHECK_THROWS_AS(spec.validate(), SimError);
}

TEST_CASE("d and sd variants agree with the oracle on random specs") {
  DetRng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    OrbitSpec spec;
    spec.space = 50 + rng.below(2000);
    spec.x0 = rng.below(spec.space + 1);
    int gens = 1 + static_cast<int>(rng.below(4));
    for (int g = 0; g < gens; ++g)
      spec.generators.push_back({OrbitGenerator::Kind::affine,
                                 1 + rng.below(spec.space), rng.below(spec.space),
                                 {}});
    spec.workers = 1 + static_cast<int>(rng.below(6));
    auto expected = orbit_oracle(spec);

    spec.variant = OrbitSpec::Variant::d;
    OrbitOutcome d = run_orbit(spec, {rng.below(1000), 2'000'000, true});
    CHECK(d.completed);
    CHECK(d.vertices == expected);

    spec.variant = OrbitSpec::Variant::sd;
    spec.group_size = 1 + static_cast<int>(rng.below(3));
    OrbitOutcome sd = run_orbit(spec, {rng.below(1000), 2'000'000, true});
    CHECK(sd.completed);
    CHECK(sd.vertices == expected);
    CHECK(sd.result_hash == d.result_hash);
    CHECK(sd.cross_group_violations == 0);
  }
}

TEST_CASE("cross-group tasks travel two hops via the target submaster") {
  // Two groups of one worker each: every cross-group task must appear on
  // the worker->submaster' and submaster'->worker' links.
  OrbitSpec spec;
  spec.space = 199;
  spec.x0 = 3;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 3, 1, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 5, 7, {}});
  spec.workers = 2;
  spec.group_size = 1;
  spec.variant = OrbitSpec::Variant::sd;
  OrbitOutcome out = run_orbit(spec);
  CHECK(out.completed);
  CHECK(out.cross_group_violations == 0);
  // No direct worker-to-worker link may ever carry traffic.
  CHECK(out.metrics.link_packets("w1", "w2") == 0);
  // The gateway paths do.
  CHECK(out.metrics.link_packets("w1", "s2") +
            out.metrics.link_packets("s2", "w2") >
        0);
}

TEST_CASE("intra-worker batching changes nothing about the result") {
  OrbitSpec spec;
  spec.space = 999;
  spec.x0 = 5;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 7, 3, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 11, 1, {}});
  spec.workers = 3;
  auto expected = orbit_oracle(spec);
  spec.batch_size = 4;  // spawn child processes per vertex batch
  OrbitOutcome out = run_orbit(spec);
  CHECK(out.completed);
  CHECK(out.vertices == expected);
}

TEST_CASE("termination is exact: completion implies nothing in flight") {
  OrbitSpec spec;
  spec.space = 4999;
  spec.x0 = 17;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 13, 5, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 2, 1, {}});
  spec.workers = 5;
  OrbitOutcome out = run_orbit(spec);
  CHECK(out.completed);
  // The run stopped the moment the pool closed; the queue held no further
  // task messages, or the vertex set would have grown past the oracle's.
  CHECK(out.vertices == orbit_oracle(spec));
}

TEST_CASE("the d variant's traffic spans the worker mesh") {
  OrbitSpec spec;
  spec.space = 3999;
  spec.x0 = 2;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 3, 1, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 17, 9, {}});
  spec.workers = 5;
  OrbitOutcome out = run_orbit(spec);
  CHECK(out.completed);
  // Full-mesh routing: links used grow with the square of the worker
  // count (bounded by the complete graph over master + workers), unlike
  // the sd variant where only submaster links carry cross-group traffic.
  std::size_t used = out.metrics.used_links().size();
  CHECK(used >= static_cast<std::size_t>(spec.workers));
  CHECK(used <= static_cast<std::size_t>((spec.workers + 1) * spec.workers) / 2);
  // Every worker pair exchanged tasks for this dense orbit.
  for (int i = 1; i <= spec.workers; ++i)
    for (int j = i + 1; j <= spec.workers; ++j)
      CHECK(out.metrics.link_packets("w" + std::to_string(i),
                                     "w" + std::to_string(j)) > 0);
}

TEST_CASE("identical seeds give identical orbit runs") {
  OrbitSpec spec;
  spec.space = 2999;
  spec.x0 = 1;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 6, 2, {}});
  spec.workers = 4;
  OrbitOutcome a = run_orbit(spec, {42, 2'000'000, true});
  OrbitOutcome b = run_orbit(spec, {42, 2'000'000, true});
  CHECK(a.result_hash == b.result_hash);
  CHECK(a.total_sent == b.total_sent);
  CHECK(a.end_tick == b.end_tick);
}
