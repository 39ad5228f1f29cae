// Microbenchmarks for the hot paths: the semantics transition function,
// event loop message throughput, credit arithmetic, ant construction, and
// node choice.

#include <benchmark/benchmark.h>

#include <memory>

#include "sgsim/abstract_semantics.hpp"
#include "sgsim/credit.hpp"
#include "sgsim/det_rng.hpp"
#include "sgsim/orbit.hpp"
#include "sgsim/placement.hpp"
#include "sgsim/runtime.hpp"
#include "sgsim/smtwtp.hpp"

namespace {

using namespace sgsim;

void BM_AbstractRegister(benchmark::State& state) {
  std::vector<AbstractState::RosterEntry> roster;
  for (int i = 0; i < 8; ++i)
    roster.push_back({"n" + std::to_string(i + 1), NodeType::normal});
  AbstractState st = AbstractState::boot(roster);
  Command create;
  create.op = Op::new_s_group;
  create.group = "g1";
  create.nodes = {"n1", "n2", "n3", "n4"};
  create.at = "n1";
  apply_inplace(st, create);

  std::uint64_t serial = 0;
  for (auto _ : state) {
    Command reg;
    reg.op = Op::register_name;
    reg.group = "g1";
    reg.pname = "x" + std::to_string(serial % 64);
    reg.pid = Pid{"n2", ++serial};
    reg.at = "n1";
    Transition t = apply(st, reg);
    benchmark::DoNotOptimize(t.value);
  }
}
BENCHMARK(BM_AbstractRegister);

struct PingPong : Behaviour {
  int remaining = 0;
  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (remaining-- > 0) ctx.send(msg.from, 0);
  }
};

void BM_EventLoopPingPong(benchmark::State& state) {
  for (auto _ : state) {
    BootSpec boot;
    boot.nodes.push_back({"n1", NodeType::normal, {}, {}});
    boot.nodes.push_back({"n2", NodeType::normal, {}, {}});
    SimWorld w(boot);
    auto spec = ProcessSpec{"pp", [] {
      auto b = std::make_unique<PingPong>();
      b->remaining = 10'000;
      return b;
    }};
    Pid a = w.spawn("n1", spec);
    Pid b = w.spawn("n2", spec);
    w.run_until(1);
    w.post(a, b, 0);
    w.run_until(1'000'000);
    benchmark::DoNotOptimize(w.metrics().total_delivered());
  }
}
BENCHMARK(BM_EventLoopPingPong)->Unit(benchmark::kMillisecond);

void BM_CreditPool(benchmark::State& state) {
  for (auto _ : state) {
    CreditPool pool;
    for (int e = 1; e <= 512; ++e) pool.add(Credit{e});
    pool.add(Credit{512});
    benchmark::DoNotOptimize(pool.is_one());
  }
}
BENCHMARK(BM_CreditPool);

void BM_AntConstruct(benchmark::State& state) {
  DetRng seed_rng(5);
  SmtwtpInstance inst =
      SmtwtpInstance::random(seed_rng, static_cast<int>(state.range(0)));
  PheromoneConfig cfg;
  PheromoneMatrix tau(inst.size(), cfg);
  DetRng rng(17);
  for (auto _ : state) {
    Schedule s = ant_construct(inst, tau, cfg, rng);
    benchmark::DoNotOptimize(s.cost);
  }
}
BENCHMARK(BM_AntConstruct)->Arg(20)->Arg(50);

void BM_OrbitSmall(benchmark::State& state) {
  OrbitSpec spec;
  spec.space = 2'000;
  spec.x0 = 1;
  spec.generators.push_back({OrbitGenerator::Kind::affine, 2, 1, {}});
  spec.generators.push_back({OrbitGenerator::Kind::affine, 7, 3, {}});
  spec.workers = 4;
  for (auto _ : state) {
    OrbitOutcome out = run_orbit(spec, {1, 1'000'000, false});
    benchmark::DoNotOptimize(out.result_hash);
  }
}
BENCHMARK(BM_OrbitSmall)->Unit(benchmark::kMillisecond);

void BM_ChooseNode(benchmark::State& state) {
  std::string text = "cluster c\n";
  for (int h = 0; h < 10; ++h) {
    text += "host h" + std::to_string(h) + "\n";
    for (int n = 0; n < 10; ++n)
      text += "node x" + std::to_string(h * 10 + n) +
              " ram_gb=" + std::to_string(16 + n) + "\n";
  }
  NetworkDescription nd = NetworkDescription::parse(text);
  PlacementQuery q;
  q.require.push_back({"ram_gb", Predicate::Kind::ge, 18, ""});
  q.prefer.push_back({"ram_gb", 1.0});
  q.near = "x5";
  for (auto _ : state) {
    auto chosen = choose_node(nullptr, nd.attrs, nd.distances, q);
    benchmark::DoNotOptimize(chosen);
  }
}
BENCHMARK(BM_ChooseNode);

}  // namespace

BENCHMARK_MAIN();
