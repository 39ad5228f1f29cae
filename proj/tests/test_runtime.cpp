#include <doctest.h>

#include <memory>

#include "sgsim/runtime.hpp"

using namespace sgsim;

namespace {

BootSpec nodes(int normals, int hidden = 0,
               BootSpec::Connect policy = BootSpec::Connect::mesh) {
  BootSpec boot;
  boot.connect = policy;
  for (int i = 0; i < normals; ++i)
    boot.nodes.push_back({"n" + std::to_string(i + 1), NodeType::normal, {}, {}});
  for (int i = 0; i < hidden; ++i)
    boot.nodes.push_back({"h" + std::to_string(i + 1), NodeType::hidden, {}, {}});
  return boot;
}

struct Recorder : Behaviour {
  std::vector<std::string> log;
  void on_message(ProcessContext&, const Message& msg) override {
    if (const auto* s = std::any_cast<std::string>(&msg.body))
      log.push_back(*s);
  }
};

ProcessSpec recorder_spec() {
  return {"recorder", [] { return std::make_unique<Recorder>(); }};
}

const Recorder& recorder_of(const SimWorld& w, const Pid& pid) {
  return *dynamic_cast<const Recorder*>(w.find_process(pid)->behaviour.get());
}

}  // namespace

TEST_CASE("mesh boot of five free normal nodes yields a full mesh") {
  SimWorld w(nodes(5));
  CHECK(w.link_count() == 10);  // 5*4/2
}

TEST_CASE("hidden nodes get only their direct seed link") {
  SimWorld w(nodes(2, 1));
  // n1-n2 meshed, h1 connected to the seed n1 only.
  CHECK(w.link_count() == 2);
  CHECK(w.connected("n1", "n2"));
  CHECK(w.connected("n1", "h1"));
  CHECK(!w.connected("n2", "h1"));
}

TEST_CASE("empty boot is rejected") {
  BootSpec empty;
  CHECK_THROWS_AS(SimWorld{empty}, SimError);
}

TEST_CASE("connecting two free meshed components merges them into one mesh") {
  auto boot = nodes(6, 0, BootSpec::Connect::isolated);
  SimWorld w(boot);
  // Two disjoint 3-node meshes.
  w.connect("n1", "n2");
  w.connect("n1", "n3");
  w.connect("n4", "n5");
  w.connect("n4", "n6");
  CHECK(w.link_count() == 6);  // two triangles via transitive sharing
  w.connect("n3", "n4");
  CHECK(w.link_count() == 15);  // 6-node full mesh
}

TEST_CASE("connect is a no-op on equal endpoints") {
  SimWorld w(nodes(2, 0, BootSpec::Connect::isolated));
  w.connect("n1", "n1");
  CHECK(w.link_count() == 0);
}

TEST_CASE("messages deliver in order with the configured latency") {
  WorldConfig cfg;
  cfg.latency.base_net = 3;
  SimWorld w(nodes(2), cfg);
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  w.run_until(1);
  w.post(a, b, std::string("first"));
  w.post(a, b, std::string("second"));
  w.post(b, b, std::string("local"));
  RunResult rr = w.run_until(100);
  CHECK(rr.stop == RunResult::Stop::quiescent);
  const auto& log = recorder_of(w, b).log;
  REQUIRE(log.size() == 3);
  // base_local=0: the local message lands before the remote ones; remote
  // order is the send order.
  CHECK(log[0] == "local");
  CHECK(log[1] == "first");
  CHECK(log[2] == "second");
}

TEST_CASE("send to an exited pid is refused and nothing is delivered") {
  SimWorld w(nodes(2));
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  w.run_until(1);
  w.kill(b, ExitReason::killed);
  CHECK(!w.post(a, b, std::string("x")));
  std::uint64_t sent = w.metrics().total_sent();
  w.run_until(50);
  CHECK(w.metrics().total_sent() == sent);
}

TEST_CASE("sending to an unconnected node connects it first") {
  SimWorld w(nodes(4, 0, BootSpec::Connect::isolated));
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  w.run_until(1);
  CHECK(!w.connected("n1", "n2"));
  w.post(a, b, std::string("x"));
  CHECK(w.connected("n1", "n2"));
}

TEST_CASE("link counter conservation: sent = delivered + dropped") {
  WorldConfig cfg;
  cfg.latency.base_net = 5;
  SimWorld w(nodes(3), cfg);
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  Pid c = w.spawn("n3", recorder_spec());
  w.run_until(1);
  for (int i = 0; i < 10; ++i) {
    w.post(a, b, std::string("m"));
    w.post(b, c, std::string("m"));
  }
  // Kill c while messages are still in flight: they drop on delivery.
  w.kill(c, ExitReason::killed);
  w.run_until(1000);
  const auto& m = w.metrics();
  CHECK(m.total_sent() == 20);
  CHECK(m.total_sent() == m.total_delivered() + m.total_dropped());
  CHECK(m.total_dropped() >= 10);
}

TEST_CASE("global registration costs one sync message per connected node") {
  SimWorld w(nodes(60));
  Pid p = w.spawn("n1", recorder_spec());
  w.run_until(1);
  std::uint64_t before = w.metrics().total_sent();
  CHECK(w.register_global("srv", p));
  CHECK(w.metrics().total_sent() - before == 59);
  CHECK(w.metrics().node("n1").global_ops == 1);

  // Lookups are local: no messages.
  before = w.metrics().total_sent();
  CHECK(w.lookup_global("srv", "n5") == p);
  CHECK(w.metrics().total_sent() == before);
  CHECK(w.metrics().node("n5").local_ops == 1);

  // Duplicate name refused.
  Pid q = w.spawn("n2", recorder_spec());
  w.run_until(2);
  CHECK(!w.register_global("srv", q));
}

namespace {

struct CrashOnPing : Behaviour {
  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (std::any_cast<std::string>(&msg.body) != nullptr)
      ctx.world().kill(ctx.self(), ExitReason::killed);
  }
};

}  // namespace

TEST_CASE("supervision restarts a registered child under the same name") {
  WorldConfig cfg;
  cfg.restart_delay = 4;
  SimWorld w(nodes(3), cfg);
  Pid sup = w.spawn("n1", recorder_spec());
  Pid child = w.spawn("n2", ProcessSpec{"worker", [] {
                        return std::make_unique<CrashOnPing>();
                      }});
  w.run_until(1);
  w.supervise(sup, child, /*restart=*/true);
  CHECK(w.register_global("srv", child));

  w.kill(child, ExitReason::killed);
  CHECK(!w.alive(child));
  CHECK(!w.whereis_global("srv"));  // dead name cleaned up

  w.run_until(w.now() + cfg.restart_delay + 2);
  auto reborn = w.whereis_global("srv");
  REQUIRE(reborn.has_value());
  CHECK(!(child == *reborn));
  CHECK(w.alive(*reborn));
}

TEST_CASE("an unsupervised kill is a permanent loss") {
  SimWorld w(nodes(2));
  Pid p = w.spawn("n1", recorder_spec());
  w.run_until(1);
  w.kill(p, ExitReason::killed);
  w.run_until(100);
  CHECK(!w.alive(p));
}

TEST_CASE("supervisor loss: orphan leaves children unsupervised") {
  WorldConfig cfg;
  cfg.on_supervisor_loss = WorldConfig::OrphanPolicy::orphan;
  SimWorld w(nodes(3), cfg);
  Pid sup = w.spawn("n1", recorder_spec());
  Pid child = w.spawn("n2", recorder_spec());
  w.run_until(1);
  w.supervise(sup, child, true);
  w.kill(sup, ExitReason::killed);
  w.kill(child, ExitReason::killed);
  w.run_until(100);
  CHECK(!w.alive(child));  // no replacement: the slot died with the parent
}

TEST_CASE("supervisor loss: escalate re-parents children upward") {
  WorldConfig cfg;
  cfg.on_supervisor_loss = WorldConfig::OrphanPolicy::escalate;
  cfg.restart_delay = 2;
  SimWorld w(nodes(3), cfg);
  Pid root = w.spawn("n1", recorder_spec());
  Pid mid = w.spawn("n2", recorder_spec());
  Pid child = w.spawn("n3", ProcessSpec{"leaf", [] {
                        return std::make_unique<Recorder>();
                      }});
  w.run_until(1);
  w.supervise(root, mid, false);
  w.supervise(mid, child, true);
  w.kill(mid, ExitReason::killed);
  // The child is now supervised by root; a crash still produces a
  // replacement.
  w.kill(child, ExitReason::killed);
  w.run_until(100);
  bool replacement_alive = false;
  for (const auto* p : w.processes_on("n3"))
    if (p->tag == "leaf" && !p->exited) replacement_alive = true;
  CHECK(replacement_alive);
}

TEST_CASE("linked processes die together, except on normal exit") {
  SimWorld w(nodes(2));
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  Pid c = w.spawn("n2", recorder_spec());
  w.run_until(1);
  w.link(a, b);
  w.link(b, c);
  w.kill(a, ExitReason::killed);
  CHECK(!w.alive(b));  // cascades through the chain
  CHECK(!w.alive(c));

  Pid d = w.spawn("n1", recorder_spec());
  Pid e = w.spawn("n2", recorder_spec());
  w.run_until(w.now() + 2);
  w.link(d, e);
  w.kill(d, ExitReason::normal);
  CHECK(w.alive(e));
}

TEST_CASE("identical seed and scenario give identical traces and metrics") {
  auto run = [] {
    WorldConfig cfg;
    cfg.seed = 17;
    SimWorld w(nodes(4), cfg);
    std::vector<Pid> pids;
    for (int i = 0; i < 4; ++i)
      pids.push_back(w.spawn("n" + std::to_string(i + 1), recorder_spec()));
    w.run_until(1);
    for (int round = 0; round < 20; ++round) {
      auto from = pids[w.rng().below(pids.size())];
      auto to = pids[w.rng().below(pids.size())];
      w.post(from, to, std::string("m" + std::to_string(round)));
    }
    w.run_until(500);
    return std::pair{w.event_trace_hash(), w.metrics().total_delivered()};
  };
  auto [hash1, delivered1] = run();
  auto [hash2, delivered2] = run();
  CHECK(hash1 == hash2);
  CHECK(delivered1 == delivered2);
}

TEST_CASE("free normal connection sets stay transitively closed") {
  DetRng rng(99);
  SimWorld w(nodes(8, 0, BootSpec::Connect::isolated));
  auto ids = w.node_ids();
  for (int i = 0; i < 40; ++i) {
    const auto& a = ids[rng.below(ids.size())];
    const auto& b = ids[rng.below(ids.size())];
    w.connect(a, b);
    // Closure: any two nodes reachable from each other must be directly
    // connected.
    for (const auto& x : ids)
      for (const auto& y : ids) {
        if (x == y) continue;
        bool direct = w.connected(x, y);
        bool via = false;
        for (const auto& z : ids)
          if (z != x && z != y && w.connected(x, z) && w.connected(z, y))
            via = true;
        if (via) CHECK(direct);
      }
  }
}

TEST_CASE("timers fire in order with deterministic tie-breaking") {
  SimWorld w(nodes(1));
  struct TimerBeh : Behaviour {
    std::vector<std::uint64_t> fired;
    void on_timer(ProcessContext&, std::uint64_t tag) override {
      fired.push_back(tag);
    }
  };
  Pid p = w.spawn("n1", ProcessSpec{"t", [] {
                    return std::make_unique<TimerBeh>();
                  }});
  w.run_until(1);
  w.start_timer(p, 5, 1);
  w.start_timer(p, 3, 2);
  w.start_timer(p, 5, 3);
  w.run_until(100);
  const auto* beh =
      dynamic_cast<const TimerBeh*>(w.find_process(p)->behaviour.get());
  REQUIRE(beh->fired.size() == 3);
  CHECK(beh->fired == std::vector<std::uint64_t>{2, 1, 3});
}

TEST_CASE("per-pair order survives name-service congestion") {
  struct SyncRecorder : Behaviour {
    std::vector<int> seen;
    void on_message(ProcessContext&, const Message& msg) override {
      if (const auto* v = std::any_cast<int>(&msg.body)) seen.push_back(*v);
    }
  };
  WorldConfig cfg;
  cfg.name_service_cost = 7;
  SimWorld w(nodes(2), cfg);
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", ProcessSpec{"sync", [] {
                    return std::make_unique<SyncRecorder>();
                  }});
  w.run_until(1);
  // A burst of serialised messages: they queue at n2's name service but
  // must still arrive in send order.
  for (int i = 0; i < 12; ++i) w.post(a, b, i, /*name_service=*/true);
  w.run_until(1000);
  const auto* beh =
      dynamic_cast<const SyncRecorder*>(w.find_process(b)->behaviour.get());
  REQUIRE(beh->seen.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(beh->seen[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("the node-local name table never leaves the node") {
  SimWorld w(nodes(2));
  Pid p = w.spawn("n1", recorder_spec());
  w.run_until(1);
  CHECK(w.register_local("pong", p));
  CHECK(!w.register_local("pong", p));  // already present
  CHECK(w.whereis_local("n1", "pong") == p);
  CHECK(!w.whereis_local("n2", "pong").has_value());

  // A process on another node cannot enter this table.
  Pid q = w.spawn("n2", recorder_spec());
  w.run_until(w.now() + 1);
  CHECK(w.register_local("other", q));
  CHECK(w.whereis_local("n2", "other") == q);

  // Death clears the entry.
  w.kill(p, ExitReason::killed);
  CHECK(!w.whereis_local("n1", "pong").has_value());
}

TEST_CASE("placement distances feed the latency model") {
  WorldConfig cfg;
  cfg.latency.base_net = 1;
  cfg.latency.distance = [](const NodeId& a, const NodeId& b) -> Tick {
    return (a == "n1" && b == "n2") || (a == "n2" && b == "n1") ? 7 : 0;
  };
  SimWorld w(nodes(3), cfg);
  Pid a = w.spawn("n1", recorder_spec());
  Pid b = w.spawn("n2", recorder_spec());
  Pid c = w.spawn("n3", recorder_spec());
  w.run_until(1);
  Tick start = w.now();
  w.post(a, b, std::string("far"));
  w.post(a, c, std::string("near"));
  w.run_until(start + 3);
  CHECK(recorder_of(w, c).log.size() == 1);  // base_net only
  CHECK(recorder_of(w, b).log.empty());      // still in flight
  w.run_until(start + 10);
  CHECK(recorder_of(w, b).log.size() == 1);  // base_net + 7
}

TEST_CASE("heartbeats charge link maintenance packets") {
  WorldConfig cfg;
  cfg.heartbeat_period = 10;
  SimWorld w(nodes(3), cfg);  // 3 links
  w.run_until(100);
  // 10 sweeps x 3 links x 2 packets.
  CHECK(w.metrics().total_link_packets() == 60);
  CHECK(w.metrics().total_sent() == 0);  // maintenance is not payload
}
