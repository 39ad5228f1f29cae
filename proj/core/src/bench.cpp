#include "sgsim/bench.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "sgsim/det_rng.hpp"
#include "sgsim/placement.hpp"
#include "sgsim/sgroup_layer.hpp"

namespace sgsim {

void CommandMix::validate() const {
  auto frac = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!frac(p2p) || !frac(global) || !frac(local))
    throw SimError("bad mix: fractions must lie in [0,1]");
  if (std::abs(p2p + global + local - 1.0) > 1e-9)
    throw SimError("bad mix: fractions must sum to 1");
  if (payload_size < 0) throw SimError("bad mix: negative payload size");
}

namespace {

NodeId bench_node(int i) { return "n" + std::to_string(i + 1); }

struct Ping {
  std::uint64_t cmd = 0;
  std::string payload;
};
struct Pong {
  std::uint64_t cmd = 0;
};
struct GSync {
  std::uint64_t op = 0;
};
struct GAck {
  std::uint64_t op = 0;
};

struct BenchShared {
  CommandMix mix;
  MixTopology topology;
  int nodes = 0;
  std::uint64_t seed = 0;
  std::vector<Pid> agents;   // per node index
  std::vector<Pid> drivers;  // per node index
  std::vector<NodeSet> group_members;  // per node index (sgroups)
  std::vector<std::string> lock_key;   // per node index
  std::uint64_t completed[3] = {0, 0, 0};  // p2p, global, local
};

// Answers pings and acknowledges namespace synchronisation messages.
class AgentProcess : public Behaviour {
 public:
  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* ping = std::any_cast<Ping>(&msg.body)) {
      ctx.send(msg.from, Pong{ping->cmd});
    } else if (const auto* sync = std::any_cast<GSync>(&msg.body)) {
      ctx.send_sync(msg.from, GAck{sync->op});
    }
  }
};

// One peer: issues commands from the mix back to back, one per wake-up.
class DriverProcess : public Behaviour {
 public:
  DriverProcess(std::shared_ptr<BenchShared> shared, int index)
      : shared_(std::move(shared)),
        index_(index),
        rng_(hash_combine(shared_->seed,
                          hash_combine(0xbe9c, static_cast<std::uint64_t>(index)))),
        payload_(static_cast<std::size_t>(shared_->mix.payload_size), 'x') {}

  void on_start(ProcessContext& ctx) override { ctx.start_timer(1, 0); }

  void on_timer(ProcessContext& ctx, std::uint64_t) override { issue(ctx); }

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* pong = std::any_cast<Pong>(&msg.body)) {
      if (pong->cmd != cmd_id_) return;
      complete(ctx, OpClass::p2p, 0);
    } else if (const auto* ack = std::any_cast<GAck>(&msg.body)) {
      if (ack->op != cmd_id_ || acks_missing_ == 0) return;
      if (--acks_missing_ == 0) finish_global(ctx);
    } else if (std::any_cast<LockGranted>(&msg.body) != nullptr) {
      start_sync_round(ctx);
    }
  }

 private:
  void issue(ProcessContext& ctx) {
    issue_tick_ = ctx.now();
    ++cmd_id_;
    double roll = rng_.uniform();
    if (roll < shared_->mix.global) {
      // Registration and deregistration alternate so the table stays small.
      if (ctx.lock_acquire(shared_->lock_key[static_cast<std::size_t>(index_)]))
        start_sync_round(ctx);
      // else: wait for LockGranted
    } else if (roll < shared_->mix.global + shared_->mix.local) {
      ctx.world().lookup_global("bench_" + std::to_string(index_ + 1),
                                ctx.node());
      complete(ctx, OpClass::local, 1);
    } else {
      int target = pick_target();
      ctx.send(shared_->agents[static_cast<std::size_t>(target)],
               Ping{cmd_id_, payload_});
    }
  }

  int pick_target() {
    auto t = static_cast<int>(rng_.below(
        static_cast<std::uint64_t>(shared_->nodes - 1)));
    return t >= index_ ? t + 1 : t;
  }

  // The synchronisation round behind a global command: one sync message to
  // every peer, one ack back, all serialised by the name services.
  void start_sync_round(ProcessContext& ctx) {
    const NodeSet& peers =
        shared_->group_members[static_cast<std::size_t>(index_)];
    acks_missing_ = 0;
    for (const auto& peer : peers) {
      if (peer == ctx.node()) continue;
      int pi = std::stoi(peer.substr(1)) - 1;
      ctx.send_sync(shared_->agents[static_cast<std::size_t>(pi)],
                    GSync{cmd_id_});
      ++acks_missing_;
    }
    if (acks_missing_ == 0) finish_global(ctx);
  }

  void finish_global(ProcessContext& ctx) {
    const Name name = "bench_" + std::to_string(index_ + 1);
    if (registered_) {
      ctx.world().apply_global_entry(name, std::nullopt);
    } else {
      ctx.world().apply_global_entry(name, ctx.self());
    }
    registered_ = !registered_;
    ctx.lock_release(shared_->lock_key[static_cast<std::size_t>(index_)]);
    complete(ctx, OpClass::global, 1);
  }

  void complete(ProcessContext& ctx, OpClass cls, Tick pace) {
    Tick latency = ctx.now() - issue_tick_;
    ctx.world().metrics().record_latency(cls, latency);
    ctx.world().metrics().count_op(ctx.node(), cls);
    shared_->completed[cls == OpClass::p2p ? 0 : cls == OpClass::global ? 1 : 2]++;
    ctx.start_timer(std::max<Tick>(pace, 1), 0);
  }

  std::shared_ptr<BenchShared> shared_;
  int index_;
  DetRng rng_;
  std::string payload_;
  std::uint64_t cmd_id_ = 0;
  Tick issue_tick_ = 0;
  int acks_missing_ = 0;
  bool registered_ = false;
};

}  // namespace

std::unique_ptr<SimWorld> build_mix_world(int nodes,
                                          const MixTopology& topology,
                                          WorldConfig wc) {
  if (nodes < 1) throw SimError("bad_scenario: need at least one node");
  BootSpec boot;
  boot.connect = topology.kind == MixTopology::Kind::mesh
                     ? BootSpec::Connect::mesh
                     : BootSpec::Connect::isolated;
  for (int i = 0; i < nodes; ++i)
    boot.nodes.push_back({bench_node(i), NodeType::normal, {}, {}});
  auto world = std::make_unique<SimWorld>(boot, wc);

  if (topology.kind == MixTopology::Kind::sgroups) {
    int size = topology.group_size;
    if (size < 1) throw SimError("bad_scenario: group size must be >= 1");
    int blocks = (nodes + size - 1) / size;
    std::vector<NodeId> gateways;
    for (int b = 0; b < blocks; ++b) {
      NodeSet members;
      for (int i = b * size; i < std::min(nodes, (b + 1) * size); ++i)
        members.insert(bench_node(i));
      world->groups().new_s_group("bg" + std::to_string(b + 1), members,
                                  bench_node(b * size));
      gateways.push_back(bench_node(b * size));
    }
    // Inter-group connectivity: a ring of direct gateway links.
    if (blocks >= 2)
      for (int b = 0; b < blocks; ++b)
        world->connect(gateways[static_cast<std::size_t>(b)],
                       gateways[static_cast<std::size_t>((b + 1) % blocks)]);
  }
  return world;
}

MixResult run_mix(const MixConfig& cfg) {
  cfg.mix.validate();
  WorldConfig wc;
  wc.seed = cfg.seed;
  wc.name_service_cost = cfg.name_service_cost;
  if (!cfg.network_file.empty()) {
    auto network = std::make_shared<NetworkDescription>(
        NetworkDescription::load(cfg.network_file));
    wc.latency.distance = [network](const NodeId& a, const NodeId& b) {
      return static_cast<Tick>(network->distances.dist(a, b));
    };
  }
  auto world = build_mix_world(cfg.nodes, cfg.topology, wc);

  auto shared = std::make_shared<BenchShared>();
  shared->mix = cfg.mix;
  shared->topology = cfg.topology;
  shared->nodes = cfg.nodes;
  shared->seed = cfg.seed;
  shared->group_members.resize(static_cast<std::size_t>(cfg.nodes));
  shared->lock_key.resize(static_cast<std::size_t>(cfg.nodes));

  for (int i = 0; i < cfg.nodes; ++i) {
    if (cfg.topology.kind == MixTopology::Kind::mesh) {
      NodeSet all;
      for (int k = 0; k < cfg.nodes; ++k) all.insert(bench_node(k));
      shared->group_members[static_cast<std::size_t>(i)] = all;
      shared->lock_key[static_cast<std::size_t>(i)] = "global";
    } else {
      int block = i / cfg.topology.group_size;
      NodeSet members;
      for (int k = block * cfg.topology.group_size;
           k < std::min(cfg.nodes, (block + 1) * cfg.topology.group_size); ++k)
        members.insert(bench_node(k));
      shared->group_members[static_cast<std::size_t>(i)] = members;
      shared->lock_key[static_cast<std::size_t>(i)] =
          "group:bg" + std::to_string(block + 1);
    }
  }

  MixResult out;
  out.links_boot = world->link_count();

  for (int i = 0; i < cfg.nodes; ++i)
    shared->agents.push_back(world->spawn(
        bench_node(i), ProcessSpec{"bench.agent", [] {
          return std::make_unique<AgentProcess>();
        }}));
  for (int i = 0; i < cfg.nodes; ++i) {
    int index = i;
    shared->drivers.push_back(world->spawn(
        bench_node(i), ProcessSpec{"bench.driver", [shared, index] {
          return std::make_unique<DriverProcess>(shared, index);
        }}));
  }

  world->run_until(cfg.ticks);

  out.nodes = cfg.nodes;
  out.topology = cfg.topology.kind == MixTopology::Kind::mesh
                     ? "mesh"
                     : "sgroups" + std::to_string(cfg.topology.group_size);
  out.ticks = cfg.ticks;
  out.completed_p2p = shared->completed[0];
  out.completed_global = shared->completed[1];
  out.completed_local = shared->completed[2];
  out.completed_total =
      out.completed_p2p + out.completed_global + out.completed_local;
  out.throughput =
      static_cast<double>(out.completed_total) / static_cast<double>(cfg.ticks);
  out.median_latency_p2p = world->metrics().median_latency(OpClass::p2p);
  out.median_latency_global = world->metrics().median_latency(OpClass::global);
  out.median_latency_local = world->metrics().median_latency(OpClass::local);
  out.links_end = world->link_count();
  out.msgs_total = world->metrics().total_sent();
  out.trace_hash = world->event_trace_hash();
  out.metrics = world->metrics();
  return out;
}

std::size_t expected_mesh_links(int nodes) {
  return static_cast<std::size_t>(nodes) * (static_cast<std::size_t>(nodes) - 1) / 2;
}

std::size_t expected_sgroup_links(int nodes, int group_size) {
  std::size_t links = 0;
  int blocks = (nodes + group_size - 1) / group_size;
  for (int b = 0; b < blocks; ++b) {
    int members = std::min(nodes, (b + 1) * group_size) - b * group_size;
    links += static_cast<std::size_t>(members) *
             (static_cast<std::size_t>(members) - 1) / 2;
  }
  if (blocks == 2) links += 1;
  if (blocks >= 3) links += static_cast<std::size_t>(blocks);
  return links;
}

CensusRow census(int nodes, const MixTopology& topology) {
  WorldConfig wc;
  auto world = build_mix_world(nodes, topology, wc);
  CensusRow row;
  row.nodes = nodes;
  row.topology = topology.kind == MixTopology::Kind::mesh
                     ? "mesh"
                     : "sgroups" + std::to_string(topology.group_size);
  row.links = world->link_count();
  row.expected = topology.kind == MixTopology::Kind::mesh
                     ? expected_mesh_links(nodes)
                     : expected_sgroup_links(nodes, topology.group_size);
  return row;
}

void write_mix_csv(std::ostream& out, const std::vector<MixResult>& rows) {
  out << "nodes,topology,ticks,completed_total,completed_p2p,"
         "completed_global,completed_local,throughput,median_latency_p2p,"
         "median_latency_global,median_latency_local,links_boot,links_end,"
         "msgs_total\n";
  for (const auto& r : rows) {
    char throughput[64];
    std::snprintf(throughput, sizeof(throughput), "%.9g", r.throughput);
    out << r.nodes << ',' << r.topology << ',' << r.ticks << ','
        << r.completed_total << ',' << r.completed_p2p << ','
        << r.completed_global << ',' << r.completed_local << ',' << throughput
        << ',' << r.median_latency_p2p << ',' << r.median_latency_global << ','
        << r.median_latency_local << ',' << r.links_boot << ',' << r.links_end
        << ',' << r.msgs_total << '\n';
  }
}

void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows) {
  out << "nodes,topology,links,expected\n";
  for (const auto& r : rows)
    out << r.nodes << ',' << r.topology << ',' << r.links << ',' << r.expected
        << '\n';
}

}  // namespace sgsim
