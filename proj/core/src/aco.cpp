#include "sgsim/aco.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "sgsim/chaos.hpp"
#include "sgsim/runtime.hpp"
#include "sgsim/sgroup_layer.hpp"

namespace sgsim {

std::string to_string(AcoVariant v) {
  switch (v) {
    case AcoVariant::tl: return "tl";
    case AcoVariant::ml: return "ml";
    case AcoVariant::gr: return "gr";
    case AcoVariant::sr: return "sr";
  }
  return "?";
}

std::optional<AcoVariant> aco_variant_from(const std::string& s) {
  if (s == "tl") return AcoVariant::tl;
  if (s == "ml") return AcoVariant::ml;
  if (s == "gr") return AcoVariant::gr;
  if (s == "sr") return AcoVariant::sr;
  return std::nullopt;
}

void AcoTopology::validate() const {
  if (colonies < 1) throw SimError("bad_topology: colonies must be >= 1");
  if (ants < 1) throw SimError("bad_topology: ants must be >= 1");
  if (ant_iters < 1) throw SimError("bad_topology: ant_iters must be >= 1");
  if (global_iters < 1)
    throw SimError("bad_topology: global_iters must be >= 1");
  if (fanout < 1) throw SimError("bad_topology: fanout must be >= 1");
  if (ant_compute < 0) throw SimError("bad_topology: ant_compute < 0");
}

namespace {

// Deterministic "better schedule" order, independent of message arrival.
bool better(const Schedule& a, const Schedule& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.perm < b.perm;
}

struct RoundTask {
  int round = 0;
  std::optional<Schedule> global_best;
};

struct ColonyReport {
  int round = 0;
  int colony = 0;
  Schedule best;
};

struct SubReport {
  int round = 0;
  int sub = 0;
  Schedule best;
};

struct AntResult {
  int round = 0;
  int ant = 0;
  Schedule best;
};

struct AcoShared {
  SmtwtpInstance instance;
  AcoTopology topo;
  std::uint64_t seed = 0;
  Pid master;
  std::vector<Pid> subs;      // by submaster index (empty for tl)
  std::vector<Pid> colonies;  // by colony index
  std::optional<Schedule> result;
  std::vector<double> round_bests;
  std::uint64_t restarts = 0;
  bool has_submasters() const { return topo.variant != AcoVariant::tl; }
};

// Constructs I_A schedules against a pheromone snapshot, then reports its
// best to the colony after the configured compute time.
class AntProcess : public Behaviour {
 public:
  AntProcess(std::shared_ptr<AcoShared> shared, PheromoneMatrix tau,
             Pid colony, int colony_index, int round, int ant)
      : shared_(std::move(shared)),
        tau_(std::move(tau)),
        colony_(colony),
        colony_index_(colony_index),
        round_(round),
        ant_(ant) {}

  void on_start(ProcessContext& ctx) override {
    // The stream depends only on (seed, colony, round, ant): coordination
    // topology never changes what the ants compute.
    DetRng rng(hash_combine(
        hash_combine(hash_combine(shared_->seed, 0xac0),
                     static_cast<std::uint64_t>(colony_index_)),
        hash_combine(static_cast<std::uint64_t>(round_),
                     static_cast<std::uint64_t>(ant_))));
    best_.reset();
    for (int i = 0; i < shared_->topo.ant_iters; ++i) {
      Schedule s = ant_construct(shared_->instance, tau_,
                                 shared_->topo.pheromone, rng);
      if (!best_ || better(s, *best_)) best_ = s;
    }
    ctx.start_timer(shared_->topo.ant_compute, 0);
  }

  void on_timer(ProcessContext& ctx, std::uint64_t) override {
    ctx.send(colony_, AntResult{round_, ant_, *best_});
    ctx.exit_normal();
  }

 private:
  std::shared_ptr<AcoShared> shared_;
  PheromoneMatrix tau_;
  Pid colony_;
  int colony_index_;
  int round_;
  int ant_;
  std::optional<Schedule> best_;
};

// One colony: runs a generation of ants per round and reports the wave
// best. Restart-safe: a duplicate round task re-sends the cached report.
class ColonyProcess : public Behaviour {
 public:
  ColonyProcess(std::shared_ptr<AcoShared> shared, int index)
      : shared_(std::move(shared)), index_(index) {}

  void on_start(ProcessContext&) override {
    tau_ = PheromoneMatrix(shared_->instance.size(),
                           shared_->topo.pheromone);
  }

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* task = std::any_cast<RoundTask>(&msg.body)) {
      reply_to_ = msg.from;
      if (task->round == completed_round_ && completed_report_) {
        ctx.send(reply_to_, *completed_report_);  // duplicate task
        return;
      }
      if (task->round <= completed_round_ || task->round == round_) return;
      round_ = task->round;
      collected_.clear();
      if (task->global_best) tau_.update(*task->global_best,
                                         shared_->topo.pheromone);
      spawn_generation(ctx);
    } else if (const auto* res = std::any_cast<AntResult>(&msg.body)) {
      if (res->round != round_) return;
      collected_.emplace(res->ant, res->best);
      if (static_cast<int>(collected_.size()) < shared_->topo.ants) return;
      const Schedule* wave = nullptr;
      for (const auto& [ant, s] : collected_)
        if (wave == nullptr || better(s, *wave)) wave = &s;
      tau_.update(*wave, shared_->topo.pheromone);
      completed_round_ = round_;
      completed_report_ = ColonyReport{round_, index_, *wave};
      round_ = 0;
      ctx.send(reply_to_, *completed_report_);
    }
  }

 private:
  void spawn_generation(ProcessContext& ctx) {
    auto shared = shared_;
    PheromoneMatrix snapshot = tau_;
    for (int a = 0; a < shared_->topo.ants; ++a) {
      // Ants live on the colony's node and are linked: a lost ant takes
      // the colony down with it, and supervision (if any) recovers both.
      Pid colony = ctx.self();
      int round = round_;
      int index = index_;
      ctx.spawn(ctx.node(),
                ProcessSpec{"aco.ant",
                            [shared, snapshot, colony, index, round, a] {
                              return std::make_unique<AntProcess>(
                                  shared, snapshot, colony, index, round, a);
                            }},
                /*link=*/true);
    }
  }

  std::shared_ptr<AcoShared> shared_;
  int index_;
  PheromoneMatrix tau_;
  Pid reply_to_;
  int round_ = 0;  // 0 = idle
  int completed_round_ = 0;
  std::optional<ColonyReport> completed_report_;
  std::map<int, Schedule> collected_;
};

// Aggregates a block of colonies for the master.
class SubmasterProcess : public Behaviour {
 public:
  SubmasterProcess(std::shared_ptr<AcoShared> shared, int index)
      : shared_(std::move(shared)), index_(index) {}

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* task = std::any_cast<RoundTask>(&msg.body)) {
      round_ = task->round;
      task_ = *task;
      received_.clear();
      broadcast(ctx);
    } else if (const auto* rep = std::any_cast<ColonyReport>(&msg.body)) {
      if (rep->round != round_) return;
      if (!received_.emplace(rep->colony, rep->best).second) return;
      if (static_cast<int>(received_.size()) < block_size()) return;
      const Schedule* best = nullptr;
      for (const auto& [colony, s] : received_)
        if (best == nullptr || better(s, *best)) best = &s;
      ctx.send(shared_->master, SubReport{round_, index_, *best});
    }
  }

  void on_child_restarted(ProcessContext& ctx,
                          const ChildRestarted& cr) override {
    shared_->restarts++;
    for (std::size_t i = 0; i < shared_->colonies.size(); ++i)
      if (shared_->colonies[i] == cr.old_pid) shared_->colonies[i] = cr.new_pid;
    // Re-issue the current round to the replacement if its report is still
    // outstanding.
    if (round_ == 0) return;
    for (int c = lo(); c < hi(); ++c)
      if (shared_->colonies[static_cast<std::size_t>(c)] == cr.new_pid &&
          received_.count(c) == 0)
        ctx.send(cr.new_pid, task_);
  }

 private:
  int lo() const { return index_ * shared_->topo.fanout; }
  int hi() const {
    return std::min(shared_->topo.colonies, lo() + shared_->topo.fanout);
  }
  int block_size() const { return hi() - lo(); }

  void broadcast(ProcessContext& ctx) {
    for (int c = lo(); c < hi(); ++c)
      ctx.send(shared_->colonies[static_cast<std::size_t>(c)], task_);
  }

  std::shared_ptr<AcoShared> shared_;
  int index_;
  int round_ = 0;
  RoundTask task_;
  std::map<int, Schedule> received_;
};

// Runs the global iterations; never killed by chaos (the workload root).
class MasterProcess : public Behaviour {
 public:
  explicit MasterProcess(std::shared_ptr<AcoShared> shared)
      : shared_(std::move(shared)) {}

  void on_start(ProcessContext& ctx) override { next_round(ctx); }

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* rep = std::any_cast<SubReport>(&msg.body)) {
      if (rep->round != round_) return;
      take(ctx, rep->sub, rep->best);
    } else if (const auto* rep = std::any_cast<ColonyReport>(&msg.body)) {
      if (rep->round != round_) return;
      take(ctx, rep->colony, rep->best);
    }
  }

  void on_child_restarted(ProcessContext& ctx,
                          const ChildRestarted& cr) override {
    shared_->restarts++;
    for (std::size_t i = 0; i < shared_->subs.size(); ++i)
      if (shared_->subs[i] == cr.old_pid) shared_->subs[i] = cr.new_pid;
    if (round_ != 0)
      ctx.send(cr.new_pid, RoundTask{round_, global_best_});
  }

 private:
  int expected() const {
    return shared_->has_submasters() ? shared_->topo.submasters()
                                     : shared_->topo.colonies;
  }

  void take(ProcessContext& ctx, int reporter, const Schedule& s) {
    if (!received_.emplace(reporter, s).second) return;
    if (static_cast<int>(received_.size()) < expected()) return;
    for (const auto& [r, sched] : received_)
      if (!global_best_ || better(sched, *global_best_))
        global_best_ = sched;
    shared_->round_bests.push_back(global_best_->cost);
    if (round_ >= shared_->topo.global_iters) {
      shared_->result = global_best_;
      ctx.world().request_stop();
      return;
    }
    next_round(ctx);
  }

  void next_round(ProcessContext& ctx) {
    ++round_;
    received_.clear();
    RoundTask task{round_, global_best_};
    if (shared_->has_submasters()) {
      for (const auto& sub : shared_->subs) ctx.send(sub, task);
    } else {
      for (const auto& colony : shared_->colonies) ctx.send(colony, task);
    }
  }

  std::shared_ptr<AcoShared> shared_;
  int round_ = 0;
  std::map<int, Schedule> received_;
  std::optional<Schedule> global_best_;
};

}  // namespace

AcoOutcome run_aco(const SmtwtpInstance& inst, const AcoTopology& topo,
                   const AcoRunConfig& cfg) {
  inst.validate();
  topo.validate();

  auto shared = std::make_shared<AcoShared>();
  shared->instance = inst;
  shared->topo = topo;
  shared->seed = cfg.seed;

  const bool sr = topo.variant == AcoVariant::sr;
  const bool reliable =
      topo.variant == AcoVariant::gr || topo.variant == AcoVariant::sr;

  auto colony_node = [](int i) { return "c" + std::to_string(i + 1); };
  auto sub_node = [&](int j) { return colony_node(j * topo.fanout); };

  BootSpec boot;
  boot.connect = sr ? BootSpec::Connect::isolated : BootSpec::Connect::mesh;
  for (int i = 0; i < topo.colonies; ++i)
    boot.nodes.push_back({colony_node(i), NodeType::normal, {}, {}});

  WorldConfig wc;
  wc.seed = cfg.seed;
  wc.heartbeat_period = cfg.heartbeat_period;
  wc.restart_delay = cfg.restart_delay;
  SimWorld world(boot, wc);

  const int subs = topo.submasters();
  if (sr) {
    // One group per submaster block; the hub group joins the master node
    // to every submaster node (gateways, they belong to both).
    for (int j = 0; j < subs; ++j) {
      NodeSet members;
      for (int i = j * topo.fanout;
           i < std::min(topo.colonies, (j + 1) * topo.fanout); ++i)
        members.insert(colony_node(i));
      members.insert(sub_node(j));
      world.groups().new_s_group("aco_g" + std::to_string(j + 1), members,
                                 colony_node(0));
    }
    NodeSet hub{colony_node(0)};
    for (int j = 0; j < subs; ++j) hub.insert(sub_node(j));
    world.groups().new_s_group("aco_hub", hub, colony_node(0));
  }

  shared->master = world.spawn(colony_node(0), ProcessSpec{"aco.master", [shared] {
                                 return std::make_unique<MasterProcess>(shared);
                               }});
  if (shared->has_submasters()) {
    for (int j = 0; j < subs; ++j) {
      int index = j;
      shared->subs.push_back(world.spawn(
          sub_node(j), ProcessSpec{"aco.sub." + std::to_string(j), [shared, index] {
            return std::make_unique<SubmasterProcess>(shared, index);
          }}));
    }
  }
  for (int i = 0; i < topo.colonies; ++i) {
    int index = i;
    shared->colonies.push_back(world.spawn(
        colony_node(i), ProcessSpec{"aco.colony." + std::to_string(i), [shared, index] {
          return std::make_unique<ColonyProcess>(shared, index);
        }}));
  }

  if (reliable) {
    // Supervision: the master restarts submasters, submasters restart
    // their colonies.
    for (int j = 0; j < subs; ++j)
      world.supervise(shared->master, shared->subs[static_cast<std::size_t>(j)],
                      /*restart=*/true);
    for (int i = 0; i < topo.colonies; ++i)
      world.supervise(shared->subs[static_cast<std::size_t>(i / topo.fanout)],
                      shared->colonies[static_cast<std::size_t>(i)],
                      /*restart=*/true);
    // Critical names: global for gr, group-scoped for sr.
    auto register_name = [&](const Name& name, const Pid& pid,
                             const GroupName& group) {
      if (sr)
        world.groups().register_name(group, name, pid, pid.node);
      else
        world.register_global(name, pid);
    };
    register_name("aco_master", shared->master, "aco_hub");
    for (int j = 0; j < subs; ++j)
      register_name("aco_sub_" + std::to_string(j + 1),
                    shared->subs[static_cast<std::size_t>(j)], "aco_hub");
    for (int i = 0; i < topo.colonies; ++i)
      register_name("aco_colony_" + std::to_string(i + 1),
                    shared->colonies[static_cast<std::size_t>(i)],
                    "aco_g" + std::to_string(i / topo.fanout + 1));
  }

  std::shared_ptr<ChaosStats> chaos;
  if (cfg.chaos_period > 0) {
    ChaosPolicy policy;
    policy.period = cfg.chaos_period;
    policy.seed = cfg.chaos_seed;
    policy.exclude_tag_prefixes = {"aco.master"};
    chaos = install_chaos(world, policy);
  }

  RunResult rr = world.run_until(cfg.max_ticks);

  AcoOutcome out;
  out.completed = shared->result.has_value();
  if (shared->result) out.best = *shared->result;
  out.end_tick = rr.end_tick;
  out.round_bests = shared->round_bests;
  out.total_sent = world.metrics().total_sent();
  out.total_link_packets = world.metrics().total_link_packets();
  out.chaos_kills = chaos ? chaos->kills : 0;
  out.restarts = shared->restarts;
  out.links = world.link_count();

  if (reliable) {
    // Reliability postcondition: every registered name must resolve to a
    // live pid.
    if (sr) {
      auto check = [&](const GroupName& g, const Name& n,
                       const NodeId& member) {
        auto pid = world.groups().whereis(g, n, member);
        if (!pid || !world.alive(*pid)) out.names_resolve = false;
      };
      check("aco_hub", "aco_master", colony_node(0));
      for (int j = 0; j < subs; ++j)
        check("aco_hub", "aco_sub_" + std::to_string(j + 1), sub_node(j));
      for (int i = 0; i < topo.colonies; ++i)
        check("aco_g" + std::to_string(i / topo.fanout + 1),
              "aco_colony_" + std::to_string(i + 1), colony_node(i));
    } else {
      auto check = [&](const Name& n) {
        auto pid = world.whereis_global(n);
        if (!pid || !world.alive(*pid)) out.names_resolve = false;
      };
      check("aco_master");
      for (int j = 0; j < subs; ++j)
        check("aco_sub_" + std::to_string(j + 1));
      for (int i = 0; i < topo.colonies; ++i)
        check("aco_colony_" + std::to_string(i + 1));
    }
  }
  out.metrics = world.metrics();
  return out;
}

}  // namespace sgsim
