#include "sgsim/orbit.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "sgsim/det_rng.hpp"
#include "sgsim/runtime.hpp"
#include "sgsim/sgroup_layer.hpp"

namespace sgsim {

std::uint64_t OrbitGenerator::apply(std::uint64_t x,
                                    std::uint64_t space) const {
  if (kind == Kind::affine) {
    // Reduce operands first so the product cannot overflow for the
    // supported space sizes (validate() bounds space below 2^31).
    std::uint64_t m = space + 1;
    return ((a % m) * (x % m) + b % m) % m;
  }
  return x < table.size() ? table[x] : 0;
}

void OrbitSpec::validate() const {
  if (generators.empty()) throw SimError("bad_generator: none given");
  if (space >= (1ULL << 31)) throw SimError("bad_arg: space too large");
  if (x0 > space) throw SimError("bad_arg: x0 outside the space");
  if (workers < 1) throw SimError("bad_arg: need at least one worker");
  if (variant == Variant::sd && group_size < 1)
    throw SimError("bad_arg: group_size must be positive");
  for (const auto& g : generators) {
    if (g.kind == OrbitGenerator::Kind::table) {
      if (g.table.size() != space + 1)
        throw SimError("bad_generator: table size mismatch");
      for (auto v : g.table)
        if (v > space) throw SimError("bad_generator: value out of range");
    }
  }
}

int dht_owner(std::uint64_t vertex, int workers) {
  return static_cast<int>(splitmix64(vertex) %
                          static_cast<std::uint64_t>(workers));
}

std::set<std::uint64_t> orbit_oracle(const OrbitSpec& spec) {
  spec.validate();
  std::set<std::uint64_t> seen;
  std::vector<std::uint64_t> worklist{spec.x0};
  seen.insert(spec.x0);
  while (!worklist.empty()) {
    std::uint64_t x = worklist.back();
    worklist.pop_back();
    for (const auto& g : spec.generators) {
      std::uint64_t y = g.apply(x, spec.space);
      if (seen.insert(y).second) worklist.push_back(y);
    }
  }
  return seen;
}

std::uint64_t vertex_set_hash(const std::set<std::uint64_t>& vs) {
  std::uint64_t h = 0x5851f42d4c957f2dULL;
  for (auto v : vs) h = hash_combine(h, splitmix64(v));
  return hash_combine(h, vs.size());
}

namespace {

// -- messages -----------------------------------------------------------------

struct OrbitTask {
  int target_worker = 0;
  std::vector<std::uint64_t> vertices;
  Credit credit;
};

struct OrbitCreditReturn {
  Credit credit;
};

struct OrbitChildWork {
  std::vector<std::uint64_t> vertices;
  Credit credit;
};

struct OrbitChildResult {
  std::vector<std::uint64_t> successors;  // may contain duplicates
  Credit credit;
};

// Shared wiring for one run: pid tables, routing, and the credit ledger.
struct OrbitShared {
  OrbitSpec spec;
  Pid master;
  std::vector<Pid> workers;          // by worker index
  std::vector<Pid> submasters;       // by group index (sd)
  std::vector<int> group_of_worker;  // worker index -> group index
  int master_group = -1;             // pseudo group index for the master
  std::shared_ptr<CreditLedger> ledger;
  bool done = false;

  int groups() const { return static_cast<int>(submasters.size()); }

  // Next hop for a task addressed to a worker: direct within the group (or
  // in the D variant), otherwise the target group's submaster.
  Pid task_hop(int from_group, int target_worker) const {
    if (spec.variant == OrbitSpec::Variant::d)
      return workers[static_cast<std::size_t>(target_worker)];
    int tg = group_of_worker[static_cast<std::size_t>(target_worker)];
    if (tg == from_group)
      return workers[static_cast<std::size_t>(target_worker)];
    return submasters[static_cast<std::size_t>(tg)];
  }

  // Credit returns go to the master, via the worker's own submaster in the
  // SD variant.
  Pid credit_hop(int from_group) const {
    if (spec.variant == OrbitSpec::Variant::d || from_group == master_group)
      return master;
    return submasters[static_cast<std::size_t>(from_group)];
  }
};

class OrbitWorker : public Behaviour {
 public:
  OrbitWorker(std::shared_ptr<OrbitShared> shared, int index)
      : shared_(std::move(shared)), index_(index) {}

  const std::set<std::uint64_t>& fragment() const { return fragment_; }

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* task = std::any_cast<OrbitTask>(&msg.body)) {
      shared_->ledger->flight_to_held(task->credit);
      Credit credit = task->credit;
      std::set<std::uint64_t> fresh;
      for (auto v : task->vertices)
        if (fragment_.insert(v).second) fresh.insert(v);
      if (fresh.empty() || shared_->spec.batch_size <= 1) {
        expand_and_route(ctx, fresh, credit);
      } else {
        fork_children(ctx, fresh, credit);
      }
    } else if (const auto* child = std::any_cast<OrbitChildResult>(&msg.body)) {
      shared_->ledger->flight_to_held(child->credit);
      std::set<std::uint64_t> successors(child->successors.begin(),
                                         child->successors.end());
      route_successors(ctx, successors, child->credit);
    }
  }

 private:
  // Applies every generator to the fresh vertices and routes the
  // successors; the incoming credit is split across outgoing messages and
  // the remainder returns to the master.
  void expand_and_route(ProcessContext& ctx,
                        const std::set<std::uint64_t>& fresh, Credit credit) {
    std::set<std::uint64_t> successors;
    for (auto v : fresh)
      for (const auto& g : shared_->spec.generators)
        successors.insert(g.apply(v, shared_->spec.space));
    route_successors(ctx, successors, credit);
  }

  void route_successors(ProcessContext& ctx,
                        const std::set<std::uint64_t>& successors,
                        Credit credit) {
    std::map<int, std::vector<std::uint64_t>> buckets;
    for (auto v : successors)
      buckets[dht_owner(v, shared_->spec.workers)].push_back(v);
    int my_group = shared_->group_of_worker[static_cast<std::size_t>(index_)];
    for (auto& [owner, vertices] : buckets) {
      auto [give, keep] = credit_split(credit);
      credit = keep;
      shared_->ledger->held_to_flight(give);
      ctx.send(shared_->task_hop(my_group, owner),
               OrbitTask{owner, std::move(vertices), give});
    }
    shared_->ledger->held_to_flight(credit);
    ctx.send(shared_->credit_hop(my_group), OrbitCreditReturn{credit});
  }

  // Intra-worker parallelism: fan the fresh vertices out to child
  // processes, each with its own credit share.
  void fork_children(ProcessContext& ctx, const std::set<std::uint64_t>& fresh,
                     Credit credit) {
    std::vector<std::vector<std::uint64_t>> chunks;
    std::vector<std::uint64_t> current;
    for (auto v : fresh) {
      current.push_back(v);
      if (current.size() >=
          static_cast<std::size_t>(shared_->spec.batch_size)) {
        chunks.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) chunks.push_back(std::move(current));
    auto shared = shared_;
    for (auto& chunk : chunks) {
      auto [give, keep] = credit_split(credit);
      credit = keep;
      Pid child = ctx.spawn(
          ctx.node(),
          ProcessSpec{"orbit.child", [shared]() {
                        return std::make_unique<OrbitChild>(shared);
                      }});
      shared_->ledger->held_to_flight(give);
      ctx.send(child, OrbitChildWork{std::move(chunk), give});
    }
    shared_->ledger->held_to_flight(credit);
    int my_group = shared_->group_of_worker[static_cast<std::size_t>(index_)];
    ctx.send(shared_->credit_hop(my_group), OrbitCreditReturn{credit});
  }

  class OrbitChild : public Behaviour {
   public:
    explicit OrbitChild(std::shared_ptr<OrbitShared> shared)
        : shared_(std::move(shared)) {}
    void on_message(ProcessContext& ctx, const Message& msg) override {
      if (const auto* work = std::any_cast<OrbitChildWork>(&msg.body)) {
        shared_->ledger->flight_to_held(work->credit);
        std::vector<std::uint64_t> successors;
        for (auto v : work->vertices)
          for (const auto& g : shared_->spec.generators)
            successors.push_back(g.apply(v, shared_->spec.space));
        shared_->ledger->held_to_flight(work->credit);
        ctx.send(msg.from, OrbitChildResult{std::move(successors),
                                            work->credit});
        ctx.exit_normal();
      }
    }

   private:
    std::shared_ptr<OrbitShared> shared_;
  };

  std::shared_ptr<OrbitShared> shared_;
  int index_;
  std::set<std::uint64_t> fragment_;
};

// Relays tasks into its group and credit returns up to the master.
class OrbitSubmaster : public Behaviour {
 public:
  explicit OrbitSubmaster(std::shared_ptr<OrbitShared> shared)
      : shared_(std::move(shared)) {}

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* task = std::any_cast<OrbitTask>(&msg.body)) {
      ctx.send(shared_->workers[static_cast<std::size_t>(task->target_worker)],
               *task);
    } else if (const auto* ret =
                   std::any_cast<OrbitCreditReturn>(&msg.body)) {
      ctx.send(shared_->master, *ret);
    }
  }

 private:
  std::shared_ptr<OrbitShared> shared_;
};

class OrbitMaster : public Behaviour {
 public:
  explicit OrbitMaster(std::shared_ptr<OrbitShared> shared)
      : shared_(std::move(shared)) {}

  void on_start(ProcessContext& ctx) override {
    // The ledger was started at setup: the master holds the unit credit
    // until this initial dispatch.
    int owner = dht_owner(shared_->spec.x0, shared_->spec.workers);
    Credit unit{0};
    shared_->ledger->held_to_flight(unit);
    ctx.send(shared_->task_hop(shared_->master_group, owner),
             OrbitTask{owner, {shared_->spec.x0}, unit});
  }

  void on_message(ProcessContext& ctx, const Message& msg) override {
    if (const auto* ret = std::any_cast<OrbitCreditReturn>(&msg.body)) {
      shared_->ledger->flight_to_pool(ret->credit);
      if (shared_->ledger->finished()) {
        // All credit is back: no worker holds work and nothing is in
        // flight, so the fixpoint is complete.
        shared_->done = true;
        ctx.world().request_stop();
      }
    }
  }

 private:
  std::shared_ptr<OrbitShared> shared_;
};

}  // namespace

OrbitOutcome run_orbit(const OrbitSpec& spec, const OrbitRunConfig& cfg) {
  spec.validate();

  auto shared = std::make_shared<OrbitShared>();
  shared->spec = spec;
  shared->ledger = std::make_shared<CreditLedger>();
  shared->ledger->start();
  shared->group_of_worker.resize(static_cast<std::size_t>(spec.workers), 0);

  const bool sd = spec.variant == OrbitSpec::Variant::sd;
  int groups = 1;
  if (sd)
    groups = (spec.workers + spec.group_size - 1) / spec.group_size;

  auto worker_node = [](int i) { return "w" + std::to_string(i + 1); };
  auto sub_node = [](int g) { return "s" + std::to_string(g + 1); };

  BootSpec boot;
  boot.connect = sd ? BootSpec::Connect::isolated : BootSpec::Connect::mesh;
  boot.nodes.push_back({"master", NodeType::normal, {}, {}});
  if (sd)
    for (int g = 0; g < groups; ++g)
      boot.nodes.push_back({sub_node(g), NodeType::normal, {}, {}});
  for (int i = 0; i < spec.workers; ++i)
    boot.nodes.push_back({worker_node(i), NodeType::normal, {}, {}});

  WorldConfig wc;
  wc.seed = cfg.seed;
  SimWorld world(boot, wc);

  if (sd) {
    // One group per worker block (submaster included) and the hub group
    // joining the master to every submaster.
    for (int g = 0; g < groups; ++g) {
      NodeSet members{sub_node(g)};
      for (int i = 0; i < spec.workers; ++i)
        if (i / spec.group_size == g) members.insert(worker_node(i));
      world.groups().new_s_group("orbit_g" + std::to_string(g + 1), members,
                                 "master");
    }
    NodeSet hub{"master"};
    for (int g = 0; g < groups; ++g) hub.insert(sub_node(g));
    world.groups().new_s_group("orbit_hub", hub, "master");
  }

  shared->master_group = -1;
  shared->master = world.spawn("master", ProcessSpec{"orbit.master", [shared] {
                                 return std::make_unique<OrbitMaster>(shared);
                               }});
  if (sd) {
    for (int g = 0; g < groups; ++g)
      shared->submasters.push_back(
          world.spawn(sub_node(g), ProcessSpec{"orbit.sub", [shared] {
                        return std::make_unique<OrbitSubmaster>(shared);
                      }}));
  }
  for (int i = 0; i < spec.workers; ++i) {
    if (sd)
      shared->group_of_worker[static_cast<std::size_t>(i)] =
          i / spec.group_size;
    shared->workers.push_back(
        world.spawn(worker_node(i), ProcessSpec{"orbit.worker", [shared, i] {
                      return std::make_unique<OrbitWorker>(shared, i);
                    }}));
  }

  if (cfg.check_conservation) {
    auto ledger = shared->ledger;
    world.on_tick = [ledger](SimWorld&, Tick t) {
      if (!ledger->conserved())
        throw SimError("credit conservation violated at tick " +
                       std::to_string(t) + ": " + ledger->to_string());
    };
  }

  RunResult rr = world.run_until(cfg.max_ticks);

  OrbitOutcome out;
  out.completed = shared->done && shared->ledger->finished();
  out.end_tick = rr.end_tick;
  out.events = rr.events;
  for (int i = 0; i < spec.workers; ++i) {
    const auto* p = world.find_process(shared->workers[static_cast<std::size_t>(i)]);
    const auto* w = dynamic_cast<const OrbitWorker*>(p->behaviour.get());
    out.vertices.insert(w->fragment().begin(), w->fragment().end());
  }
  out.result_hash = vertex_set_hash(out.vertices);
  out.total_sent = world.metrics().total_sent();
  if (sd) {
    // Every cross-group link must touch a submaster or the master.
    auto node_kind = [&](const NodeId& id) {
      return id == "master" || id.front() == 's';
    };
    auto group_of_node = [&](const NodeId& id) -> int {
      if (id.front() != 'w') return -1;
      int widx = std::stoi(id.substr(1)) - 1;
      return widx / spec.group_size;
    };
    for (const auto& [a, b, packets] : world.metrics().used_links()) {
      if (node_kind(a) || node_kind(b)) continue;
      if (group_of_node(a) != group_of_node(b))
        out.cross_group_violations += packets;
    }
  }
  out.metrics = world.metrics();
  return out;
}

}  // namespace sgsim
