#include "sgsim/runtime.hpp"

#include <algorithm>
#include <cassert>

#include "sgsim/sgroup_layer.hpp"

namespace sgsim {
namespace {

constexpr int kPrioDeliver = 0;
constexpr int kPrioSpawn = 1;
constexpr int kPrioExit = 2;
constexpr int kPrioTimer = 3;
constexpr int kPrioRespawn = 4;
constexpr int kPrioHook = 5;
constexpr int kPrioHeartbeat = 6;

int priority_of(Event::Kind k) {
  switch (k) {
    case Event::Kind::deliver: return kPrioDeliver;
    case Event::Kind::spawn: return kPrioSpawn;
    case Event::Kind::exit_evt: return kPrioExit;
    case Event::Kind::timer: return kPrioTimer;
    case Event::Kind::respawn: return kPrioRespawn;
    case Event::Kind::hook: return kPrioHook;
    case Event::Kind::heartbeat: return kPrioHeartbeat;
  }
  return kPrioHook;
}

}  // namespace

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::normal: return "normal";
    case ExitReason::killed: return "killed";
    case ExitReason::linked_exit: return "linked_exit";
    case ExitReason::chaos: return "chaos";
  }
  return "?";
}

SimWorld::SimWorld(const BootSpec& boot, WorldConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  if (boot.nodes.empty()) throw SimError("bad_scenario: no nodes");
  for (const auto& bn : boot.nodes) {
    if (nodes_.count(bn.id) > 0)
      throw SimError("bad_scenario: duplicate node " + bn.id);
    SimNode n;
    n.id = bn.id;
    n.type = bn.type;
    n.attrs = bn.attrs;
    n.labels = bn.labels;
    nodes_.emplace(bn.id, std::move(n));
  }
  if (boot.connect == BootSpec::Connect::mesh && boot.nodes.size() > 1) {
    const NodeId& seed_node = boot.nodes.front().id;
    for (std::size_t i = 1; i < boot.nodes.size(); ++i)
      connect(seed_node, boot.nodes[i].id);
  }
  if (config_.heartbeat_period > 0) {
    Event ev;
    ev.kind = Event::Kind::heartbeat;
    ev.at = config_.heartbeat_period;
    push_event(std::move(ev));
  }
  groups_ = std::make_unique<SGroupService>(*this);
}

SimWorld::~SimWorld() = default;

SGroupService& SimWorld::groups() { return *groups_; }
const SGroupService& SimWorld::groups() const { return *groups_; }

// -- topology ---------------------------------------------------------------

void SimWorld::add_edge(const NodeId& a, const NodeId& b) {
  if (a == b) return;
  nodes_.at(a).connections.insert(b);
  nodes_.at(b).connections.insert(a);
}

void SimWorld::connect(const NodeId& a, const NodeId& b) {
  if (a == b) return;
  auto& na = node_mut(a);
  auto& nb = node_mut(b);
  auto is_free_normal = [](const SimNode& n) {
    return n.type == NodeType::normal && n.group_memberships.empty();
  };
  add_edge(a, b);
  if (is_free_normal(na) && is_free_normal(nb)) {
    // Transitive sharing: the joined component of free normal nodes
    // becomes one full mesh.
    mesh_free_component({a, b});
  }
}

void SimWorld::mesh_free_component(const NodeSet& seeds) {
  auto is_free_normal = [this](const NodeId& id) {
    const auto& n = nodes_.at(id);
    return n.type == NodeType::normal && n.group_memberships.empty();
  };
  NodeSet pending;
  for (const auto& s : seeds)
    if (is_free_normal(s)) pending.insert(s);
  while (!pending.empty()) {
    NodeSet component;
    NodeSet frontier{*pending.begin()};
    while (!frontier.empty()) {
      NodeSet next;
      for (const auto& n : frontier) {
        if (!component.insert(n).second) continue;
        for (const auto& c : nodes_.at(n).connections)
          if (is_free_normal(c) && component.count(c) == 0) next.insert(c);
      }
      frontier = std::move(next);
    }
    for (const auto& n : component) pending.erase(n);
    for (const auto& x : component)
      for (const auto& y : component)
        if (x != y) nodes_.at(x).connections.insert(y);
  }
}

bool SimWorld::connected(const NodeId& a, const NodeId& b) const {
  auto it = nodes_.find(a);
  return it != nodes_.end() && it->second.connections.count(b) > 0;
}

std::size_t SimWorld::link_count() const {
  std::size_t degree_sum = 0;
  for (const auto& [id, n] : nodes_) degree_sum += n.connections.size();
  return degree_sum / 2;
}

const SimNode& SimWorld::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw SimError("unknown node " + id);
  return it->second;
}

SimNode& SimWorld::node_mut(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw SimError("unknown node " + id);
  return it->second;
}

bool SimWorld::has_node(const NodeId& id) const { return nodes_.count(id) > 0; }

std::vector<NodeId> SimWorld::node_ids() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) out.push_back(id);
  return out;
}

// -- processes ----------------------------------------------------------------

Pid SimWorld::spawn(const NodeId& on, ProcessSpec spec,
                    std::optional<Pid> parent, bool link) {
  auto& n = node_mut(on);
  Pid pid{on, next_serial_++};
  Process p;
  p.pid = pid;
  p.node = on;
  p.tag = spec.tag;
  p.behaviour = spec.make ? spec.make() : nullptr;
  p.spec = std::move(spec);
  if (parent && link) {
    p.links.insert(*parent);
    if (auto* pp = find_process_mut(*parent)) pp->links.insert(pid);
  }
  processes_.emplace(pid, std::move(p));
  n.process_order.push_back(pid);

  Tick delay = 1;
  if (parent && parent->node != on)
    delay = std::max<Tick>(1, config_.latency.of(parent->node, on));
  Event ev;
  ev.kind = Event::Kind::spawn;
  ev.at = clock_ + delay;
  ev.pid = pid;
  push_event(std::move(ev));
  return pid;
}

const Process* SimWorld::find_process(const Pid& pid) const {
  auto it = processes_.find(pid);
  return it == processes_.end() ? nullptr : &it->second;
}

Process* SimWorld::find_process_mut(const Pid& pid) {
  auto it = processes_.find(pid);
  return it == processes_.end() ? nullptr : &it->second;
}

bool SimWorld::alive(const Pid& pid) const {
  const Process* p = find_process(pid);
  return p != nullptr && !p->exited;
}

std::vector<const Process*> SimWorld::processes_on(const NodeId& id) const {
  std::vector<const Process*> out;
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return out;
  for (const auto& pid : it->second.process_order) {
    auto pit = processes_.find(pid);
    if (pit != processes_.end()) out.push_back(&pit->second);
  }
  return out;
}

void SimWorld::link(const Pid& a, const Pid& b) {
  auto* pa = find_process_mut(a);
  auto* pb = find_process_mut(b);
  if (pa == nullptr || pb == nullptr) return;
  pa->links.insert(b);
  pb->links.insert(a);
}

void SimWorld::kill(const Pid& pid, ExitReason reason) {
  do_exit(pid, reason);
}

void SimWorld::schedule_exit(const Pid& pid, ExitReason reason, Tick delay) {
  Event ev;
  ev.kind = Event::Kind::exit_evt;
  ev.at = clock_ + std::max<Tick>(0, delay);
  ev.pid = pid;
  ev.reason = reason;
  push_event(std::move(ev));
}

std::uint64_t SimWorld::slot_of_supervisor(const Pid& supervisor) {
  auto* p = find_process_mut(supervisor);
  if (p == nullptr) return 0;
  if (p->slot != 0) return p->slot;
  // Implicit non-restartable slot so children can reference a stable
  // supervisor identity.
  std::uint64_t id = next_slot_++;
  SupervisionSlot slot;
  slot.id = id;
  slot.child = supervisor;
  slot.node = supervisor.node;
  slot.restart = false;
  slots_.emplace(id, std::move(slot));
  p->slot = id;
  return id;
}

void SimWorld::supervise(const Pid& supervisor, const Pid& child,
                         bool restart) {
  auto* pc = find_process_mut(child);
  if (pc == nullptr) return;
  std::uint64_t parent = slot_of_supervisor(supervisor);
  if (pc->slot == 0) {
    std::uint64_t id = next_slot_++;
    SupervisionSlot slot;
    slot.id = id;
    slot.child = child;
    slot.node = pc->node;
    slot.restart = restart;
    slot.parent_slot = parent;
    // Recreate the same behaviour on restart.
    slot.spec = pc->spec;
    slots_.emplace(id, std::move(slot));
    pc->slot = id;
  } else {
    auto& slot = slots_.at(pc->slot);
    slot.restart = restart;
    slot.parent_slot = parent;
  }
}

// -- messaging ----------------------------------------------------------------

bool SimWorld::post(const Pid& from, const Pid& to, std::any body,
                    bool name_service) {
  const Process* target = find_process(to);
  if (target == nullptr || target->exited) return false;  // badarg, dropped
  if (from.node != to.node && !connected(from.node, to.node))
    connect(from.node, to.node);
  metrics_.count_send(from.node, to.node);
  Event ev;
  ev.kind = Event::Kind::deliver;
  ev.at = clock_ + config_.latency.of(from.node, to.node);
  ev.msg = Message{from, to, std::move(body), name_service};
  push_event(std::move(ev));
  return true;
}

void SimWorld::start_timer(const Pid& owner, Tick delay, std::uint64_t tag) {
  Event ev;
  ev.kind = Event::Kind::timer;
  ev.at = clock_ + std::max<Tick>(0, delay);
  ev.pid = owner;
  ev.tag = tag;
  push_event(std::move(ev));
}

void SimWorld::schedule(Tick at, std::function<void(SimWorld&)> fn) {
  Event ev;
  ev.kind = Event::Kind::hook;
  ev.at = std::max(at, clock_);
  ev.hook = std::move(fn);
  push_event(std::move(ev));
}

// -- locks ----------------------------------------------------------------

bool SimWorld::lock_acquire(const std::string& key, const Pid& owner) {
  auto& q = locks_[key];
  if (!q.holder) {
    q.holder = owner;
    return true;
  }
  q.waiters.push_back(owner);
  return false;
}

void SimWorld::lock_release(const std::string& key, const Pid& owner) {
  auto it = locks_.find(key);
  if (it == locks_.end() || !it->second.holder ||
      !(*it->second.holder == owner))
    return;
  auto& q = it->second;
  q.holder.reset();
  while (!q.waiters.empty()) {
    Pid next = q.waiters.front();
    q.waiters.pop_front();
    if (!alive(next)) continue;  // died while queued
    q.holder = next;
    post(owner, next, LockGranted{key});
    break;
  }
}

// -- node-local names --------------------------------------------------------

bool SimWorld::register_local(const Name& name, const Pid& pid) {
  if (!alive(pid)) return false;
  auto& table = node_mut(pid.node).local_names;
  if (table.count(name) > 0) return false;
  table.emplace(name, pid);
  metrics_.count_op(pid.node, OpClass::local);
  return true;
}

std::optional<Pid> SimWorld::whereis_local(const NodeId& at,
                                           const Name& name) const {
  auto it = nodes_.find(at);
  if (it == nodes_.end()) return std::nullopt;
  auto e = it->second.local_names.find(name);
  if (e == it->second.local_names.end()) return std::nullopt;
  return e->second;
}

// -- global namespace ------------------------------------------------------

bool SimWorld::register_global(const Name& name, const Pid& pid) {
  metrics_.count_op(pid.node, OpClass::global);
  if (global_names_.count(name) > 0) return false;
  for (const auto& [nm, p] : global_names_)
    if (p == pid) return false;
  global_names_.emplace(name, pid);
  if (auto* p = find_process_mut(pid))
    p->names.push_back({RegisteredName::Scope::global, {}, name});
  // Synchronisation round: one message to every currently connected node.
  const auto& reg_node = node(pid.node);
  for (const auto& peer : reg_node.connections) {
    metrics_.count_send(pid.node, peer);
    metrics_.count_delivery(pid.node, peer);
  }
  return true;
}

void SimWorld::unregister_global(const Name& name, const NodeId& at) {
  metrics_.count_op(at, OpClass::global);
  auto it = global_names_.find(name);
  if (it == global_names_.end()) return;
  if (auto* p = find_process_mut(it->second)) {
    std::erase_if(p->names, [&name](const RegisteredName& rn) {
      return rn.scope == RegisteredName::Scope::global && rn.name == name;
    });
  }
  global_names_.erase(it);
  for (const auto& peer : node(at).connections) {
    metrics_.count_send(at, peer);
    metrics_.count_delivery(at, peer);
  }
}

std::optional<Pid> SimWorld::lookup_global(const Name& name,
                                           const NodeId& at) {
  metrics_.count_op(at, OpClass::local);
  return whereis_global(name);
}

std::optional<Pid> SimWorld::whereis_global(const Name& name) const {
  auto it = global_names_.find(name);
  if (it == global_names_.end()) return std::nullopt;
  return it->second;
}

void SimWorld::apply_global_entry(const Name& name, std::optional<Pid> pid) {
  if (pid) {
    global_names_[name] = *pid;
    if (auto* p = find_process_mut(*pid))
      p->names.push_back({RegisteredName::Scope::global, {}, name});
  } else {
    auto it = global_names_.find(name);
    if (it == global_names_.end()) return;
    if (auto* p = find_process_mut(it->second)) {
      std::erase_if(p->names, [&name](const RegisteredName& rn) {
        return rn.scope == RegisteredName::Scope::global && rn.name == name;
      });
    }
    global_names_.erase(it);
  }
}

// -- exits, supervision ------------------------------------------------------

void SimWorld::drop_registered_names(Process& p) {
  // A dead process's names disappear from every table that held them; the
  // removal is synchronised like any other namespace change.
  std::vector<RegisteredName> names = std::move(p.names);
  p.names.clear();
  for (const auto& rn : names) {
    if (rn.scope == RegisteredName::Scope::global) {
      auto it = global_names_.find(rn.name);
      if (it != global_names_.end() && it->second == p.pid) {
        global_names_.erase(it);
        for (const auto& peer : node(p.node).connections) {
          metrics_.count_send(p.node, peer);
          metrics_.count_delivery(p.node, peer);
        }
      }
    } else {
      groups_->drop_dead_name(rn.group, rn.name, p.pid);
    }
  }
  p.names = std::move(names);  // kept for the supervision slot to re-register
}

void SimWorld::do_exit(const Pid& pid, ExitReason reason) {
  auto* p = find_process_mut(pid);
  if (p == nullptr || p->exited) return;
  p->exited = true;
  p->reason = reason;
  for (std::size_t i = 0; i < p->pending.size(); ++i)
    metrics_.count_drop(p->node);
  p->pending.clear();
  drop_registered_names(*p);
  std::erase_if(node_mut(p->node).local_names,
                [&pid](const auto& e) { return e.second == pid; });

  // Exit signals propagate through links, except on normal completion.
  std::set<Pid> links = p->links;
  if (reason != ExitReason::normal)
    for (const auto& linked : links) do_exit(linked, ExitReason::linked_exit);

  if (p->slot != 0) {
    auto slot_it = slots_.find(p->slot);
    if (slot_it != slots_.end()) {
      auto& slot = slot_it->second;
      slot.names = p->names;  // re-register these on respawn
      notify_supervisor(slot.parent_slot, ChildExit{pid, reason});
      if (slot.restart && reason != ExitReason::normal) {
        Event ev;
        ev.kind = Event::Kind::respawn;
        ev.at = clock_ + std::max<Tick>(1, config_.restart_delay);
        ev.tag = slot.id;
        push_event(std::move(ev));
      }
    }
  }

  // Children supervised by this process: if no replacement is coming,
  // orphan or escalate them per configuration.
  const Process& dead = *p;
  std::uint64_t own_slot = dead.slot;
  bool replacement_coming = false;
  if (own_slot != 0) {
    auto it = slots_.find(own_slot);
    replacement_coming = it != slots_.end() && it->second.restart &&
                         reason != ExitReason::normal;
  }
  if (!replacement_coming && own_slot != 0) {
    std::vector<std::uint64_t> child_slots;
    for (const auto& [id, slot] : slots_)
      if (slot.parent_slot == own_slot) child_slots.push_back(id);
    for (auto id : child_slots) {
      if (config_.on_supervisor_loss == WorldConfig::OrphanPolicy::orphan) {
        if (auto* cp = find_process_mut(slots_.at(id).child)) cp->slot = 0;
        slots_.erase(id);
      } else {
        slots_.at(id).parent_slot = slots_.at(own_slot).parent_slot;
      }
    }
  }
}

void SimWorld::notify_supervisor(std::uint64_t parent_slot, std::any notice) {
  if (parent_slot == 0) return;
  auto it = slots_.find(parent_slot);
  if (it == slots_.end()) return;
  auto& slot = it->second;
  if (alive(slot.child)) {
    post(slot.child, slot.child, std::move(notice));
  } else {
    // Supervisor currently dead; keep the notice for its replacement.
    slot.pending_notices.push_back(std::move(notice));
  }
}

void SimWorld::do_respawn(std::uint64_t slot_id) {
  auto it = slots_.find(slot_id);
  if (it == slots_.end()) return;
  auto& slot = it->second;
  if (alive(slot.child)) return;  // already replaced
  if (!slot.spec.make) return;    // nothing to recreate
  Pid old_pid = slot.child;
  Pid fresh = spawn(slot.node, slot.spec);
  auto* p = find_process_mut(fresh);
  p->slot = slot_id;
  slot.child = fresh;
  // Same names, same scopes, new pid.
  for (const auto& rn : slot.names) {
    if (rn.scope == RegisteredName::Scope::global)
      register_global(rn.name, fresh);
    else
      groups_->register_name(rn.group, rn.name, fresh, slot.node);
  }
  slot.names.clear();
  notify_supervisor(slot.parent_slot, ChildRestarted{old_pid, fresh});
}

// -- event loop ---------------------------------------------------------------

void SimWorld::push_event(Event&& ev) {
  ev.priority = priority_of(ev.kind);
  ev.seq = next_seq_++;
  assert(ev.at >= clock_);
  queue_.insert(std::move(ev));
}

void SimWorld::deliver(Event&& ev) {
  Message& msg = ev.msg;
  auto* target = find_process_mut(msg.to);
  if (target == nullptr || target->exited) {
    metrics_.count_drop(msg.to.node);
    return;
  }
  if (msg.name_service && !ev.reserved) {
    // Namespace synchronisation work is serialised per node.
    auto& n = node_mut(msg.to.node);
    Tick slot_at = std::max(clock_, n.name_service_free_at);
    n.name_service_free_at = slot_at + config_.name_service_cost;
    if (slot_at > clock_) {
      Event requeued = std::move(ev);
      requeued.at = slot_at;
      requeued.reserved = true;
      queue_.insert(std::move(requeued));  // keeps its original seq
      return;
    }
  }
  if (!target->started) {
    // Counted as delivered only once drained, so that
    // sent = delivered + dropped holds at quiescence.
    target->pending.push_back(std::move(msg));
    return;
  }
  metrics_.count_delivery(msg.from.node, msg.to.node);
  if (!target->behaviour) return;
  ProcessContext ctx(*this, msg.to);
  if (const auto* ce = std::any_cast<ChildExit>(&msg.body)) {
    target->behaviour->on_child_exit(ctx, *ce);
  } else if (const auto* cr = std::any_cast<ChildRestarted>(&msg.body)) {
    target->behaviour->on_child_restarted(ctx, *cr);
  } else {
    target->behaviour->on_message(ctx, msg);
  }
}

void SimWorld::process_event(Event&& ev) {
  events_processed_++;
  trace_hash_ = hash_combine(trace_hash_,
                             hash_combine(static_cast<std::uint64_t>(ev.at),
                                          static_cast<std::uint64_t>(ev.seq)));
  switch (ev.kind) {
    case Event::Kind::deliver:
      deliver(std::move(ev));
      break;
    case Event::Kind::spawn: {
      auto* p = find_process_mut(ev.pid);
      if (p == nullptr || p->exited || p->started) break;
      p->started = true;
      ProcessContext ctx(*this, ev.pid);
      if (p->behaviour) p->behaviour->on_start(ctx);
      // Drain messages that arrived before the start, unless on_start
      // already ended the process.
      while (true) {
        p = find_process_mut(ev.pid);
        if (p == nullptr || p->exited || p->pending.empty()) break;
        Message msg = std::move(p->pending.front());
        p->pending.erase(p->pending.begin());
        metrics_.count_delivery(msg.from.node, msg.to.node);
        if (p->behaviour) p->behaviour->on_message(ctx, msg);
      }
      // Deliver supervision notices queued while this slot was vacant.
      if (p != nullptr && p->slot != 0) {
        auto it = slots_.find(p->slot);
        if (it != slots_.end())
          for (auto& notice : std::exchange(it->second.pending_notices, {}))
            post(ev.pid, ev.pid, std::move(notice));
      }
      break;
    }
    case Event::Kind::exit_evt:
      do_exit(ev.pid, ev.reason);
      break;
    case Event::Kind::timer: {
      auto* p = find_process_mut(ev.pid);
      if (p == nullptr || p->exited || !p->started) break;
      ProcessContext ctx(*this, ev.pid);
      if (p->behaviour) p->behaviour->on_timer(ctx, ev.tag);
      break;
    }
    case Event::Kind::respawn:
      do_respawn(ev.tag);
      break;
    case Event::Kind::hook:
      if (ev.hook) ev.hook(*this);
      break;
    case Event::Kind::heartbeat: {
      // One maintenance packet each way per link per period.
      for (const auto& [id, n] : nodes_)
        for (const auto& peer : n.connections)
          if (id < peer) metrics_.count_heartbeat(id, peer, 2);
      Event next;
      next.kind = Event::Kind::heartbeat;
      next.at = clock_ + config_.heartbeat_period;
      push_event(std::move(next));
      break;
    }
  }
}

RunResult SimWorld::run_until(Tick max_tick) {
  RunResult result;
  stop_requested_ = false;
  while (true) {
    if (stop_requested_) {
      result.stop = RunResult::Stop::requested;
      break;
    }
    if (queue_.empty()) {
      result.stop = RunResult::Stop::quiescent;
      break;
    }
    if (queue_.begin()->at > max_tick) {
      clock_ = max_tick;
      result.stop = RunResult::Stop::budget;
      break;
    }
    if (queue_.begin()->at > clock_) {
      clock_ = queue_.begin()->at;
      if (on_tick) {
        on_tick(*this, clock_);
        if (stop_requested_) {
          result.stop = RunResult::Stop::requested;
          break;
        }
      }
    }
    auto node_handle = queue_.extract(queue_.begin());
    process_event(std::move(node_handle.value()));
    result.events++;
  }
  result.end_tick = clock_;
  return result;
}

}  // namespace sgsim
