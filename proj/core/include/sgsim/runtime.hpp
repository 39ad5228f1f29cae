#pragma once

#include <any>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgsim/det_rng.hpp"
#include "sgsim/ids.hpp"
#include "sgsim/metrics.hpp"

namespace sgsim {

class Behaviour;
class ProcessContext;
class SGroupService;
class SimWorld;

enum class ExitReason { normal, killed, linked_exit, chaos };

std::string to_string(ExitReason r);

// Message latency between two nodes: base_local on the same node, otherwise
// base_net plus a distance term supplied by the placement layer.
struct LatencyModel {
  Tick base_local = 0;
  Tick base_net = 1;
  std::function<Tick(const NodeId&, const NodeId&)> distance;

  Tick of(const NodeId& a, const NodeId& b) const {
    if (a == b) return base_local;
    return base_net + (distance ? distance(a, b) : 0);
  }
};

struct WorldConfig {
  std::uint64_t seed = 1;
  LatencyModel latency;
  // Processing cost, in ticks, of one namespace synchronisation message at
  // a node's name service. Serialises global registration rounds.
  Tick name_service_cost = 6;
  // Connection maintenance traffic: packets per link per period. 0 (the
  // default) disables it.
  Tick heartbeat_period = 0;
  // Delay before a supervisor's replacement child is spawned.
  Tick restart_delay = 10;
  // What happens to supervised children when their supervisor dies without
  // being restartable itself.
  enum class OrphanPolicy { orphan, escalate };
  OrphanPolicy on_supervisor_loss = OrphanPolicy::orphan;
};

struct Message {
  Pid from;
  Pid to;
  std::any body;
  // Name-service messages are serialised at the destination node, modelling
  // the per-message cost of namespace synchronisation.
  bool name_service = false;
};

// Runtime-generated notices, dispatched to the dedicated Behaviour hooks.
struct ChildExit {
  Pid child;
  ExitReason reason;
};
struct ChildRestarted {
  Pid old_pid;
  Pid new_pid;
};
// Delivered to the next waiter when a FIFO lock is handed over.
struct LockGranted {
  std::string key;
};

struct RegisteredName {
  enum class Scope { global, group };
  Scope scope = Scope::global;
  GroupName group;
  Name name;
};

// Recipe for (re)creating a process; kept by supervision slots so a
// restarted child runs a fresh instance of the same behaviour.
struct ProcessSpec {
  std::string tag;
  std::function<std::unique_ptr<Behaviour>()> make;
};

class Behaviour {
 public:
  virtual ~Behaviour() = default;
  virtual void on_start(ProcessContext&) {}
  virtual void on_message(ProcessContext&, const Message&) {}
  virtual void on_timer(ProcessContext&, std::uint64_t /*tag*/) {}
  virtual void on_child_exit(ProcessContext&, const ChildExit&) {}
  virtual void on_child_restarted(ProcessContext&, const ChildRestarted&) {}
};

struct Process {
  Pid pid;
  NodeId node;
  std::string tag;
  ProcessSpec spec;  // kept so supervision can recreate the behaviour
  std::unique_ptr<Behaviour> behaviour;
  std::vector<Message> pending;  // queued before on_start has run
  std::set<Pid> links;
  std::uint64_t slot = 0;  // supervision slot, 0 = unsupervised
  bool started = false;
  bool exited = false;
  ExitReason reason = ExitReason::normal;
  std::vector<RegisteredName> names;
};

// Per-node replica of one group: the member set and the group namespace.
struct GroupReplica {
  NodeSet members;
  std::map<Name, Pid> names;
};

struct SimNode {
  NodeId id;
  NodeType type = NodeType::normal;
  NodeSet connections;
  std::set<GroupName> group_memberships;
  std::map<GroupName, GroupReplica> replicas;
  std::map<Name, Pid> local_names;  // the node's own process name table
  std::map<std::string, double> attrs;
  std::set<std::string> labels;
  Tick name_service_free_at = 0;
  std::vector<Pid> process_order;  // spawn order, for deterministic choice
};

struct BootNode {
  NodeId id;
  NodeType type = NodeType::normal;
  std::map<std::string, double> attrs;
  std::set<std::string> labels;
};

struct BootSpec {
  std::vector<BootNode> nodes;
  // mesh: every node is started connected to the first (seed) node, which
  // fully meshes the free normal nodes and leaves hidden nodes with their
  // single direct link. isolated: no initial connections.
  enum class Connect { mesh, isolated };
  Connect connect = Connect::mesh;
};

struct RunResult {
  Tick end_tick = 0;
  std::uint64_t events = 0;
  enum class Stop { quiescent, budget, requested } stop = Stop::quiescent;
};

// A queue entry. Ties at one tick break by (kind priority, sequence number)
// so interleavings are deterministic.
struct Event {
  enum class Kind { deliver, spawn, exit_evt, timer, respawn, hook, heartbeat };

  Tick at = 0;
  int priority = 0;
  std::uint64_t seq = 0;
  Kind kind = Kind::hook;
  Message msg;                           // deliver
  Pid pid;                               // spawn / exit_evt / timer
  ExitReason reason = ExitReason::normal;
  std::uint64_t tag = 0;                 // timer tag or respawn slot
  std::function<void(SimWorld&)> hook;
  bool reserved = false;  // name-service processing slot already reserved

  friend bool operator<(const Event& a, const Event& b) {
    if (a.at != b.at) return a.at < b.at;
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.seq < b.seq;
  }
};

// Deterministic discrete-event world: nodes, processes, mailboxes,
// connections, supervision, and an integer tick clock. Identical
// (seed, scenario) pairs produce identical event traces.
class SimWorld {
 public:
  explicit SimWorld(const BootSpec& boot, WorldConfig config = {});
  ~SimWorld();
  SimWorld(const SimWorld&) = delete;
  SimWorld& operator=(const SimWorld&) = delete;

  // -- topology ----------------------------------------------------------
  // Adds a connection. When both endpoints are free normal nodes the two
  // components share their connection sets and become one full mesh;
  // otherwise only the single edge is added.
  void connect(const NodeId& a, const NodeId& b);
  bool connected(const NodeId& a, const NodeId& b) const;
  std::size_t link_count() const;
  const SimNode& node(const NodeId& id) const;
  bool has_node(const NodeId& id) const;
  std::vector<NodeId> node_ids() const;
  // Re-meshes the connected components of the given newly freed normal
  // nodes; used when nodes revert to free status.
  void mesh_free_component(const NodeSet& freed);

  // -- processes ---------------------------------------------------------
  Pid spawn(const NodeId& on, ProcessSpec spec,
            std::optional<Pid> parent = std::nullopt, bool link = false);
  // Immediate exit, cascading through links unless the reason is normal.
  void kill(const Pid& pid, ExitReason reason);
  // Exit via the event queue: the process finishes its current handler
  // first.
  void schedule_exit(const Pid& pid, ExitReason reason, Tick delay = 0);
  // Installs supervision of child by supervisor. If restart is true the
  // child is respawned (same spec, same node, re-registered names) after
  // restart_delay ticks whenever it exits abnormally.
  void supervise(const Pid& supervisor, const Pid& child, bool restart);
  void link(const Pid& a, const Pid& b);
  const Process* find_process(const Pid& pid) const;
  Process* find_process_mut(const Pid& pid);
  bool alive(const Pid& pid) const;
  std::vector<const Process*> processes_on(const NodeId& id) const;

  // -- messaging ---------------------------------------------------------
  // Returns false (badarg) for a dead or unknown target; the message is
  // then dropped without a delivery event.
  bool post(const Pid& from, const Pid& to, std::any body,
            bool name_service = false);
  void start_timer(const Pid& owner, Tick delay, std::uint64_t tag);

  // -- FIFO locks --------------------------------------------------------
  // Returns true when acquired immediately; otherwise the owner is queued
  // and later receives a LockGranted message.
  bool lock_acquire(const std::string& key, const Pid& owner);
  void lock_release(const std::string& key, const Pid& owner);

  // -- node-local name table ----------------------------------------------
  // A node's own process name table: only processes living on the node may
  // register, and lookups never leave the node.
  bool register_local(const Name& name, const Pid& pid);
  std::optional<Pid> whereis_local(const NodeId& at, const Name& name) const;

  // -- global namespace (cost model: one sync message per connected node) -
  bool register_global(const Name& name, const Pid& pid);
  void unregister_global(const Name& name, const NodeId& at);
  // Counting lookup executed at a node: a purely local operation.
  std::optional<Pid> lookup_global(const Name& name, const NodeId& at);
  std::optional<Pid> whereis_global(const Name& name) const;
  const std::map<Name, Pid>& global_names() const { return global_names_; }
  // Raw table edit without the cost model; used by protocols that already
  // paid for their synchronisation with real messages.
  void apply_global_entry(const Name& name, std::optional<Pid> pid);

  // -- execution ---------------------------------------------------------
  RunResult run_until(Tick max_tick);
  void request_stop() { stop_requested_ = true; }
  Tick now() const { return clock_; }

  // Schedules an arbitrary deterministic callback; chaos injection and
  // other cross-cutting instruments are built on this.
  void schedule(Tick at, std::function<void(SimWorld&)> fn);

  MetricsLog& metrics() { return metrics_; }
  const MetricsLog& metrics() const { return metrics_; }
  DetRng& rng() { return rng_; }
  const WorldConfig& config() const { return config_; }
  SGroupService& groups();
  const SGroupService& groups() const;

  // Called whenever the clock advances, before that tick's events run.
  std::function<void(SimWorld&, Tick)> on_tick;

  // Rolling hash over every processed event; equal seeds and scenarios
  // must yield equal hashes.
  std::uint64_t event_trace_hash() const { return trace_hash_; }
  std::uint64_t events_processed() const { return events_processed_; }

 private:
  friend class SGroupService;

  struct LockQueue {
    std::optional<Pid> holder;
    std::deque<Pid> waiters;
  };

  struct SupervisionSlot {
    std::uint64_t id = 0;
    Pid child;
    NodeId node;
    ProcessSpec spec;
    bool restart = false;
    std::uint64_t parent_slot = 0;
    std::vector<RegisteredName> names;
    // Notices for a supervisor that is itself awaiting respawn.
    std::vector<std::any> pending_notices;
  };

  SimNode& node_mut(const NodeId& id);
  void process_event(Event&& ev);
  void deliver(Event&& ev);
  void do_exit(const Pid& pid, ExitReason reason);
  void notify_supervisor(std::uint64_t parent_slot, std::any notice);
  void do_respawn(std::uint64_t slot_id);
  void drop_registered_names(Process& p);
  void add_edge(const NodeId& a, const NodeId& b);
  void push_event(Event&& ev);
  std::uint64_t slot_of_supervisor(const Pid& supervisor);

  WorldConfig config_;
  DetRng rng_;
  Tick clock_ = 0;
  bool stop_requested_ = false;
  std::uint64_t next_serial_ = 1;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_slot_ = 1;
  std::uint64_t trace_hash_ = 0;
  std::uint64_t events_processed_ = 0;
  std::map<NodeId, SimNode> nodes_;
  std::map<Pid, Process> processes_;
  std::map<std::uint64_t, SupervisionSlot> slots_;
  std::map<std::string, LockQueue> locks_;
  std::map<Name, Pid> global_names_;
  std::set<Event> queue_;
  std::unique_ptr<SGroupService> groups_;
  MetricsLog metrics_;
};

// Capability handed to behaviours while one of their hooks runs.
class ProcessContext {
 public:
  ProcessContext(SimWorld& world, const Pid& self)
      : world_(world), self_(self) {}

  const Pid& self() const { return self_; }
  const NodeId& node() const { return self_.node; }
  Tick now() const { return world_.now(); }

  Pid spawn(const NodeId& on, ProcessSpec spec, bool link = false) {
    return world_.spawn(on, std::move(spec), self_, link);
  }
  bool send(const Pid& to, std::any body) {
    return world_.post(self_, to, std::move(body));
  }
  bool send_sync(const Pid& to, std::any body) {
    return world_.post(self_, to, std::move(body), true);
  }
  void start_timer(Tick delay, std::uint64_t tag) {
    world_.start_timer(self_, delay, tag);
  }
  void exit_normal() { world_.schedule_exit(self_, ExitReason::normal); }
  bool lock_acquire(const std::string& key) {
    return world_.lock_acquire(key, self_);
  }
  void lock_release(const std::string& key) {
    world_.lock_release(key, self_);
  }
  SimWorld& world() { return world_; }

 private:
  SimWorld& world_;
  Pid self_;
};

}  // namespace sgsim
