#pragma once

#include <map>
#include <optional>

#include "sgsim/command.hpp"
#include "sgsim/runtime.hpp"
#include "sgsim/value.hpp"

namespace sgsim {

// Concrete group layer: the Table-1 style API effected on the simulated
// runtime. Every group on every member node has a replica (member set plus
// namespace); group operations synchronise the replicas at a cost of one
// message per member other than the executor, while reads consult only the
// executing node's local replica.
//
// The result contracts match abstract_semantics exactly; the two
// implementations are kept independent so lockstep testing is meaningful.
class SGroupService {
 public:
  explicit SGroupService(SimWorld& world) : world_(world) {}

  // In the default atomic mode replicas update together with the command,
  // which lockstep comparison relies on. Async mode ships namespace updates
  // as delayed messages instead; reads may then observe stale replicas.
  void set_async_replication(bool on) { async_ = on; }
  bool async_replication() const { return async_; }

  // Full dispatch used by the model-based test driver.
  Value apply(const Command& cmd);

  Value new_s_group(const GroupName& g, const NodeSet& nodes,
                    const NodeId& at);
  Value delete_s_group(const GroupName& g, const NodeId& at);
  Value add_nodes(const GroupName& g, const NodeSet& nodes, const NodeId& at);
  Value remove_nodes(const GroupName& g, const NodeSet& nodes,
                     const NodeId& at);
  bool register_name(const GroupName& g, const Name& n, const Pid& p,
                     const NodeId& at);
  bool re_register_name(const GroupName& g, const Name& n, const Pid& p,
                        const NodeId& at);
  Value unregister_name(const GroupName& g, const Name& n, const NodeId& at);
  std::optional<Pid> whereis(const GroupName& g, const Name& n,
                             const NodeId& at);
  // Resolves and delivers: returns the pid or badarg when unresolvable from
  // the executing node.
  Value send_named(const GroupName& g, const Name& n,
                   const std::string& payload, const NodeId& at);

  // Group membership as agreed by the system.
  const std::map<GroupName, NodeSet>& directory() const { return directory_; }
  std::optional<NodeSet> members_of(const GroupName& g) const;

  // Runtime hook: removes a dead process's registration from its group.
  void drop_dead_name(const GroupName& g, const Name& n, const Pid& p);

 private:
  Value query(const Command& cmd) const;
  void replicate(const GroupName& g, const NodeId& from,
                 const std::function<void(GroupReplica&)>& update);
  void sync_cost(const NodeId& at, const NodeSet& members);
  void make_free(const NodeSet& candidates);

  SimWorld& world_;
  std::map<GroupName, NodeSet> directory_;
  bool async_ = false;
};

}  // namespace sgsim
