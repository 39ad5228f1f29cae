#include "sgsim/sgroup_layer.hpp"

#include <algorithm>

namespace sgsim {
namespace {

Value err(ErrorCode c) { return Error{c}; }

}  // namespace

std::optional<NodeSet> SGroupService::members_of(const GroupName& g) const {
  auto it = directory_.find(g);
  if (it == directory_.end()) return std::nullopt;
  return it->second;
}

void SGroupService::sync_cost(const NodeId& at, const NodeSet& members) {
  for (const auto& m : members) {
    if (m == at) continue;
    world_.metrics().count_send(at, m);
    world_.metrics().count_delivery(at, m);
  }
}

// Applies a namespace update to every member replica of g. Atomic mode
// updates in place; async mode delays each remote replica by the link
// latency, modelling synchronisation messages in flight.
void SGroupService::replicate(const GroupName& g, const NodeId& from,
                              const std::function<void(GroupReplica&)>& update) {
  const NodeSet& members = directory_.at(g);
  for (const auto& m : members) {
    auto& node = world_.node_mut(m);
    auto rep = node.replicas.find(g);
    if (rep == node.replicas.end()) continue;
    if (!async_ || m == from) {
      update(rep->second);
    } else {
      NodeId member = m;
      GroupName group = g;
      world_.schedule(world_.now() + world_.config().latency.of(from, m),
                      [group, member, update](SimWorld& w) {
                        auto& n = w.node_mut(member);
                        auto it = n.replicas.find(group);
                        if (it != n.replicas.end()) update(it->second);
                      });
    }
  }
}

void SGroupService::make_free(const NodeSet& candidates) {
  NodeSet freed_normal;
  for (const auto& id : candidates) {
    const auto& n = world_.node(id);
    if (n.group_memberships.empty() && n.type == NodeType::normal)
      freed_normal.insert(id);
  }
  world_.mesh_free_component(freed_normal);
}

Value SGroupService::new_s_group(const GroupName& g, const NodeSet& nodes,
                                 const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  if (nodes.empty()) return err(ErrorCode::bad_arg);
  if (directory_.count(g) > 0) return err(ErrorCode::already_exists);
  for (const auto& n : nodes)
    if (!world_.has_node(n)) return err(ErrorCode::no_node);

  directory_.emplace(g, nodes);
  for (const auto& n : nodes) {
    auto& node = world_.node_mut(n);
    node.group_memberships.insert(g);
    node.replicas[g] = GroupReplica{nodes, {}};
  }
  for (const auto& a : nodes)
    for (const auto& b : nodes)
      if (a < b) world_.connect(a, b);
  sync_cost(at, nodes);
  return GroupCreated{g, nodes};
}

Value SGroupService::delete_s_group(const GroupName& g, const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return err(ErrorCode::no_group);
  NodeSet members = it->second;
  directory_.erase(it);
  for (const auto& m : members) {
    auto& node = world_.node_mut(m);
    node.group_memberships.erase(g);
    node.replicas.erase(g);
  }
  sync_cost(at, members);
  make_free(members);
  return Ok{};
}

Value SGroupService::add_nodes(const GroupName& g, const NodeSet& nodes,
                               const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return err(ErrorCode::no_group);
  if (it->second.count(at) == 0) return err(ErrorCode::not_member);
  for (const auto& n : nodes)
    if (!world_.has_node(n)) return err(ErrorCode::no_node);

  // Namespace travels to the newcomers with the member list.
  std::map<Name, Pid> names = world_.node(at).replicas.at(g).names;
  NodeSet& members = it->second;
  for (const auto& n : nodes) {
    if (!members.insert(n).second) continue;  // already a member: idempotent
    auto& node = world_.node_mut(n);
    node.group_memberships.insert(g);
    node.replicas[g] = GroupReplica{{}, names};
  }
  for (const auto& m : members) {
    auto& replicas = world_.node_mut(m).replicas;
    auto rep = replicas.find(g);
    if (rep != replicas.end()) rep->second.members = members;
  }
  for (const auto& a : members)
    for (const auto& b : members)
      if (a < b && !world_.connected(a, b)) world_.connect(a, b);
  sync_cost(at, members);
  return NodeList{members};
}

Value SGroupService::remove_nodes(const GroupName& g, const NodeSet& nodes,
                                  const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return err(ErrorCode::no_group);
  if (it->second.count(at) == 0) return err(ErrorCode::not_member);
  for (const auto& n : nodes)
    if (it->second.count(n) == 0) return err(ErrorCode::no_node_in_group);

  NodeSet& members = it->second;
  for (const auto& n : nodes) {
    members.erase(n);
    auto& node = world_.node_mut(n);
    node.group_memberships.erase(g);
    node.replicas.erase(g);
  }
  for (const auto& m : members) {
    auto& rep = world_.node_mut(m).replicas.at(g);
    rep.members = members;
    std::erase_if(rep.names, [&nodes](const auto& e) {
      return nodes.count(e.second.node) > 0;
    });
  }
  sync_cost(at, members);
  make_free(nodes);
  return Ok{};
}

bool SGroupService::register_name(const GroupName& g, const Name& n,
                                  const Pid& p, const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return false;
  if (it->second.count(p.node) == 0) return false;
  const auto& owner_rep = world_.node(p.node).replicas.at(g);
  if (owner_rep.names.count(n) > 0) return false;
  for (const auto& [nm, pid] : owner_rep.names)
    if (pid == p) return false;

  replicate(g, at, [n, p](GroupReplica& rep) { rep.names[n] = p; });
  if (auto* proc = world_.find_process_mut(p))
    proc->names.push_back({RegisteredName::Scope::group, g, n});
  sync_cost(at, it->second);
  return true;
}

bool SGroupService::re_register_name(const GroupName& g, const Name& n,
                                     const Pid& p, const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return false;
  if (it->second.count(p.node) == 0) return false;
  const auto& owner_rep = world_.node(p.node).replicas.at(g);
  for (const auto& [nm, pid] : owner_rep.names)
    if (pid == p && nm != n) return false;  // bound under another name

  auto previous = owner_rep.names.find(n);
  if (previous != owner_rep.names.end()) {
    if (auto* old_proc = world_.find_process_mut(previous->second)) {
      std::erase_if(old_proc->names, [&](const RegisteredName& rn) {
        return rn.scope == RegisteredName::Scope::group && rn.group == g &&
               rn.name == n;
      });
    }
  }
  replicate(g, at, [n, p](GroupReplica& rep) { rep.names[n] = p; });
  if (auto* proc = world_.find_process_mut(p))
    proc->names.push_back({RegisteredName::Scope::group, g, n});
  sync_cost(at, it->second);
  return true;
}

Value SGroupService::unregister_name(const GroupName& g, const Name& n,
                                     const NodeId& at) {
  world_.metrics().count_op(at, OpClass::group);
  auto it = directory_.find(g);
  if (it == directory_.end()) return err(ErrorCode::no_group);
  // Unregistering an absent name is still ok.
  for (const auto& m : it->second) {
    const auto& rep = world_.node(m).replicas.at(g);
    auto bound = rep.names.find(n);
    if (bound != rep.names.end()) {
      if (auto* proc = world_.find_process_mut(bound->second)) {
        std::erase_if(proc->names, [&](const RegisteredName& rn) {
          return rn.scope == RegisteredName::Scope::group && rn.group == g &&
                 rn.name == n;
        });
      }
      break;
    }
  }
  replicate(g, at, [n](GroupReplica& rep) { rep.names.erase(n); });
  sync_cost(at, it->second);
  return Ok{};
}

std::optional<Pid> SGroupService::whereis(const GroupName& g, const Name& n,
                                          const NodeId& at) {
  // Local replica read: zero network messages.
  if (!world_.has_node(at)) return std::nullopt;
  world_.metrics().count_op(at, OpClass::local);
  const auto& node = world_.node(at);
  auto rep = node.replicas.find(g);
  if (rep == node.replicas.end()) return std::nullopt;
  auto e = rep->second.names.find(n);
  if (e == rep->second.names.end()) return std::nullopt;
  return e->second;
}

Value SGroupService::send_named(const GroupName& g, const Name& n,
                                const std::string& payload, const NodeId& at) {
  auto pid = whereis(g, n, at);
  if (!pid) return err(ErrorCode::badarg);
  world_.post(Pid{at, 0}, *pid, payload);
  return PidValue{*pid};
}

void SGroupService::drop_dead_name(const GroupName& g, const Name& n,
                                   const Pid& p) {
  auto it = directory_.find(g);
  if (it == directory_.end()) return;
  replicate(g, p.node, [n, p](GroupReplica& rep) {
    auto e = rep.names.find(n);
    if (e != rep.names.end() && e->second == p) rep.names.erase(e);
  });
  sync_cost(p.node, it->second);
}

Value SGroupService::query(const Command& cmd) const {
  switch (cmd.op) {
    case Op::registered_names_group: {
      NamePairs out;
      if (!world_.has_node(cmd.at)) return out;
      const auto& node = world_.node(cmd.at);
      auto rep = node.replicas.find(cmd.group);
      if (rep == node.replicas.end()) return out;
      for (const auto& [nm, pid] : rep->second.names)
        out.entries.emplace(cmd.group, nm);
      return out;
    }
    case Op::registered_names_node: {
      NamePairs out;
      if (!world_.has_node(cmd.target_node)) return out;
      for (const auto& [g, rep] : world_.node(cmd.target_node).replicas)
        for (const auto& [nm, pid] : rep.names)
          if (pid.node == cmd.target_node) out.entries.emplace(g, nm);
      return out;
    }
    case Op::s_groups: {
      GroupNames out;
      if (world_.has_node(cmd.at))
        out.names = world_.node(cmd.at).group_memberships;
      return out;
    }
    case Op::own_s_groups: {
      OwnGroups out;
      if (world_.has_node(cmd.at))
        for (const auto& [g, rep] : world_.node(cmd.at).replicas)
          out.groups.emplace(g, rep.members);
      return out;
    }
    case Op::own_nodes: {
      NodeList out;
      if (world_.has_node(cmd.at))
        for (const auto& [g, rep] : world_.node(cmd.at).replicas)
          out.nodes.insert(rep.members.begin(), rep.members.end());
      return out;
    }
    case Op::own_nodes_of: {
      NodeList out;
      if (world_.has_node(cmd.at)) {
        const auto& node = world_.node(cmd.at);
        auto rep = node.replicas.find(cmd.group);
        if (rep != node.replicas.end()) out.nodes = rep->second.members;
      }
      return out;
    }
    case Op::info: {
      if (!world_.has_node(cmd.at)) return err(ErrorCode::no_node);
      const auto& node = world_.node(cmd.at);
      InfoValue out;
      out.node = cmd.at;
      out.type = node.type;
      out.free = node.group_memberships.empty();
      out.connections = node.connections;
      for (const auto& [g, rep] : node.replicas)
        out.groups.emplace(g, rep.members);
      return out;
    }
    default:
      return err(ErrorCode::bad_arg);
  }
}

Value SGroupService::apply(const Command& cmd) {
  switch (cmd.op) {
    case Op::new_s_group:
    case Op::delete_s_group:
    case Op::add_nodes:
    case Op::remove_nodes:
    case Op::unregister_name:
      if (!world_.has_node(cmd.at)) return err(ErrorCode::no_node);
      break;
    case Op::register_name:
    case Op::re_register_name:
      if (!world_.has_node(cmd.at)) return YesNo::no;
      break;
    default:
      break;
  }
  switch (cmd.op) {
    case Op::new_s_group: return new_s_group(cmd.group, cmd.nodes, cmd.at);
    case Op::delete_s_group: return delete_s_group(cmd.group, cmd.at);
    case Op::add_nodes: return add_nodes(cmd.group, cmd.nodes, cmd.at);
    case Op::remove_nodes: return remove_nodes(cmd.group, cmd.nodes, cmd.at);
    case Op::register_name:
      return register_name(cmd.group, cmd.pname, cmd.pid, cmd.at)
                 ? YesNo::yes
                 : YesNo::no;
    case Op::re_register_name:
      return re_register_name(cmd.group, cmd.pname, cmd.pid, cmd.at)
                 ? YesNo::yes
                 : YesNo::no;
    case Op::unregister_name:
      return unregister_name(cmd.group, cmd.pname, cmd.at);
    case Op::whereis_name: {
      auto pid = whereis(cmd.group, cmd.pname, cmd.at);
      if (!pid) return Undefined{};
      return PidValue{*pid};
    }
    case Op::send_to_name:
      return send_named(cmd.group, cmd.pname, cmd.payload, cmd.at);
    default:
      if (world_.has_node(cmd.at))
        world_.metrics().count_op(cmd.at, OpClass::local);
      return query(cmd);
  }
}

}  // namespace sgsim
