#include "sgsim/abstract_semantics.hpp"

#include <algorithm>

namespace sgsim {
namespace {

Value err(ErrorCode c) { return Error{c}; }

bool node_exists(const AbstractState& st, const NodeId& n) {
  return st.nodes.count(n) > 0;
}

// Detaches a free node from its free group / free hidden group so it can
// join an s_group. Namespace entries owned by the departing node are
// dropped with it.
void leave_free_structures(AbstractState& st, const NodeId& n) {
  const auto& rec = st.nodes.at(n);
  if (rec.type == NodeType::hidden) {
    st.free_hidden_groups.erase(n);
    return;
  }
  for (auto it = st.free_groups.begin(); it != st.free_groups.end(); ++it) {
    if (it->members.count(n) == 0) continue;
    it->members.erase(n);
    it->ns.drop_nodes({n});
    if (it->members.empty()) st.free_groups.erase(it);
    break;
  }
}

void connect_pairwise(AbstractState& st, const NodeSet& nodes) {
  for (const auto& a : nodes) {
    auto& conn = st.nodes.at(a).connections;
    for (const auto& b : nodes)
      if (b != a) conn.insert(b);
  }
}

// Moves nodes that just left their last s_group back to free status. Free
// normal nodes regroup by connected component over the current connection
// sets; each merged component becomes one meshed free group (connection
// sets of free nodes are shared transitively). Hidden nodes each become
// their own free hidden group with an empty namespace.
void revert_to_free(AbstractState& st, const NodeSet& freed) {
  NodeSet freed_normal;
  for (const auto& n : freed) {
    auto& rec = st.nodes.at(n);
    if (!rec.free()) continue;  // still in another group
    if (rec.type == NodeType::hidden)
      st.free_hidden_groups.emplace(n, Namespace{});
    else
      freed_normal.insert(n);
  }
  if (freed_normal.empty()) return;

  // All free normal nodes, existing and newly freed.
  NodeSet free_normal = freed_normal;
  for (const auto& fg : st.free_groups)
    free_normal.insert(fg.members.begin(), fg.members.end());

  NodeSet pending = freed_normal;
  while (!pending.empty()) {
    // Flood-fill the component of one freed node.
    NodeSet component;
    NodeSet frontier{*pending.begin()};
    while (!frontier.empty()) {
      NodeSet next;
      for (const auto& n : frontier) {
        if (!component.insert(n).second) continue;
        for (const auto& c : st.nodes.at(n).connections)
          if (free_normal.count(c) > 0 && component.count(c) == 0)
            next.insert(c);
      }
      frontier = std::move(next);
    }
    for (const auto& n : component) pending.erase(n);

    // Absorb the free groups this component touches and mesh it.
    Namespace merged;
    std::erase_if(st.free_groups, [&](const FreeGroup& fg) {
      if (fg.members.empty() || component.count(*fg.members.begin()) == 0)
        return false;
      merged.entries.insert(fg.ns.entries.begin(), fg.ns.entries.end());
      return true;
    });
    connect_pairwise(st, component);
    st.free_groups.push_back(FreeGroup{component, std::move(merged)});
  }
  st.canonicalize();
}

Value do_new_s_group(AbstractState& st, const Command& c) {
  if (c.nodes.empty()) return err(ErrorCode::bad_arg);
  if (st.s_groups.count(c.group) > 0) return err(ErrorCode::already_exists);
  for (const auto& n : c.nodes)
    if (!node_exists(st, n)) return err(ErrorCode::no_node);

  for (const auto& n : c.nodes) {
    auto& rec = st.nodes.at(n);
    if (rec.free()) leave_free_structures(st, n);
    rec.groups.insert(c.group);
  }
  connect_pairwise(st, c.nodes);
  st.s_groups.emplace(c.group, SGroup{c.nodes, {}});
  st.canonicalize();
  return GroupCreated{c.group, c.nodes};
}

Value do_delete_s_group(AbstractState& st, const Command& c) {
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end()) return err(ErrorCode::no_group);
  NodeSet members = it->second.members;
  st.s_groups.erase(it);
  for (const auto& n : members) st.nodes.at(n).groups.erase(c.group);
  revert_to_free(st, members);
  return Ok{};
}

Value do_add_nodes(AbstractState& st, const Command& c) {
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end()) return err(ErrorCode::no_group);
  if (it->second.members.count(c.at) == 0) return err(ErrorCode::not_member);
  for (const auto& n : c.nodes)
    if (!node_exists(st, n)) return err(ErrorCode::no_node);

  for (const auto& n : c.nodes) {
    if (it->second.members.count(n) > 0) continue;  // idempotent
    auto& rec = st.nodes.at(n);
    if (rec.free()) leave_free_structures(st, n);
    rec.groups.insert(c.group);
    it->second.members.insert(n);
  }
  connect_pairwise(st, it->second.members);
  st.canonicalize();
  return NodeList{it->second.members};
}

Value do_remove_nodes(AbstractState& st, const Command& c) {
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end()) return err(ErrorCode::no_group);
  if (it->second.members.count(c.at) == 0) return err(ErrorCode::not_member);
  for (const auto& n : c.nodes)
    if (it->second.members.count(n) == 0)
      return err(ErrorCode::no_node_in_group);

  for (const auto& n : c.nodes) {
    it->second.members.erase(n);
    st.nodes.at(n).groups.erase(c.group);
  }
  it->second.ns.drop_nodes(c.nodes);
  revert_to_free(st, c.nodes);
  // The group persists even with zero members; only delete_s_group
  // destroys a group.
  return Ok{};
}

Value do_register(AbstractState& st, const Command& c, bool re_register) {
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end()) return YesNo::no;
  auto& grp = it->second;
  if (grp.members.count(c.pid.node) == 0) return YesNo::no;
  auto bound = grp.ns.entries.find(c.pname);
  if (!re_register) {
    if (bound != grp.ns.entries.end()) return YesNo::no;
    if (grp.ns.has_pid(c.pid)) return YesNo::no;
  } else {
    // The pid may keep its own binding but must not be bound under
    // another name.
    auto other = grp.ns.name_of(c.pid);
    if (other && *other != c.pname) return YesNo::no;
    if (bound != grp.ns.entries.end()) grp.ns.entries.erase(bound);
  }
  grp.ns.entries.emplace(c.pname, c.pid);
  return YesNo::yes;
}

Value do_unregister(AbstractState& st, const Command& c) {
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end()) return err(ErrorCode::no_group);
  it->second.ns.entries.erase(c.pname);  // absent name: still ok
  return Ok{};
}

Value do_registered_names_group(const AbstractState& st, const Command& c) {
  NamePairs out;
  auto it = st.s_groups.find(c.group);
  if (it == st.s_groups.end() || it->second.members.count(c.at) == 0)
    return out;  // the otherwise-branch: empty set
  for (const auto& [nm, pid] : it->second.ns.entries)
    out.entries.emplace(c.group, nm);
  return out;
}

Value do_registered_names_node(const AbstractState& st, const Command& c) {
  NamePairs out;
  auto it = st.nodes.find(c.target_node);
  if (it == st.nodes.end()) return out;
  for (const auto& g : it->second.groups)
    for (const auto& [nm, pid] : st.s_groups.at(g).ns.entries)
      if (pid.node == c.target_node) out.entries.emplace(g, nm);
  return out;
}

const Pid* resolve(const AbstractState& st, const GroupName& g, const Name& nm,
                   const NodeId& at) {
  auto it = st.s_groups.find(g);
  if (it == st.s_groups.end() || it->second.members.count(at) == 0)
    return nullptr;
  auto e = it->second.ns.entries.find(nm);
  return e == it->second.ns.entries.end() ? nullptr : &e->second;
}

Value do_whereis(const AbstractState& st, const Command& c) {
  const Pid* p = resolve(st, c.group, c.pname, c.at);
  return p ? Value{PidValue{*p}} : Value{Undefined{}};
}

Value do_send(const AbstractState& st, const Command& c) {
  // The abstract model only resolves the destination; delivery itself is
  // concrete-runtime behaviour.
  const Pid* p = resolve(st, c.group, c.pname, c.at);
  return p ? Value{PidValue{*p}} : err(ErrorCode::badarg);
}

Value do_s_groups(const AbstractState& st, const Command& c) {
  GroupNames out;
  auto it = st.nodes.find(c.at);
  if (it != st.nodes.end()) out.names = it->second.groups;
  return out;
}

Value do_own_s_groups(const AbstractState& st, const Command& c) {
  OwnGroups out;
  auto it = st.nodes.find(c.at);
  if (it != st.nodes.end())
    for (const auto& g : it->second.groups)
      out.groups.emplace(g, st.s_groups.at(g).members);
  return out;
}

Value do_own_nodes(const AbstractState& st, const Command& c) {
  NodeList out;
  auto it = st.nodes.find(c.at);
  if (it != st.nodes.end())
    for (const auto& g : it->second.groups) {
      const auto& m = st.s_groups.at(g).members;
      out.nodes.insert(m.begin(), m.end());
    }
  return out;
}

Value do_own_nodes_of(const AbstractState& st, const Command& c) {
  NodeList out;
  auto it = st.s_groups.find(c.group);
  if (it != st.s_groups.end() && it->second.members.count(c.at) > 0)
    out.nodes = it->second.members;
  return out;
}

Value do_info(const AbstractState& st, const Command& c) {
  auto it = st.nodes.find(c.at);
  if (it == st.nodes.end()) return err(ErrorCode::no_node);
  InfoValue out;
  out.node = c.at;
  out.type = it->second.type;
  out.free = it->second.free();
  out.connections = it->second.connections;
  for (const auto& g : it->second.groups)
    out.groups.emplace(g, st.s_groups.at(g).members);
  return out;
}

}  // namespace

Value apply_inplace(AbstractState& st, const Command& c) {
  // Mutating commands require a known executing node; reads on an unknown
  // node degrade to their empty value inside the per-op handlers.
  switch (c.op) {
    case Op::new_s_group:
    case Op::delete_s_group:
    case Op::add_nodes:
    case Op::remove_nodes:
    case Op::unregister_name:
      if (!node_exists(st, c.at)) return Error{ErrorCode::no_node};
      break;
    case Op::register_name:
    case Op::re_register_name:
      if (!node_exists(st, c.at)) return YesNo::no;
      break;
    default:
      break;
  }
  switch (c.op) {
    case Op::new_s_group: return do_new_s_group(st, c);
    case Op::delete_s_group: return do_delete_s_group(st, c);
    case Op::add_nodes: return do_add_nodes(st, c);
    case Op::remove_nodes: return do_remove_nodes(st, c);
    case Op::register_name: return do_register(st, c, false);
    case Op::re_register_name: return do_register(st, c, true);
    case Op::unregister_name: return do_unregister(st, c);
    case Op::registered_names_node: return do_registered_names_node(st, c);
    case Op::registered_names_group: return do_registered_names_group(st, c);
    case Op::whereis_name: return do_whereis(st, c);
    case Op::send_to_name: return do_send(st, c);
    case Op::s_groups: return do_s_groups(st, c);
    case Op::own_s_groups: return do_own_s_groups(st, c);
    case Op::own_nodes: return do_own_nodes(st, c);
    case Op::own_nodes_of: return do_own_nodes_of(st, c);
    case Op::info: return do_info(st, c);
  }
  return Error{ErrorCode::bad_arg};
}

Transition apply(const AbstractState& state, const Command& cmd) {
  Transition t{state, Ok{}};
  t.value = apply_inplace(t.state, cmd);
  return t;
}

}  // namespace sgsim
