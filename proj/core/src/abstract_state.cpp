#include "sgsim/abstract_state.hpp"

#include <algorithm>
#include <sstream>

namespace sgsim {

bool Namespace::has_pid(const Pid& p) const {
  for (const auto& [name, pid] : entries)
    if (pid == p) return true;
  return false;
}

std::optional<Name> Namespace::name_of(const Pid& p) const {
  for (const auto& [name, pid] : entries)
    if (pid == p) return name;
  return std::nullopt;
}

void Namespace::drop_nodes(const NodeSet& nodes) {
  std::erase_if(entries, [&nodes](const auto& e) {
    return nodes.count(e.second.node) > 0;
  });
}

AbstractState AbstractState::boot(const std::vector<RosterEntry>& roster) {
  AbstractState st;
  NodeSet normals;
  for (const auto& r : roster) {
    NodeRecord rec;
    rec.type = r.type;
    st.nodes.emplace(r.id, std::move(rec));
    if (r.type == NodeType::normal)
      normals.insert(r.id);
    else
      st.free_hidden_groups.emplace(r.id, Namespace{});
  }
  // Every node starts connected to the first (seed) node. Free normal
  // nodes share connection sets transitively, so if the seed is normal
  // they end up fully meshed; hidden nodes keep their single direct link.
  if (roster.size() > 1) {
    const NodeId& seed = roster.front().id;
    for (std::size_t i = 1; i < roster.size(); ++i) {
      st.nodes.at(seed).connections.insert(roster[i].id);
      st.nodes.at(roster[i].id).connections.insert(seed);
    }
    if (roster.front().type == NodeType::normal) {
      for (const auto& a : normals) {
        auto& conn = st.nodes.at(a).connections;
        for (const auto& b : normals)
          if (b != a) conn.insert(b);
      }
    }
  }
  // Free groups are the connection components of the free normal nodes:
  // one merged group behind a normal seed, singletons behind a hidden one.
  if (!normals.empty()) {
    if (roster.front().type == NodeType::normal || normals.size() == 1) {
      st.free_groups.push_back(FreeGroup{normals, {}});
    } else {
      for (const auto& n : normals)
        st.free_groups.push_back(FreeGroup{{n}, {}});
    }
  }
  st.canonicalize();
  return st;
}

void AbstractState::canonicalize() {
  std::sort(free_groups.begin(), free_groups.end());
}

std::string AbstractState::check_invariants() const {
  // Every node appears in exactly one of the three group kinds, consistent
  // with its record.
  std::map<NodeId, int> placements;
  for (const auto& [id, rec] : nodes) placements[id] = 0;

  for (const auto& [gname, grp] : s_groups) {
    for (const auto& n : grp.members) {
      auto it = nodes.find(n);
      if (it == nodes.end()) return "s_group " + gname + " has unknown node " + n;
      if (it->second.groups.count(gname) == 0)
        return "node " + n + " missing group_name " + gname;
    }
    std::set<Pid> pids;
    for (const auto& [nm, pid] : grp.ns.entries)
      if (!pids.insert(pid).second)
        return "duplicate pid in namespace of " + gname;
  }
  for (const auto& fg : free_groups) {
    if (fg.members.empty()) return "empty free group";
    for (const auto& n : fg.members) {
      auto it = nodes.find(n);
      if (it == nodes.end()) return "free group has unknown node " + n;
      if (it->second.type != NodeType::normal)
        return "hidden node " + n + " in a free group";
      if (!it->second.free()) return "grouped node " + n + " in a free group";
      if (++placements[n] > 1) return "node " + n + " in two free groups";
    }
    // Free normal nodes stay fully meshed within their group.
    for (const auto& a : fg.members)
      for (const auto& b : fg.members)
        if (a != b && nodes.at(a).connections.count(b) == 0)
          return "free group not meshed: " + a + " / " + b;
  }
  for (const auto& [n, ns] : free_hidden_groups) {
    auto it = nodes.find(n);
    if (it == nodes.end()) return "free hidden group has unknown node " + n;
    if (it->second.type != NodeType::hidden)
      return "normal node " + n + " in a free hidden group";
    if (!it->second.free()) return "grouped node " + n + " as free hidden";
    if (++placements[n] > 1) return "node " + n + " placed twice";
  }
  for (const auto& [id, rec] : nodes) {
    if (rec.connections.count(id) > 0) return "self connection on " + id;
    for (const auto& g : rec.groups) {
      auto it = s_groups.find(g);
      if (it == s_groups.end()) return "node " + id + " in unknown group " + g;
      if (it->second.members.count(id) == 0)
        return "node " + id + " claims group " + g + " without membership";
    }
    bool placed = placements[id] > 0;
    if (rec.free() && !placed) return "free node " + id + " in no free group";
    if (!rec.free() && placed) return "grouped node " + id + " also free";
    for (const auto& c : rec.connections) {
      auto it = nodes.find(c);
      if (it == nodes.end()) return "connection to unknown node " + c;
      if (it->second.connections.count(id) == 0)
        return "asymmetric connection " + id + " -> " + c;
    }
  }
  if (!std::is_sorted(free_groups.begin(), free_groups.end()))
    return "free groups not canonical";
  return {};
}

std::string AbstractState::to_string() const {
  std::ostringstream os;
  auto put_set = [&os](const NodeSet& s) {
    os << '{';
    bool first = true;
    for (const auto& n : s) {
      if (!first) os << ',';
      first = false;
      os << n;
    }
    os << '}';
  };
  auto put_ns = [&os](const Namespace& ns) {
    os << '{';
    bool first = true;
    for (const auto& [nm, pid] : ns.entries) {
      if (!first) os << ',';
      first = false;
      os << '(' << nm << ',' << sgsim::to_string(pid) << ')';
    }
    os << '}';
  };
  os << "s_groups:";
  for (const auto& [g, grp] : s_groups) {
    os << " (" << g << ',';
    put_set(grp.members);
    os << ',';
    put_ns(grp.ns);
    os << ')';
  }
  os << "\nfree_groups:";
  for (const auto& fg : free_groups) {
    os << " (";
    put_set(fg.members);
    os << ',';
    put_ns(fg.ns);
    os << ')';
  }
  os << "\nfree_hidden_groups:";
  for (const auto& [n, ns] : free_hidden_groups) {
    os << " (" << n << ',';
    put_ns(ns);
    os << ')';
  }
  os << "\nnodes:";
  for (const auto& [id, rec] : nodes) {
    os << " (" << id << ',' << sgsim::to_string(rec.type) << ',';
    put_set(rec.connections);
    os << ',';
    if (rec.free()) {
      os << "NoGroup";
    } else {
      os << '{';
      bool first = true;
      for (const auto& g : rec.groups) {
        if (!first) os << ',';
        first = false;
        os << g;
      }
      os << '}';
    }
    os << ')';
  }
  return os.str();
}

}  // namespace sgsim
