#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgsim/ids.hpp"

namespace sgsim {

// Replicated name table of one group: name -> pid, names unique by map
// construction, pid uniqueness enforced by the register rules.
struct Namespace {
  std::map<Name, Pid> entries;

  bool has_pid(const Pid& p) const;
  std::optional<Name> name_of(const Pid& p) const;
  // Drops every entry whose pid lives on one of the given nodes.
  void drop_nodes(const NodeSet& nodes);

  friend bool operator==(const Namespace&, const Namespace&) = default;
  friend auto operator<=>(const Namespace&, const Namespace&) = default;
};

struct SGroup {
  NodeSet members;
  Namespace ns;
  friend bool operator==(const SGroup&, const SGroup&) = default;
};

// A maximal set of interconnected free normal nodes. Free groups have no
// name; they are identified by their member set.
struct FreeGroup {
  NodeSet members;
  Namespace ns;
  friend bool operator==(const FreeGroup&, const FreeGroup&) = default;
  friend auto operator<=>(const FreeGroup&, const FreeGroup&) = default;
};

// group_names: empty set encodes NoGroup (the node is free).
struct NodeRecord {
  NodeType type = NodeType::normal;
  NodeSet connections;
  std::set<GroupName> groups;

  bool free() const { return groups.empty(); }
  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

// The four-tuple system state: named groups, free groups, free hidden
// groups (one node each), and the node records. All containers are ordered,
// so equality is structural and states print canonically.
struct AbstractState {
  std::map<GroupName, SGroup> s_groups;
  std::vector<FreeGroup> free_groups;  // kept sorted by member set
  std::map<NodeId, Namespace> free_hidden_groups;
  std::map<NodeId, NodeRecord> nodes;

  friend bool operator==(const AbstractState&, const AbstractState&) = default;

  // Roster boot: normal nodes form one fully meshed free group (as if each
  // started connected to a seed), hidden nodes start isolated.
  struct RosterEntry {
    NodeId id;
    NodeType type = NodeType::normal;
  };
  static AbstractState boot(const std::vector<RosterEntry>& roster);

  // Returns a description of the first violated well-formedness condition,
  // or an empty string when the state is well formed.
  std::string check_invariants() const;

  // Restores the free_groups sort order after in-place edits.
  void canonicalize();

  std::string to_string() const;
};

}  // namespace sgsim
