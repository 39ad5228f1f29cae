#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>

#include "sgsim/ids.hpp"

namespace sgsim {

// Error codes returned by group commands. Commands never abort: an illegal
// command leaves the state unchanged and returns one of these.
enum class ErrorCode {
  already_exists,
  bad_arg,
  no_node,
  no_group,
  not_member,
  no_node_in_group,
  badarg,
};

std::string to_string(ErrorCode c);

struct Ok {
  friend bool operator==(const Ok&, const Ok&) = default;
};

struct Undefined {
  friend bool operator==(const Undefined&, const Undefined&) = default;
};

struct Error {
  ErrorCode code;
  friend bool operator==(const Error&, const Error&) = default;
};

enum class YesNo { yes, no };

struct GroupCreated {
  GroupName name;
  NodeSet nodes;
  friend bool operator==(const GroupCreated&, const GroupCreated&) = default;
};

struct NodeList {
  NodeSet nodes;
  friend bool operator==(const NodeList&, const NodeList&) = default;
};

struct PidValue {
  Pid pid;
  friend bool operator==(const PidValue&, const PidValue&) = default;
};

// (group, name) pairs, as returned by registered_names.
struct NamePairs {
  std::set<std::pair<GroupName, Name>> entries;
  friend bool operator==(const NamePairs&, const NamePairs&) = default;
};

struct GroupNames {
  std::set<GroupName> names;
  friend bool operator==(const GroupNames&, const GroupNames&) = default;
};

// (group, members) tuples, as returned by own_s_groups.
struct OwnGroups {
  std::map<GroupName, NodeSet> groups;
  friend bool operator==(const OwnGroups&, const OwnGroups&) = default;
};

// Snapshot returned by info: what the executing node knows about itself.
struct InfoValue {
  NodeId node;
  NodeType type = NodeType::normal;
  bool free = true;
  std::map<GroupName, NodeSet> groups;
  NodeSet connections;
  friend bool operator==(const InfoValue&, const InfoValue&) = default;
};

// Result of any group command. Both the abstract semantics and the concrete
// layer return this type; lockstep testing compares them for exact equality.
using Value = std::variant<Ok, Error, YesNo, GroupCreated, NodeList, PidValue,
                           Undefined, NamePairs, GroupNames, OwnGroups,
                           InfoValue>;

std::string to_string(const Value& v);

}  // namespace sgsim
