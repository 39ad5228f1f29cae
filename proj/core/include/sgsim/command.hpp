#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sgsim/ids.hpp"

namespace sgsim {

// The fourteen group-library functions, with registered_names split by scope.
enum class Op {
  new_s_group,
  delete_s_group,
  add_nodes,
  remove_nodes,
  register_name,
  re_register_name,
  unregister_name,
  registered_names_node,
  registered_names_group,
  whereis_name,
  send_to_name,
  s_groups,
  own_s_groups,
  own_nodes,
  own_nodes_of,
  info,
};

std::string to_string(Op op);

// One command of a trace: an operation, its arguments, and the node that
// executes it. Unused fields stay empty for a given op.
struct Command {
  Op op = Op::info;
  NodeId at;          // executing node
  GroupName group;
  Name pname;         // registered process name
  Pid pid;
  NodeSet nodes;      // set argument (new/add/remove)
  NodeId target_node; // registered_names_node scope
  std::string payload;  // send_to_name

  friend bool operator==(const Command&, const Command&) = default;
};

// Trace line format: comma-separated fields, sets ';'-joined in sorted
// order, executing node last. Example:
//   new_s_group,g1,n1;n2;n3,n1
std::string format_command(const Command& c);
Command parse_command(const std::string& line);  // throws std::invalid_argument

// Line-delimited trace files; '#' starts a comment line.
std::string format_trace(const std::vector<Command>& cmds);
std::vector<Command> parse_trace(std::istream& in);  // throws ParseError

}  // namespace sgsim
