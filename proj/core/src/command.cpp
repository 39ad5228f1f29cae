#include "sgsim/command.hpp"

#include <array>
#include <istream>
#include <sstream>

namespace sgsim {
namespace {

struct OpName {
  Op op;
  const char* name;
};

constexpr std::array<OpName, 16> kOpNames{{
    {Op::new_s_group, "new_s_group"},
    {Op::delete_s_group, "delete_s_group"},
    {Op::add_nodes, "add_nodes"},
    {Op::remove_nodes, "remove_nodes"},
    {Op::register_name, "register_name"},
    {Op::re_register_name, "re_register_name"},
    {Op::unregister_name, "unregister_name"},
    {Op::registered_names_node, "registered_names_node"},
    {Op::registered_names_group, "registered_names_group"},
    {Op::whereis_name, "whereis_name"},
    {Op::send_to_name, "send"},
    {Op::s_groups, "s_groups"},
    {Op::own_s_groups, "own_s_groups"},
    {Op::own_nodes, "own_nodes"},
    {Op::own_nodes_of, "own_nodes_of"},
    {Op::info, "info"},
}};

Op op_from_string(const std::string& s) {
  for (const auto& e : kOpNames)
    if (s == e.name) return e.op;
  throw std::invalid_argument("unknown operation: " + s);
}

std::string set_field(const NodeSet& s) {
  std::string out;
  for (const auto& n : s) {
    if (!out.empty()) out += ';';
    out += n;
  }
  return out;
}

NodeSet parse_set_field(const std::string& f) {
  NodeSet out;
  std::string cur;
  std::istringstream is(f);
  while (std::getline(is, cur, ';'))
    if (!cur.empty()) out.insert(cur);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

std::string to_string(Op op) {
  for (const auto& e : kOpNames)
    if (op == e.op) return e.name;
  return "?";
}

std::string format_command(const Command& c) {
  std::string out = to_string(c.op);
  auto add = [&out](const std::string& f) {
    out += ',';
    out += f;
  };
  switch (c.op) {
    case Op::new_s_group:
    case Op::add_nodes:
    case Op::remove_nodes:
      add(c.group);
      add(set_field(c.nodes));
      break;
    case Op::delete_s_group:
    case Op::own_nodes_of:
    case Op::registered_names_group:
      add(c.group);
      break;
    case Op::register_name:
    case Op::re_register_name:
      add(c.group);
      add(c.pname);
      add(to_string(c.pid));
      break;
    case Op::unregister_name:
    case Op::whereis_name:
      add(c.group);
      add(c.pname);
      break;
    case Op::send_to_name:
      add(c.group);
      add(c.pname);
      add(c.payload);
      break;
    case Op::registered_names_node:
      add(c.target_node);
      break;
    case Op::s_groups:
    case Op::own_s_groups:
    case Op::own_nodes:
    case Op::info:
      break;
  }
  add(c.at);
  return out;
}

Command parse_command(const std::string& line) {
  auto fields = split_fields(line);
  if (fields.empty()) throw std::invalid_argument("empty command line");
  Command c;
  c.op = op_from_string(fields[0]);
  auto expect = [&](std::size_t n) {
    if (fields.size() != n + 1)
      throw std::invalid_argument("wrong field count for " + fields[0] +
                                  ": " + line);
  };
  switch (c.op) {
    case Op::new_s_group:
    case Op::add_nodes:
    case Op::remove_nodes:
      expect(3);
      c.group = fields[1];
      c.nodes = parse_set_field(fields[2]);
      c.at = fields[3];
      break;
    case Op::delete_s_group:
    case Op::own_nodes_of:
    case Op::registered_names_group:
      expect(2);
      c.group = fields[1];
      c.at = fields[2];
      break;
    case Op::register_name:
    case Op::re_register_name:
      expect(4);
      c.group = fields[1];
      c.pname = fields[2];
      c.pid = parse_pid(fields[3]);
      c.at = fields[4];
      break;
    case Op::unregister_name:
    case Op::whereis_name:
      expect(3);
      c.group = fields[1];
      c.pname = fields[2];
      c.at = fields[3];
      break;
    case Op::send_to_name:
      expect(4);
      c.group = fields[1];
      c.pname = fields[2];
      c.payload = fields[3];
      c.at = fields[4];
      break;
    case Op::registered_names_node:
      expect(2);
      c.target_node = fields[1];
      c.at = fields[2];
      break;
    case Op::s_groups:
    case Op::own_s_groups:
    case Op::own_nodes:
    case Op::info:
      expect(1);
      c.at = fields[1];
      break;
  }
  return c;
}

std::string format_trace(const std::vector<Command>& cmds) {
  std::string out;
  for (const auto& c : cmds) {
    out += format_command(c);
    out += '\n';
  }
  return out;
}

std::vector<Command> parse_trace(std::istream& in) {
  std::vector<Command> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_command(line));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace sgsim
