#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace sgsim {

using NodeId = std::string;
using GroupName = std::string;
using Name = std::string;
using Tick = std::int64_t;

enum class NodeType { normal, hidden };

std::string to_string(NodeType t);

// Process identifier. Carries its home node, like a real distributed pid;
// serials are unique world-wide so pids are totally ordered.
struct Pid {
  NodeId node;
  std::uint64_t serial = 0;

  friend bool operator==(const Pid&, const Pid&) = default;
  friend auto operator<=>(const Pid& a, const Pid& b) {
    if (auto c = a.serial <=> b.serial; c != 0) return c;
    return a.node <=> b.node;
  }
};

// Textual form "p<serial>@<node>", used in traces and diagnostics.
std::string to_string(const Pid& p);
Pid parse_pid(const std::string& text);  // throws std::invalid_argument

using NodeSet = std::set<NodeId>;

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File-format errors carry the offending line.
struct ParseError : SimError {
  ParseError(int line_no, const std::string& what)
      : SimError("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
  int line;
};

}  // namespace sgsim
