#include "sgsim/ids.hpp"

#include <cstdlib>

namespace sgsim {

std::string to_string(NodeType t) {
  return t == NodeType::normal ? "normal" : "hidden";
}

std::string to_string(const Pid& p) {
  return "p" + std::to_string(p.serial) + "@" + p.node;
}

Pid parse_pid(const std::string& text) {
  if (text.size() < 4 || text[0] != 'p')
    throw std::invalid_argument("bad pid literal: " + text);
  auto at = text.find('@');
  if (at == std::string::npos || at == 1 || at + 1 == text.size())
    throw std::invalid_argument("bad pid literal: " + text);
  Pid p;
  p.node = text.substr(at + 1);
  char* end = nullptr;
  p.serial = std::strtoull(text.c_str() + 1, &end, 10);
  if (end != text.c_str() + at)
    throw std::invalid_argument("bad pid serial: " + text);
  return p;
}

}  // namespace sgsim
