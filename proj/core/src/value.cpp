#include "sgsim/value.hpp"

#include <sstream>

namespace sgsim {
namespace {

template <typename Range, typename Fn>
std::string join(const Range& r, const char* sep, Fn fn) {
  std::string out;
  bool first = true;
  for (const auto& x : r) {
    if (!first) out += sep;
    first = false;
    out += fn(x);
  }
  return out;
}

std::string node_set(const NodeSet& s) {
  return "{" + join(s, ",", [](const NodeId& n) { return n; }) + "}";
}

}  // namespace

std::string to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::already_exists: return "already_exists";
    case ErrorCode::bad_arg: return "bad_arg";
    case ErrorCode::no_node: return "no_node";
    case ErrorCode::no_group: return "no_group";
    case ErrorCode::not_member: return "not_member";
    case ErrorCode::no_node_in_group: return "no_node_in_group";
    case ErrorCode::badarg: return "badarg";
  }
  return "?";
}

std::string to_string(const Value& v) {
  struct Printer {
    std::string operator()(const Ok&) const { return "ok"; }
    std::string operator()(const Undefined&) const { return "undefined"; }
    std::string operator()(const Error& e) const {
      return "error(" + to_string(e.code) + ")";
    }
    std::string operator()(YesNo yn) const {
      return yn == YesNo::yes ? "yes" : "no";
    }
    std::string operator()(const GroupCreated& g) const {
      return "(" + g.name + "," + node_set(g.nodes) + ")";
    }
    std::string operator()(const NodeList& nl) const {
      return node_set(nl.nodes);
    }
    std::string operator()(const PidValue& p) const { return to_string(p.pid); }
    std::string operator()(const NamePairs& np) const {
      return "{" +
             join(np.entries, ",",
                  [](const std::pair<GroupName, Name>& e) {
                    return "(" + e.first + "," + e.second + ")";
                  }) +
             "}";
    }
    std::string operator()(const GroupNames& gn) const {
      return "{" + join(gn.names, ",", [](const GroupName& g) { return g; }) +
             "}";
    }
    std::string operator()(const OwnGroups& og) const {
      return "{" +
             join(og.groups, ",",
                  [](const std::pair<const GroupName, NodeSet>& g) {
                    return "(" + g.first + "," + node_set(g.second) + ")";
                  }) +
             "}";
    }
    std::string operator()(const InfoValue& iv) const {
      std::ostringstream os;
      os << "info(" << iv.node << "," << to_string(iv.type) << ","
         << (iv.free ? "free" : "grouped") << ",groups={"
         << join(iv.groups, ",",
                 [](const std::pair<const GroupName, NodeSet>& g) {
                   return g.first + "=" + node_set(g.second);
                 })
         << "},conn=" << node_set(iv.connections) << ")";
      return os.str();
    }
  };
  return std::visit(Printer{}, v);
}

}  // namespace sgsim
