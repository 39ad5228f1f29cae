#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgsim/ids.hpp"

namespace sgsim {

class SimWorld;

// Static per-node attributes loaded from the network description. Dynamic
// attributes (load, process_count) are never stored; they are computed from
// the world each time they are queried.
struct NodeAttrs {
  std::map<std::string, double> num;
  std::set<std::string> labels;
};

struct AttributeSet {
  std::map<NodeId, NodeAttrs> static_attrs;
};

// Communication distances derived from the cluster > host > node hierarchy.
// Level 0: same node, 1: same host, 2: same cluster, 3: across clusters.
// The per-level weights are configurable; the level metric keeps dist
// symmetric, dist(a,a)=0, and satisfies the triangle inequality as long as
// the weights are monotone.
struct DistanceSpec {
  struct Location {
    std::string cluster;
    std::string host;
  };
  std::map<NodeId, Location> locations;
  std::array<double, 4> level_weight{0, 1, 2, 3};

  int level(const NodeId& a, const NodeId& b) const;
  double dist(const NodeId& a, const NodeId& b) const;
  bool knows(const NodeId& n) const { return locations.count(n) > 0; }
};

// Parsed network description file. Grammar (one directive per line,
// '#' comments, indentation not significant):
//
//   cluster <name>
//   host <name>
//   node <id> [key=value]... [labels=a,b,c]
//
// A node line attaches to the most recent host, which attaches to the most
// recent cluster. Numeric key=value pairs become static attributes.
struct NetworkDescription {
  AttributeSet attrs;
  DistanceSpec distances;

  static NetworkDescription parse(const std::string& text);  // throws ParseError
  static NetworkDescription load(const std::string& path);   // throws
};

// Node choice query: hard predicates then a weighted score
//   score = sum_i w_i * minmax(attr_i) - near_weight * dist(candidate, near)
// where minmax normalises over the surviving candidates. Ties break on the
// smallest node id, making the choice a pure function of its inputs.
struct Predicate {
  enum class Kind { ge, le, eq, has_label };
  std::string attr;
  Kind kind = Kind::ge;
  double value = 0;
  std::string label;
};

struct WeightTerm {
  std::string attr;
  double weight = 1.0;
};

struct PlacementQuery {
  std::vector<Predicate> require;
  std::vector<WeightTerm> prefer;
  std::optional<NodeId> near;
  double near_weight = 1.0;
};

// Resolves an attribute for a candidate: dynamic attributes from the world
// when available, otherwise the static table. Unknown attributes are absent.
std::optional<double> attribute_of(const SimWorld* world,
                                   const AttributeSet& attrs,
                                   const NodeId& node, const std::string& key);

// Returns the chosen node, or nullopt when no candidate satisfies every
// predicate. `world` may be null when only static attributes are in play.
std::optional<NodeId> choose_node(const SimWorld* world,
                                  const AttributeSet& attrs,
                                  const DistanceSpec& distances,
                                  const PlacementQuery& query);

}  // namespace sgsim
