#include "sgsim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgsim/runtime.hpp"

namespace sgsim {

int DistanceSpec::level(const NodeId& a, const NodeId& b) const {
  if (a == b) return 0;
  auto ia = locations.find(a);
  auto ib = locations.find(b);
  if (ia == locations.end() || ib == locations.end()) return 3;
  if (ia->second.cluster != ib->second.cluster) return 3;
  if (ia->second.host != ib->second.host) return 2;
  return 1;
}

double DistanceSpec::dist(const NodeId& a, const NodeId& b) const {
  return level_weight[static_cast<std::size_t>(level(a, b))];
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

NetworkDescription NetworkDescription::parse(const std::string& text) {
  NetworkDescription out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::string cluster, host;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const std::string& kw = tokens[0];
    if (kw == "cluster") {
      if (tokens.size() != 2) throw ParseError(line_no, "cluster needs a name");
      cluster = tokens[1];
      host.clear();
    } else if (kw == "host") {
      if (tokens.size() != 2) throw ParseError(line_no, "host needs a name");
      if (cluster.empty()) throw ParseError(line_no, "host outside a cluster");
      host = tokens[1];
    } else if (kw == "node") {
      if (tokens.size() < 2) throw ParseError(line_no, "node needs an id");
      if (host.empty()) throw ParseError(line_no, "node outside a host");
      const NodeId id = tokens[1];
      if (out.distances.knows(id))
        throw ParseError(line_no, "duplicate node " + id);
      out.distances.locations[id] = {cluster, host};
      NodeAttrs attrs;
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0)
          throw ParseError(line_no, "expected key=value, got " + tokens[i]);
        std::string key = tokens[i].substr(0, eq);
        std::string value = tokens[i].substr(eq + 1);
        if (key == "labels") {
          std::istringstream ls(value);
          std::string l;
          while (std::getline(ls, l, ','))
            if (!l.empty()) attrs.labels.insert(l);
        } else {
          try {
            std::size_t used = 0;
            double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            attrs.num[key] = v;
          } catch (const std::exception&) {
            throw ParseError(line_no, "bad numeric value for " + key + ": " +
                                          value);
          }
        }
      }
      out.attrs.static_attrs[id] = std::move(attrs);
    } else {
      throw ParseError(line_no, "unknown directive " + kw);
    }
  }
  return out;
}

NetworkDescription NetworkDescription::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimError("cannot open network description " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

std::optional<double> attribute_of(const SimWorld* world,
                                   const AttributeSet& attrs,
                                   const NodeId& node,
                                   const std::string& key) {
  // Dynamic attributes first: recomputed on every query.
  if (world != nullptr && world->has_node(node)) {
    if (key == "process_count" || key == "load") {
      double alive = 0;
      for (const auto* p : world->processes_on(node))
        if (!p->exited) alive += 1;
      return alive;
    }
    const auto& n = world->node(node);
    auto it = n.attrs.find(key);
    if (it != n.attrs.end()) return it->second;
  }
  auto sit = attrs.static_attrs.find(node);
  if (sit != attrs.static_attrs.end()) {
    auto it = sit->second.num.find(key);
    if (it != sit->second.num.end()) return it->second;
  }
  return std::nullopt;
}

namespace {

bool labels_of(const SimWorld* world, const AttributeSet& attrs,
               const NodeId& node, const std::string& label) {
  if (world != nullptr && world->has_node(node) &&
      world->node(node).labels.count(label) > 0)
    return true;
  auto sit = attrs.static_attrs.find(node);
  return sit != attrs.static_attrs.end() && sit->second.labels.count(label) > 0;
}

}  // namespace

std::optional<NodeId> choose_node(const SimWorld* world,
                                  const AttributeSet& attrs,
                                  const DistanceSpec& distances,
                                  const PlacementQuery& query) {
  // Candidate pool: the world's nodes when available, else the static table.
  std::vector<NodeId> candidates;
  if (world != nullptr) {
    candidates = world->node_ids();
  } else {
    for (const auto& [id, a] : attrs.static_attrs) candidates.push_back(id);
  }

  std::vector<NodeId> eligible;
  for (const auto& id : candidates) {
    bool ok = true;
    for (const auto& p : query.require) {
      if (p.kind == Predicate::Kind::has_label) {
        if (!labels_of(world, attrs, id, p.label)) ok = false;
      } else {
        auto v = attribute_of(world, attrs, id, p.attr);
        if (!v) {
          ok = false;
        } else {
          switch (p.kind) {
            case Predicate::Kind::ge: ok = *v >= p.value; break;
            case Predicate::Kind::le: ok = *v <= p.value; break;
            case Predicate::Kind::eq: ok = *v == p.value; break;
            case Predicate::Kind::has_label: break;
          }
        }
      }
      if (!ok) break;
    }
    if (ok) eligible.push_back(id);
  }
  if (eligible.empty()) return std::nullopt;

  // Min-max normalisation per preferred attribute, over the eligible set.
  std::map<std::string, std::pair<double, double>> bounds;
  for (const auto& term : query.prefer) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& id : eligible) {
      auto v = attribute_of(world, attrs, id, term.attr);
      if (!v) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
    bounds[term.attr] = {lo, hi};
  }

  std::optional<NodeId> best;
  double best_score = 0;
  for (const auto& id : eligible) {
    double score = 0;
    for (const auto& term : query.prefer) {
      auto v = attribute_of(world, attrs, id, term.attr);
      if (!v) continue;
      auto [lo, hi] = bounds[term.attr];
      double norm = hi > lo ? (*v - lo) / (hi - lo) : 0.0;
      score += term.weight * norm;
    }
    if (query.near) score -= query.near_weight * distances.dist(id, *query.near);
    // Deterministic argmax: strictly better score wins, ties fall to the
    // smaller node id (eligible is already id-sorted for world pools; sort
    // guarantees it otherwise).
    if (!best || score > best_score) {
      best = id;
      best_score = score;
    }
  }
  return best;
}

}  // namespace sgsim
