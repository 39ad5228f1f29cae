#include "sgsim/metrics.hpp"

#include <ostream>

namespace sgsim {

void MetricsLog::count_send(const NodeId& from, const NodeId& to) {
  nodes_[from].msgs_sent++;
  total_sent_++;
  if (from != to) links_[link_of(from, to)].sent++;
}

void MetricsLog::count_delivery(const NodeId& from, const NodeId& to) {
  nodes_[to].msgs_delivered++;
  total_delivered_++;
  if (from != to) links_[link_of(from, to)].delivered++;
}

void MetricsLog::count_drop(const NodeId& at) {
  nodes_[at].msgs_dropped++;
  total_dropped_++;
}

void MetricsLog::count_heartbeat(const NodeId& a, const NodeId& b,
                                 std::uint64_t packets) {
  // Connection maintenance traffic; kept out of msgs_sent so that
  // sent = delivered + dropped holds for payload messages.
  links_[link_of(a, b)].sent += packets;
  heartbeat_packets_ += packets;
}

void MetricsLog::count_op(const NodeId& at, OpClass cls) {
  auto& n = nodes_[at];
  switch (cls) {
    case OpClass::p2p: n.p2p_ops++; break;
    case OpClass::global: n.global_ops++; break;
    case OpClass::group: n.group_ops++; break;
    case OpClass::local: n.local_ops++; break;
  }
}

void MetricsLog::record_latency(OpClass cls, Tick latency) {
  latency_hist_[cls][latency]++;
}

const MetricsLog::NodeCounters& MetricsLog::node(const NodeId& id) const {
  static const NodeCounters kEmpty{};
  auto it = nodes_.find(id);
  return it == nodes_.end() ? kEmpty : it->second;
}

std::uint64_t MetricsLog::total_ops(OpClass cls) const {
  std::uint64_t total = 0;
  for (const auto& [id, n] : nodes_) {
    switch (cls) {
      case OpClass::p2p: total += n.p2p_ops; break;
      case OpClass::global: total += n.global_ops; break;
      case OpClass::group: total += n.group_ops; break;
      case OpClass::local: total += n.local_ops; break;
    }
  }
  return total;
}

std::uint64_t MetricsLog::total_link_packets() const {
  std::uint64_t total = 0;
  for (const auto& [link, c] : links_) total += c.sent;
  return total;
}

std::uint64_t MetricsLog::link_packets(const NodeId& a,
                                       const NodeId& b) const {
  auto it = links_.find(link_of(a, b));
  return it == links_.end() ? 0 : it->second.sent;
}

std::vector<std::tuple<NodeId, NodeId, std::uint64_t>> MetricsLog::used_links()
    const {
  std::vector<std::tuple<NodeId, NodeId, std::uint64_t>> out;
  for (const auto& [link, c] : links_)
    if (c.sent > 0) out.emplace_back(link.first, link.second, c.sent);
  return out;
}

Tick MetricsLog::median_latency(OpClass cls) const {
  auto it = latency_hist_.find(cls);
  if (it == latency_hist_.end() || it->second.empty()) return -1;
  std::uint64_t total = 0;
  for (const auto& [lat, count] : it->second) total += count;
  std::uint64_t half = (total + 1) / 2;
  std::uint64_t seen = 0;
  for (const auto& [lat, count] : it->second) {
    seen += count;
    if (seen >= half) return lat;
  }
  return -1;
}

std::uint64_t MetricsLog::latency_samples(OpClass cls) const {
  auto it = latency_hist_.find(cls);
  if (it == latency_hist_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& [lat, count] : it->second) total += count;
  return total;
}

void MetricsLog::write_csv(std::ostream& out, Tick at_tick) const {
  out << "tick,node,link_peer,msgs_sent,msgs_delivered,global_ops,group_ops,"
         "local_ops\n";
  for (const auto& [id, n] : nodes_) {
    out << at_tick << ',' << id << ",," << n.msgs_sent << ','
        << n.msgs_delivered << ',' << n.global_ops << ',' << n.group_ops
        << ',' << n.local_ops << '\n';
  }
  for (const auto& [link, c] : links_) {
    out << at_tick << ',' << link.first << ',' << link.second << ',' << c.sent
        << ',' << c.delivered << ",0,0,0\n";
  }
}

std::string to_string(OpClass cls) {
  switch (cls) {
    case OpClass::p2p: return "p2p";
    case OpClass::global: return "global";
    case OpClass::group: return "group";
    case OpClass::local: return "local";
  }
  return "?";
}

}  // namespace sgsim
