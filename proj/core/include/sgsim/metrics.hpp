#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sgsim/ids.hpp"

namespace sgsim {

// Command classes, matching the benchmark's workload mix.
enum class OpClass { p2p, global, group, local };

// Per-run counters: message totals per node and per link, operation counts,
// and latency histograms per command class. All counters are cumulative and
// only ever increase during a run.
class MetricsLog {
 public:
  struct NodeCounters {
    std::uint64_t msgs_sent = 0;
    std::uint64_t msgs_delivered = 0;
    std::uint64_t msgs_dropped = 0;
    std::uint64_t global_ops = 0;
    std::uint64_t group_ops = 0;
    std::uint64_t local_ops = 0;
    std::uint64_t p2p_ops = 0;
  };

  using Link = std::pair<NodeId, NodeId>;  // canonical: first < second

  static Link link_of(const NodeId& a, const NodeId& b) {
    return a < b ? Link{a, b} : Link{b, a};
  }

  void count_send(const NodeId& from, const NodeId& to);
  void count_delivery(const NodeId& from, const NodeId& to);
  void count_drop(const NodeId& at);
  void count_heartbeat(const NodeId& a, const NodeId& b,
                       std::uint64_t packets);
  void count_op(const NodeId& at, OpClass cls);
  void record_latency(OpClass cls, Tick latency);

  const NodeCounters& node(const NodeId& id) const;
  std::uint64_t total_sent() const { return total_sent_; }
  std::uint64_t total_delivered() const { return total_delivered_; }
  std::uint64_t total_dropped() const { return total_dropped_; }
  std::uint64_t total_ops(OpClass cls) const;
  // Cross-node packets including heartbeat traffic; the "sent packets"
  // figure of merit for topology comparisons.
  std::uint64_t total_link_packets() const;
  std::uint64_t link_packets(const NodeId& a, const NodeId& b) const;
  // (a, b, packets) per used link, canonical order.
  std::vector<std::tuple<NodeId, NodeId, std::uint64_t>> used_links() const;

  // Median over all recorded latencies of a class; -1 if none recorded.
  Tick median_latency(OpClass cls) const;
  std::uint64_t latency_samples(OpClass cls) const;

  // CSV rows: tick,node,link_peer,msgs_sent,msgs_delivered,global_ops,
  // group_ops,local_ops. Node rows leave link_peer empty; link rows carry
  // per-link packet counts in msgs_sent/msgs_delivered. `tick` is the
  // snapshot tick (the run's final tick).
  void write_csv(std::ostream& out, Tick at_tick) const;

 private:
  struct LinkCounters {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
  };

  std::map<NodeId, NodeCounters> nodes_;
  std::map<Link, LinkCounters> links_;
  std::map<OpClass, std::map<Tick, std::uint64_t>> latency_hist_;
  std::uint64_t total_sent_ = 0;
  std::uint64_t total_delivered_ = 0;
  std::uint64_t total_dropped_ = 0;
  std::uint64_t heartbeat_packets_ = 0;
};

std::string to_string(OpClass cls);

}  // namespace sgsim
