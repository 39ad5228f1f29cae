#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "sgsim/ids.hpp"
#include "sgsim/metrics.hpp"
#include "sgsim/runtime.hpp"

namespace sgsim {

// Workload mix issued by every peer: point-to-point calls, global
// (namespace-synchronising) commands, and purely local lookups.
struct CommandMix {
  double p2p = 1.0;
  double global = 0.0;
  double local = 0.0;
  int payload_size = 16;

  void validate() const;  // fractions within [0,1], summing to 1
};

struct MixTopology {
  enum class Kind { mesh, sgroups };
  Kind kind = Kind::mesh;
  int group_size = 10;  // sgroups: block size, gateways form a ring
};

struct MixConfig {
  int nodes = 10;
  CommandMix mix;
  MixTopology topology;
  Tick ticks = 150'000;
  std::uint64_t seed = 1;
  Tick name_service_cost = 10;
  // Optional network description: its level distances feed the latency
  // model (nodes n1..nN; ids absent from the file count as inter-cluster).
  std::string network_file;
};

struct MixResult {
  int nodes = 0;
  std::string topology;
  Tick ticks = 0;
  std::uint64_t completed_p2p = 0;
  std::uint64_t completed_global = 0;
  std::uint64_t completed_local = 0;
  std::uint64_t completed_total = 0;
  double throughput = 0;  // completed commands per tick
  Tick median_latency_p2p = -1;
  Tick median_latency_global = -1;
  Tick median_latency_local = -1;
  std::size_t links_boot = 0;
  std::size_t links_end = 0;
  std::uint64_t msgs_total = 0;
  std::uint64_t trace_hash = 0;
  MetricsLog metrics;
};

// Peers issue commands back to back (one per wake-up); a global command
// acquires the namespace lock (cluster-wide on a mesh, per group under
// sgroups), runs a synchronisation round over its peers, and only then
// completes. Throughput is completed commands per tick.
MixResult run_mix(const MixConfig& cfg);

// Boot-time topology for census and mix runs. sgroups boots isolated
// nodes, forms blocks of group_size, and joins consecutive block gateways
// into a ring.
std::unique_ptr<SimWorld> build_mix_world(int nodes,
                                          const MixTopology& topology,
                                          WorldConfig wc);

struct CensusRow {
  int nodes = 0;
  std::string topology;
  std::size_t links = 0;
  std::size_t expected = 0;
};

std::size_t expected_mesh_links(int nodes);
std::size_t expected_sgroup_links(int nodes, int group_size);
CensusRow census(int nodes, const MixTopology& topology);

void write_mix_csv(std::ostream& out, const std::vector<MixResult>& rows);
void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows);

}  // namespace sgsim
