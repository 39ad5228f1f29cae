#pragma once

#include <optional>
#include <vector>

#include "sgsim/ids.hpp"
#include "sgsim/metrics.hpp"
#include "sgsim/smtwtp.hpp"

namespace sgsim {

// Coordination patterns for the multi-colony computation:
//   tl: one master collects all colony reports directly.
//   ml: a level of submasters aggregates colony reports for the master.
//   gr: ml plus supervision with restart, critical names registered in the
//       runtime's global namespace.
//   sr: gr with connections and name registration scoped to groups.
enum class AcoVariant { tl, ml, gr, sr };

std::string to_string(AcoVariant v);
std::optional<AcoVariant> aco_variant_from(const std::string& s);

struct AcoTopology {
  AcoVariant variant = AcoVariant::tl;
  int colonies = 4;      // N_C, one simulated node per colony
  int ants = 8;          // N_A per colony and generation
  int ant_iters = 2;     // I_A constructions per ant
  int global_iters = 6;  // I_M reporting rounds
  int fanout = 4;        // colonies per submaster (ml/gr/sr)
  Tick ant_compute = 0;  // simulated construction time per ant
  PheromoneConfig pheromone;

  void validate() const;  // throws SimError("bad_topology: ...")
  int submasters() const { return (colonies + fanout - 1) / fanout; }
};

struct AcoRunConfig {
  std::uint64_t seed = 1;
  Tick max_ticks = 200'000;
  Tick chaos_period = 0;  // 0 = no fault injection
  std::uint64_t chaos_seed = 7;
  Tick heartbeat_period = 0;
  Tick restart_delay = 10;
};

struct AcoOutcome {
  Schedule best;
  bool completed = false;  // false = tick budget exhausted (stall/deadlock)
  Tick end_tick = 0;
  std::vector<double> round_bests;  // reported best per finished round
  std::uint64_t total_sent = 0;
  std::uint64_t total_link_packets = 0;
  std::uint64_t chaos_kills = 0;
  std::uint64_t restarts = 0;
  // Every name registered for reliability resolves to a live pid once the
  // run is over.
  bool names_resolve = true;
  std::size_t links = 0;
  MetricsLog metrics;
};

// Builds a fresh world (one node per colony; gr/ml/tl boot as a full mesh,
// sr boots isolated and forms groups) and runs I_M rounds.
AcoOutcome run_aco(const SmtwtpInstance& inst, const AcoTopology& topo,
                   const AcoRunConfig& cfg = {});

}  // namespace sgsim
