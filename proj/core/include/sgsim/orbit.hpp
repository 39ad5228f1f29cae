#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "sgsim/credit.hpp"
#include "sgsim/ids.hpp"
#include "sgsim/metrics.hpp"

namespace sgsim {

// A generator over the vertex space [0..X]: either the affine map
// x -> (a*x + b) mod (X+1) or an explicit table.
struct OrbitGenerator {
  enum class Kind { affine, table };
  Kind kind = Kind::affine;
  std::uint64_t a = 1;
  std::uint64_t b = 0;
  std::vector<std::uint64_t> table;

  std::uint64_t apply(std::uint64_t x, std::uint64_t space) const;
};

struct OrbitSpec {
  std::uint64_t space = 0;  // vertices live in [0..space]
  std::vector<OrbitGenerator> generators;
  std::uint64_t x0 = 0;
  int workers = 1;
  enum class Variant { d, sd } variant = Variant::d;
  int group_size = 4;   // workers per group (sd only)
  int batch_size = 0;   // >1 enables intra-worker child processes

  // Throws SimError("bad_generator...") when a generator leaves the space,
  // or bad_arg-style errors for other malformed fields.
  void validate() const;
};

// Stable vertex-to-worker routing: splitmix64 hash modulo worker count.
int dht_owner(std::uint64_t vertex, int workers);

// Independent reference: sequential worklist closure of {x0} under the
// generators. Ground truth for run_orbit.
std::set<std::uint64_t> orbit_oracle(const OrbitSpec& spec);

// Order-independent digest of a vertex set.
std::uint64_t vertex_set_hash(const std::set<std::uint64_t>& vs);

struct OrbitOutcome {
  std::set<std::uint64_t> vertices;
  bool completed = false;
  Tick end_tick = 0;
  std::uint64_t events = 0;
  std::uint64_t result_hash = 0;
  std::uint64_t total_sent = 0;
  std::uint64_t cross_group_violations = 0;  // sd: traffic off submaster links
  MetricsLog metrics;
};

struct OrbitRunConfig {
  std::uint64_t seed = 1;
  Tick max_ticks = 2'000'000;
  bool check_conservation = true;  // assert pool+in_flight+held == 1 per tick
};

// Builds a fresh world for the given orbit (D: full mesh; SD: isolated
// boot, one group per worker block plus the master/submaster group) and
// runs the computation to credit-detected termination.
OrbitOutcome run_orbit(const OrbitSpec& spec, const OrbitRunConfig& cfg = {});

}  // namespace sgsim
