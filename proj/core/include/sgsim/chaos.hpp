#pragma once

#include <optional>
#include <set>
#include <string>

#include "sgsim/ids.hpp"
#include "sgsim/runtime.hpp"

namespace sgsim {

// Chaos monkey: on every in-scope node, kills one uniformly chosen alive
// process every `period` ticks. Victims are drawn with the policy's own
// seeded stream, so a (seed, world) pair always produces the same kill
// sequence.
struct ChaosPolicy {
  Tick period = 1000;
  std::uint64_t seed = 0;
  // Nodes the monkey runs on; empty set = no monkey anywhere. nullopt = all
  // nodes of the world.
  std::optional<NodeSet> scope;
  // Processes whose tag starts with one of these prefixes are never killed
  // (e.g. the workload's root master).
  std::set<std::string> exclude_tag_prefixes;

  bool excludes(const std::string& tag) const;
};

struct ChaosStats {
  std::uint64_t kills = 0;
  std::uint64_t idle_periods = 0;  // periods with no eligible victim
};

// Schedules the kill events. Returns a stats handle that stays valid for
// the lifetime of the world.
std::shared_ptr<ChaosStats> install_chaos(SimWorld& world,
                                          const ChaosPolicy& policy);

}  // namespace sgsim
