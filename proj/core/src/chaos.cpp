#include "sgsim/chaos.hpp"

#include <memory>

namespace sgsim {

bool ChaosPolicy::excludes(const std::string& tag) const {
  for (const auto& prefix : exclude_tag_prefixes)
    if (tag.rfind(prefix, 0) == 0) return true;
  return false;
}

namespace {

struct NodeMonkey {
  NodeId node;
  ChaosPolicy policy;
  std::shared_ptr<DetRng> rng;
  std::shared_ptr<ChaosStats> stats;

  void fire(SimWorld& world) const {
    std::vector<Pid> eligible;
    for (const auto* p : world.processes_on(node))
      if (!p->exited && p->started && !policy.excludes(p->tag))
        eligible.push_back(p->pid);
    if (eligible.empty()) {
      stats->idle_periods++;
    } else {
      const Pid victim = eligible[rng->below(eligible.size())];
      world.kill(victim, ExitReason::chaos);
      stats->kills++;
    }
    NodeMonkey next = *this;
    world.schedule(world.now() + policy.period,
                   [next](SimWorld& w) { next.fire(w); });
  }
};

}  // namespace

std::shared_ptr<ChaosStats> install_chaos(SimWorld& world,
                                          const ChaosPolicy& policy) {
  if (policy.period < 1) throw SimError("chaos period must be >= 1");
  auto stats = std::make_shared<ChaosStats>();
  std::vector<NodeId> nodes;
  if (policy.scope) {
    for (const auto& n : *policy.scope)
      if (world.has_node(n)) nodes.push_back(n);
  } else {
    nodes = world.node_ids();
  }
  for (const auto& n : nodes) {
    NodeMonkey monkey{n, policy,
                      std::make_shared<DetRng>(
                          hash_combine(policy.seed, stable_str_hash(n))),
                      stats};
    world.schedule(world.now() + policy.period,
                   [monkey](SimWorld& w) { monkey.fire(w); });
  }
  return stats;
}

}  // namespace sgsim
