#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgsim/abstract_state.hpp"
#include "sgsim/command.hpp"
#include "sgsim/runtime.hpp"
#include "sgsim/value.hpp"

namespace sgsim {

// One generated test case: a node roster, a pool of pre-spawned pids, and a
// command sequence whose arguments reference the roster.
struct CommandCase {
  std::uint64_t seed = 0;
  std::vector<AbstractState::RosterEntry> roster;
  std::vector<Command> commands;

  // Three pids per node, fixed at boot in both models.
  std::vector<Pid> pid_pool() const;

  std::string to_trace() const;  // replayable: '#' header plus command lines
  static CommandCase from_trace(std::istream& in);  // throws ParseError
};

struct CaseBounds {
  int min_nodes = 3;
  int max_nodes = 8;
  int max_hidden = 2;
  int min_commands = 1;
  int max_commands = 30;
};

// Weighted random command sequence over the group operations. Argument
// generation is eligibility-aware (it prefers existing groups, members,
// pids on member nodes) but deliberately produces invalid calls too, so
// error paths are exercised.
CommandCase generate_case(std::uint64_t seed, const CaseBounds& bounds = {});

// Gathers the per-node replicas of the concrete world, merges them, and
// normalises into the abstract state shape. Free groups are reconstructed
// as connection components of free normal nodes; replica disagreements are
// reported in `anomalies`.
struct Normalized {
  AbstractState state;
  std::vector<std::string> anomalies;
};
Normalized normalize(const SimWorld& world);

// Fault switches for mutation tests of the harness itself.
struct LockstepFaults {
  // Reintroduces the classic library bug: remove_nodes raises instead of
  // returning an error when asked to remove a non-member.
  bool remove_nodes_abort_on_nonmember = false;
};

struct LockstepOutcome {
  bool pass = true;
  std::size_t failed_index = 0;  // index into commands when !pass
  std::string reason;
  Value abstract_value;
  Value concrete_value;
  // Shortest failing prefix (with reduced set arguments) when !pass.
  std::optional<CommandCase> counterexample;
};

// Runs the case against both models in lockstep: after every command the
// return values must be equal and normalize(world) must equal the abstract
// state. On failure the counterexample is minimised by prefix truncation
// and set-argument reduction.
LockstepOutcome run_lockstep(const CommandCase& c,
                             const LockstepFaults& faults = {},
                             bool minimise = true);

}  // namespace sgsim
