#pragma once

#include "sgsim/abstract_state.hpp"
#include "sgsim/command.hpp"
#include "sgsim/value.hpp"

namespace sgsim {

// Executable operational semantics of the group commands. Transitions have
// the shape (state, command) -> (state', value) where the command carries
// its executing node; every transition is total and never throws.
//
// This module is the oracle: the concrete layer in sgroup_layer.hpp must
// produce equal values and an equal normalised state after every command.
//
// Rules not fixed by the semantics figure are pinned here:
//   - Group existence/uniqueness is system-wide; duplicate creation fails
//     with already_exists regardless of where it executes.
//   - delete_s_group, unregister_name, register_name and re_register_name
//     may execute on any node; add_nodes/remove_nodes require membership.
//   - Name reads (whereis, send, registered_names of a group, own_nodes of
//     a group) are member-scoped: a node outside the group sees nothing.
//   - Error precedence: structural argument checks (bad_arg), then group
//     lookup, then membership of the executing node, then node lookups.
//   - When nodes revert to free, each connected component of free normal
//     nodes merges into one free group and becomes fully meshed, keeping
//     free-node connection sets transitively closed.
struct Transition {
  AbstractState state;
  Value value;
};

Transition apply(const AbstractState& state, const Command& cmd);

// In-place variant, returns just the value.
Value apply_inplace(AbstractState& state, const Command& cmd);

}  // namespace sgsim
