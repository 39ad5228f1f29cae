#include "sgsim/mbt.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "sgsim/abstract_semantics.hpp"
#include "sgsim/det_rng.hpp"
#include "sgsim/sgroup_layer.hpp"

namespace sgsim {

namespace {

constexpr int kPidsPerNode = 3;

NodeId roster_node(int i) { return "n" + std::to_string(i + 1); }

struct IdleBehaviour : Behaviour {};

// Boots the concrete world for a case: roster nodes (normals meshed,
// hidden isolated by type-aware connect policy) and the fixed pid pool.
std::unique_ptr<SimWorld> make_world(const CommandCase& c) {
  BootSpec boot;
  for (const auto& r : c.roster)
    boot.nodes.push_back({r.id, r.type, {}, {}});
  boot.connect = BootSpec::Connect::mesh;
  WorldConfig wc;
  wc.seed = c.seed;
  auto world = std::make_unique<SimWorld>(boot, wc);
  for (const auto& r : c.roster)
    for (int k = 0; k < kPidsPerNode; ++k)
      world->spawn(r.id, ProcessSpec{"mbt.proc", [] {
                     return std::make_unique<IdleBehaviour>();
                   }});
  world->run_until(2);  // let the spawns start
  return world;
}

}  // namespace

std::vector<Pid> CommandCase::pid_pool() const {
  // Serials follow the deterministic spawn order of make_world.
  std::vector<Pid> out;
  std::uint64_t serial = 1;
  for (const auto& r : roster)
    for (int k = 0; k < kPidsPerNode; ++k) out.push_back(Pid{r.id, serial++});
  return out;
}

std::string CommandCase::to_trace() const {
  std::ostringstream os;
  os << "# seed " << seed << "\n# roster";
  for (const auto& r : roster)
    os << ' ' << r.id << (r.type == NodeType::hidden ? ":hidden" : "");
  os << '\n' << format_trace(commands);
  return os.str();
}

CommandCase CommandCase::from_trace(std::istream& in) {
  CommandCase out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# seed ", 0) == 0) {
        out.seed = std::strtoull(line.c_str() + 7, nullptr, 10);
      } else if (line.rfind("# roster", 0) == 0) {
        std::istringstream rs(line.substr(8));
        std::string tok;
        while (rs >> tok) {
          auto colon = tok.find(':');
          AbstractState::RosterEntry e;
          e.id = tok.substr(0, colon);
          e.type =
              colon != std::string::npos && tok.substr(colon + 1) == "hidden"
                  ? NodeType::hidden
                  : NodeType::normal;
          out.roster.push_back(e);
        }
      }
      continue;
    }
    try {
      out.commands.push_back(parse_command(line));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (out.roster.empty()) throw ParseError(line_no, "missing roster header");
  return out;
}

CommandCase generate_case(std::uint64_t seed, const CaseBounds& bounds) {
  DetRng rng(hash_combine(seed, 0x6b7));
  CommandCase c;
  c.seed = seed;

  int node_count =
      static_cast<int>(rng.range(bounds.min_nodes, bounds.max_nodes));
  int hidden = static_cast<int>(
      rng.range(0, std::min(bounds.max_hidden, node_count - 1)));
  for (int i = 0; i < node_count; ++i) {
    AbstractState::RosterEntry e;
    e.id = roster_node(i);
    e.type = i >= node_count - hidden ? NodeType::hidden : NodeType::normal;
    c.roster.push_back(e);
  }

  const std::vector<GroupName> group_pool{"g1", "g2", "g3", "g4"};
  const std::vector<Name> name_pool{"a", "b", "srv", "x", "y"};
  auto pids = c.pid_pool();

  // Groups created so far, for eligibility-aware argument choices. This is
  // only a heuristic mirror of the state; invalid references still occur.
  std::set<GroupName> live_groups;
  std::map<GroupName, NodeSet> members;

  auto any_node = [&] {
    return c.roster[rng.below(c.roster.size())].id;
  };
  auto node_subset = [&](std::size_t max_size) {
    NodeSet out;
    std::size_t want = 1 + rng.below(max_size);
    for (std::size_t i = 0; i < want; ++i) out.insert(any_node());
    return out;
  };
  auto known_group = [&]() -> GroupName {
    if (!live_groups.empty() && rng.chance(0.75)) {
      auto it = live_groups.begin();
      std::advance(it, static_cast<long>(rng.below(live_groups.size())));
      return *it;
    }
    return group_pool[rng.below(group_pool.size())];
  };

  int command_count =
      static_cast<int>(rng.range(bounds.min_commands, bounds.max_commands));
  for (int i = 0; i < command_count; ++i) {
    // Weighted op choice; mutating commands dominate so states keep moving.
    static const std::vector<std::pair<Op, int>> weights{
        {Op::new_s_group, 4},       {Op::delete_s_group, 1},
        {Op::add_nodes, 2},         {Op::remove_nodes, 2},
        {Op::register_name, 4},     {Op::re_register_name, 1},
        {Op::unregister_name, 1},   {Op::registered_names_node, 1},
        {Op::registered_names_group, 1}, {Op::whereis_name, 2},
        {Op::send_to_name, 1},      {Op::s_groups, 1},
        {Op::own_s_groups, 1},      {Op::own_nodes, 1},
        {Op::own_nodes_of, 1},      {Op::info, 1},
    };
    int total = 0;
    for (const auto& [op, w] : weights) total += w;
    int roll = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
    Op op = Op::info;
    for (const auto& [o, w] : weights) {
      if (roll < w) {
        op = o;
        break;
      }
      roll -= w;
    }

    Command cmd;
    cmd.op = op;
    cmd.at = any_node();
    switch (op) {
      case Op::new_s_group: {
        cmd.group = group_pool[rng.below(group_pool.size())];
        cmd.nodes = node_subset(4);
        if (rng.chance(0.05)) cmd.nodes.clear();  // bad_arg path
        if (live_groups.count(cmd.group) == 0 && !cmd.nodes.empty()) {
          live_groups.insert(cmd.group);
          members[cmd.group] = cmd.nodes;
        }
        break;
      }
      case Op::delete_s_group:
        cmd.group = known_group();
        live_groups.erase(cmd.group);
        members.erase(cmd.group);
        break;
      case Op::add_nodes: {
        cmd.group = known_group();
        cmd.nodes = node_subset(3);
        auto m = members.find(cmd.group);
        if (m != members.end()) {
          if (rng.chance(0.8) && !m->second.empty()) {
            auto it = m->second.begin();
            std::advance(it, static_cast<long>(rng.below(m->second.size())));
            cmd.at = *it;  // execute on a member so the call can succeed
          }
          m->second.insert(cmd.nodes.begin(), cmd.nodes.end());
        }
        break;
      }
      case Op::remove_nodes: {
        cmd.group = known_group();
        auto m = members.find(cmd.group);
        if (m != members.end() && !m->second.empty() && rng.chance(0.8)) {
          auto it = m->second.begin();
          std::advance(it, static_cast<long>(rng.below(m->second.size())));
          cmd.at = *it;
          NodeSet chosen;
          std::size_t want = 1 + rng.below(2);
          for (std::size_t k = 0; k < want && !m->second.empty(); ++k) {
            auto pick = m->second.begin();
            std::advance(pick,
                         static_cast<long>(rng.below(m->second.size())));
            chosen.insert(*pick);
          }
          cmd.nodes = chosen;
          if (rng.chance(0.2)) cmd.nodes.insert(any_node());  // error path
          for (const auto& n : cmd.nodes) m->second.erase(n);
        } else {
          cmd.nodes = node_subset(2);
        }
        break;
      }
      case Op::register_name:
      case Op::re_register_name: {
        cmd.group = known_group();
        cmd.pname = name_pool[rng.below(name_pool.size())];
        auto m = members.find(cmd.group);
        if (m != members.end() && !m->second.empty() && rng.chance(0.7)) {
          // Prefer a pid living on a member node.
          std::vector<Pid> candidates;
          for (const auto& p : pids)
            if (m->second.count(p.node) > 0) candidates.push_back(p);
          cmd.pid = candidates.empty()
                        ? pids[rng.below(pids.size())]
                        : candidates[rng.below(candidates.size())];
        } else {
          cmd.pid = pids[rng.below(pids.size())];
        }
        break;
      }
      case Op::unregister_name:
      case Op::whereis_name:
        cmd.group = known_group();
        cmd.pname = name_pool[rng.below(name_pool.size())];
        break;
      case Op::send_to_name:
        cmd.group = known_group();
        cmd.pname = name_pool[rng.below(name_pool.size())];
        cmd.payload = "m" + std::to_string(i);
        break;
      case Op::registered_names_node:
        cmd.target_node = any_node();
        break;
      case Op::registered_names_group:
      case Op::own_nodes_of:
        cmd.group = known_group();
        break;
      case Op::s_groups:
      case Op::own_s_groups:
      case Op::own_nodes:
      case Op::info:
        break;
    }
    c.commands.push_back(std::move(cmd));
  }
  return c;
}

Normalized normalize(const SimWorld& world) {
  Normalized out;
  AbstractState& st = out.state;

  // Node records straight from the runtime.
  for (const auto& id : world.node_ids()) {
    const SimNode& n = world.node(id);
    NodeRecord rec;
    rec.type = n.type;
    rec.connections = n.connections;
    rec.groups = n.group_memberships;
    st.nodes.emplace(id, std::move(rec));
  }

  // Merge the group replicas collected from every node.
  for (const auto& id : world.node_ids()) {
    const SimNode& n = world.node(id);
    for (const auto& [g, rep] : n.replicas) {
      auto it = st.s_groups.find(g);
      if (it == st.s_groups.end()) {
        SGroup grp;
        grp.members = rep.members;
        grp.ns.entries = rep.names;
        st.s_groups.emplace(g, std::move(grp));
      } else {
        if (it->second.members != rep.members)
          out.anomalies.push_back("replica member sets disagree for " + g +
                                  " at " + id);
        for (const auto& [nm, pid] : rep.names) {
          auto [pos, inserted] = it->second.ns.entries.emplace(nm, pid);
          if (!inserted && !(pos->second == pid))
            out.anomalies.push_back("replica namespaces disagree for " + g +
                                    "/" + nm + " at " + id);
        }
      }
    }
  }
  // Empty groups exist only in the directory (no member holds a replica).
  for (const auto& [g, members] : world.groups().directory()) {
    if (st.s_groups.count(g) == 0) {
      if (!members.empty())
        out.anomalies.push_back("directory group " + g + " has no replicas");
      st.s_groups.emplace(g, SGroup{});
    }
  }

  // Free groups: connection components over free normal nodes. Their
  // namespaces hold the global registrations of component members.
  NodeSet free_normal;
  for (const auto& [id, rec] : st.nodes)
    if (rec.type == NodeType::normal && rec.free()) free_normal.insert(id);
  NodeSet pending = free_normal;
  while (!pending.empty()) {
    NodeSet component;
    NodeSet frontier{*pending.begin()};
    while (!frontier.empty()) {
      NodeSet next;
      for (const auto& n : frontier) {
        if (!component.insert(n).second) continue;
        for (const auto& cpeer : st.nodes.at(n).connections)
          if (free_normal.count(cpeer) > 0 && component.count(cpeer) == 0)
            next.insert(cpeer);
      }
      frontier = std::move(next);
    }
    for (const auto& n : component) pending.erase(n);
    FreeGroup fg;
    fg.members = component;
    for (const auto& [name, pid] : world.global_names())
      if (component.count(pid.node) > 0) fg.ns.entries.emplace(name, pid);
    st.free_groups.push_back(std::move(fg));
  }

  for (const auto& [id, rec] : st.nodes) {
    if (rec.type != NodeType::hidden || !rec.free()) continue;
    Namespace ns;
    for (const auto& [name, pid] : world.global_names())
      if (pid.node == id) ns.entries.emplace(name, pid);
    st.free_hidden_groups.emplace(id, std::move(ns));
  }

  st.canonicalize();
  return out;
}

namespace {

LockstepOutcome run_once(const CommandCase& c, const LockstepFaults& faults) {
  LockstepOutcome out;
  AbstractState abstract = AbstractState::boot(c.roster);
  auto world = make_world(c);

  for (std::size_t i = 0; i < c.commands.size(); ++i) {
    const Command& cmd = c.commands[i];
    out.failed_index = i;

    Value expected = apply_inplace(abstract, cmd);

    if (faults.remove_nodes_abort_on_nonmember && cmd.op == Op::remove_nodes) {
      auto members = world->groups().members_of(cmd.group);
      bool nonmember = false;
      if (members)
        for (const auto& n : cmd.nodes)
          if (members->count(n) == 0) nonmember = true;
      if (nonmember) {
        out.pass = false;
        out.reason = "concrete layer aborted (raised) instead of returning "
                     "an error value";
        out.abstract_value = expected;
        return out;
      }
    }

    Value actual = world->groups().apply(cmd);
    if (!(actual == expected)) {
      out.pass = false;
      out.reason = "return values differ";
      out.abstract_value = expected;
      out.concrete_value = actual;
      return out;
    }

    std::string violation = abstract.check_invariants();
    if (!violation.empty()) {
      out.pass = false;
      out.reason = "abstract state ill-formed: " + violation;
      return out;
    }

    Normalized norm = normalize(*world);
    if (!norm.anomalies.empty()) {
      out.pass = false;
      out.reason = "replica divergence: " + norm.anomalies.front();
      return out;
    }
    if (!(norm.state == abstract)) {
      out.pass = false;
      out.reason = "normalised state differs from abstract state";
      return out;
    }
  }
  return out;
}

}  // namespace

LockstepOutcome run_lockstep(const CommandCase& c, const LockstepFaults& faults,
                             bool minimise) {
  LockstepOutcome out = run_once(c, faults);
  if (out.pass || !minimise) return out;

  // Prefix truncation: find the shortest failing prefix.
  CommandCase smallest = c;
  smallest.commands.resize(out.failed_index + 1);
  for (std::size_t len = 1; len <= out.failed_index; ++len) {
    CommandCase prefix = c;
    prefix.commands.resize(len);
    if (!run_once(prefix, faults).pass) {
      smallest = std::move(prefix);
      break;
    }
  }
  // Set-argument reduction on the last (failing) command.
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    Command& last = smallest.commands.back();
    for (const auto& n : NodeSet(last.nodes)) {
      Command saved = last;
      last.nodes.erase(n);
      if (last.nodes.empty() || run_once(smallest, faults).pass)
        last = saved;
      else
        shrunk = true;
    }
  }
  out.counterexample = std::move(smallest);
  return out;
}

}  // namespace sgsim
