#include "sgsim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace sgsim {
namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_u64(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected an integer, got " + s);
  }
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected a number, got " + s);
  }
}

// Applies one key in one section; returns false for unknown keys.
bool apply_key(ScenarioSpec& spec, const std::string& section,
               const std::string& key, const std::vector<std::string>& args,
               int line_no) {
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw ParseError(line_no, key + " expects " + std::to_string(n) +
                                    " argument(s)");
  };
  if (section.empty()) {
    if (key == "name") { need(1); spec.name = args[0]; return true; }
    if (key == "seed") { need(1); spec.seed = parse_u64(args[0], line_no); return true; }
    if (key == "ticks") {
      need(1);
      spec.ticks = static_cast<Tick>(parse_u64(args[0], line_no));
      return true;
    }
    if (key == "expect") {
      need(1);
      if (args[0] == "completed") spec.expect = ScenarioSpec::Expect::completed;
      else if (args[0] == "deadlock") spec.expect = ScenarioSpec::Expect::deadlock;
      else throw ParseError(line_no, "expect: completed or deadlock");
      return true;
    }
    return false;
  }
  if (section == "orbit") {
    auto& o = spec.orbit;
    if (key == "variant") {
      need(1);
      if (args[0] == "d") o.variant = OrbitSpec::Variant::d;
      else if (args[0] == "sd") o.variant = OrbitSpec::Variant::sd;
      else throw ParseError(line_no, "orbit variant: d or sd");
      return true;
    }
    if (key == "space") { need(1); o.space = parse_u64(args[0], line_no); return true; }
    if (key == "x0") { need(1); o.x0 = parse_u64(args[0], line_no); return true; }
    if (key == "workers") { need(1); o.workers = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "group_size") { need(1); o.group_size = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "batch") { need(1); o.batch_size = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "conservation") {
      need(1);
      spec.orbit_conservation = args[0] == "on";
      return true;
    }
    if (key == "generator") {
      if (args.size() == 3 && args[0] == "affine") {
        OrbitGenerator g;
        g.kind = OrbitGenerator::Kind::affine;
        g.a = parse_u64(args[1], line_no);
        g.b = parse_u64(args[2], line_no);
        o.generators.push_back(g);
        return true;
      }
      throw ParseError(line_no, "generator: affine <a> <b>");
    }
    return false;
  }
  if (section == "aco") {
    auto& a = spec.aco;
    if (key == "variant") {
      need(1);
      auto v = aco_variant_from(args[0]);
      if (!v) throw ParseError(line_no, "aco variant: tl, ml, gr or sr");
      a.variant = *v;
      return true;
    }
    if (key == "colonies") { need(1); a.colonies = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "ants") { need(1); a.ants = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "ant_iters") { need(1); a.ant_iters = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "global_iters") { need(1); a.global_iters = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "fanout") { need(1); a.fanout = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "ant_compute") { need(1); a.ant_compute = static_cast<Tick>(parse_u64(args[0], line_no)); return true; }
    if (key == "instance") { need(1); spec.aco_instance_path = args[0]; return true; }
    if (key == "random_jobs") { need(1); spec.aco_random_jobs = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "instance_seed") { need(1); spec.aco_instance_seed = parse_u64(args[0], line_no); return true; }
    if (key == "heartbeat") { need(1); spec.heartbeat = static_cast<Tick>(parse_u64(args[0], line_no)); return true; }
    return false;
  }
  if (section == "mix") {
    auto& m = spec.mix;
    if (key == "p2p") { need(1); m.mix.p2p = parse_double(args[0], line_no); return true; }
    if (key == "global") { need(1); m.mix.global = parse_double(args[0], line_no); return true; }
    if (key == "local") { need(1); m.mix.local = parse_double(args[0], line_no); return true; }
    if (key == "payload") { need(1); m.mix.payload_size = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "nodes") { need(1); m.nodes = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "topology") {
      need(1);
      if (args[0] == "mesh") m.topology.kind = MixTopology::Kind::mesh;
      else if (args[0] == "sgroups") m.topology.kind = MixTopology::Kind::sgroups;
      else throw ParseError(line_no, "topology: mesh or sgroups");
      return true;
    }
    if (key == "group_size") { need(1); m.topology.group_size = static_cast<int>(parse_u64(args[0], line_no)); return true; }
    if (key == "name_service_cost") { need(1); m.name_service_cost = static_cast<Tick>(parse_u64(args[0], line_no)); return true; }
    if (key == "network") { need(1); m.network_file = args[0]; return true; }
    return false;
  }
  if (section == "chaos") {
    if (key == "period") { need(1); spec.chaos_period = static_cast<Tick>(parse_u64(args[0], line_no)); return true; }
    if (key == "seed") { need(1); spec.chaos_seed = parse_u64(args[0], line_no); return true; }
    return false;
  }
  return false;
}

}  // namespace

ScenarioSpec ScenarioSpec::parse(const std::string& text) {
  ScenarioSpec spec;
  spec.orbit.generators.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::string section;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens[0].front() == '[') {
      if (tokens.size() != 1 || tokens[0].back() != ']')
        throw ParseError(line_no, "malformed section header");
      section = tokens[0].substr(1, tokens[0].size() - 2);
      if (section == "orbit") spec.workload = Workload::orbit;
      else if (section == "aco") spec.workload = Workload::aco;
      else if (section == "mix") spec.workload = Workload::mix;
      else if (section != "chaos")
        throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    std::vector<std::string> args(tokens.begin() + 1, tokens.end());
    if (!apply_key(spec, section, tokens[0], args, line_no))
      throw ParseError(line_no, "unknown key " + tokens[0] +
                                    (section.empty() ? "" : " in [" + section + "]"));
  }
  return spec;
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimError("cannot open scenario " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

void ScenarioSpec::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw SimError("override must look like section.key=value");
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  auto dot = path.find('.');
  std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
  std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
  std::vector<std::string> args = tokenize(value);
  if (!apply_key(*this, section, key, args, 0))
    throw SimError("unknown override " + path);
}

ScenarioResult run_scenario(const ScenarioSpec& spec,
                            const std::string& out_dir) {
  ScenarioResult result;
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto out_path = [&](const std::string& f) {
    return (fs::path(out_dir) / f).string();
  };
  auto write_metrics = [&](const MetricsLog& m, Tick at) {
    std::ofstream mf(out_path("metrics.csv"));
    m.write_csv(mf, at);
    result.outputs.emplace_back("metrics", out_path("metrics.csv"));
  };

  switch (spec.workload) {
    case ScenarioSpec::Workload::orbit: {
      if (spec.chaos_period > 0)
        throw SimError("chaos injection is only supported with [aco]");
      OrbitRunConfig cfg;
      cfg.seed = spec.seed;
      cfg.max_ticks = spec.ticks;
      cfg.check_conservation = spec.orbit_conservation;
      OrbitOutcome out = run_orbit(spec.orbit, cfg);
      std::ofstream rf(out_path("orbit.csv"));
      rf << "vertices,completed,end_tick,result_hash,total_sent\n";
      rf << out.vertices.size() << ',' << (out.completed ? 1 : 0) << ','
         << out.end_tick << ',' << out.result_hash << ',' << out.total_sent
         << '\n';
      result.outputs.emplace_back("orbit", out_path("orbit.csv"));
      write_metrics(out.metrics, out.end_tick);
      bool ok = out.completed == (spec.expect == ScenarioSpec::Expect::completed);
      result.exit_code = ok ? 0 : 1;
      result.summary = "orbit " + std::to_string(out.vertices.size()) +
                       " vertices, " + (out.completed ? "completed" : "budget") +
                       " at tick " + std::to_string(out.end_tick);
      return result;
    }
    case ScenarioSpec::Workload::aco: {
      SmtwtpInstance inst;
      if (spec.aco_instance_path) {
        inst = SmtwtpInstance::load(*spec.aco_instance_path);
      } else if (spec.aco_random_jobs > 0) {
        DetRng rng(spec.aco_instance_seed);
        inst = SmtwtpInstance::random(rng, spec.aco_random_jobs);
      } else {
        throw SimError("aco scenario needs instance or random_jobs");
      }
      AcoRunConfig cfg;
      cfg.seed = spec.seed;
      cfg.max_ticks = spec.ticks;
      cfg.chaos_period = spec.chaos_period;
      cfg.chaos_seed = spec.chaos_seed;
      cfg.heartbeat_period = spec.heartbeat;
      AcoOutcome out = run_aco(inst, spec.aco, cfg);
      std::ofstream rf(out_path("aco.csv"));
      rf << "variant,completed,best_cost,end_tick,rounds,total_sent,"
            "link_packets,kills,restarts,names_resolve\n";
      char cost[64];
      std::snprintf(cost, sizeof(cost), "%.9g", out.best.cost);
      rf << to_string(spec.aco.variant) << ',' << (out.completed ? 1 : 0)
         << ',' << (out.completed ? cost : "") << ',' << out.end_tick << ','
         << out.round_bests.size() << ',' << out.total_sent << ','
         << out.total_link_packets << ',' << out.chaos_kills << ','
         << out.restarts << ',' << (out.names_resolve ? 1 : 0) << '\n';
      result.outputs.emplace_back("aco", out_path("aco.csv"));
      write_metrics(out.metrics, out.end_tick);
      bool expected_completed = spec.expect == ScenarioSpec::Expect::completed;
      bool ok = out.completed == expected_completed;
      if (expected_completed && out.completed)
        ok = ok && out.names_resolve && out.best.valid_for(inst);
      result.exit_code = ok ? 0 : 1;
      result.summary =
          to_string(spec.aco.variant) + "-aco " +
          (out.completed ? "completed, best cost " + std::string(cost)
                         : "stalled (budget exhausted)") +
          " at tick " + std::to_string(out.end_tick);
      return result;
    }
    case ScenarioSpec::Workload::mix: {
      MixConfig cfg = spec.mix;
      cfg.seed = spec.seed;
      cfg.ticks = spec.ticks;
      MixResult out = run_mix(cfg);
      std::ofstream rf(out_path("mix.csv"));
      write_mix_csv(rf, {out});
      result.outputs.emplace_back("mix", out_path("mix.csv"));
      write_metrics(out.metrics, out.ticks);
      result.exit_code = 0;
      char tp[64];
      std::snprintf(tp, sizeof(tp), "%.6g", out.throughput);
      result.summary = "mix on " + std::to_string(out.nodes) + " nodes (" +
                       out.topology + "): " + tp + " commands/tick";
      return result;
    }
    case ScenarioSpec::Workload::none:
      break;
  }
  result.exit_code = 2;
  result.summary = "scenario has no workload section";
  return result;
}

}  // namespace sgsim
