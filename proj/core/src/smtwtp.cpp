#include "sgsim/smtwtp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sgsim {

void SmtwtpInstance::validate() const {
  if (jobs.empty()) throw SimError("bad instance: no jobs");
  for (const auto& j : jobs) {
    if (!(j.processing > 0) || !std::isfinite(j.processing))
      throw SimError("bad instance: processing time must be positive");
    if (j.weight < 0 || !std::isfinite(j.weight))
      throw SimError("bad instance: weight must be non-negative");
    if (j.due < 0 || !std::isfinite(j.due))
      throw SimError("bad instance: due date must be non-negative");
  }
}

SmtwtpInstance SmtwtpInstance::parse(const std::string& text) {
  SmtwtpInstance inst;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Job j;
    if (!(ls >> j.processing)) continue;  // blank line
    if (!(ls >> j.weight >> j.due))
      throw ParseError(line_no, "expected \"p w d\"");
    std::string rest;
    if (ls >> rest) throw ParseError(line_no, "trailing field " + rest);
    inst.jobs.push_back(j);
  }
  inst.validate();
  return inst;
}

SmtwtpInstance SmtwtpInstance::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimError("cannot open instance " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

SmtwtpInstance SmtwtpInstance::random(DetRng& rng, int jobs) {
  SmtwtpInstance inst;
  double horizon = 0;
  for (int i = 0; i < jobs; ++i) {
    Job j;
    j.processing = static_cast<double>(rng.range(1, 10));
    j.weight = static_cast<double>(rng.range(0, 9));
    horizon += j.processing;
    inst.jobs.push_back(j);
  }
  for (auto& j : inst.jobs)
    j.due = static_cast<double>(rng.range(0, static_cast<std::int64_t>(horizon)));
  return inst;
}

double evaluate_schedule(const SmtwtpInstance& inst,
                         const std::vector<int>& perm) {
  double completion = 0;
  double cost = 0;
  for (int job : perm) {
    const Job& j = inst.jobs.at(static_cast<std::size_t>(job));
    completion += j.processing;
    cost += j.weight * std::max(0.0, completion - j.due);
  }
  return cost;
}

bool Schedule::valid_for(const SmtwtpInstance& inst) const {
  if (perm.size() != inst.jobs.size()) return false;
  std::vector<bool> seen(perm.size(), false);
  for (int j : perm) {
    if (j < 0 || static_cast<std::size_t>(j) >= perm.size()) return false;
    if (seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = true;
  }
  return true;
}

PheromoneMatrix::PheromoneMatrix(std::size_t jobs, const PheromoneConfig& cfg)
    : n_(jobs), tau_(jobs * jobs, cfg.tau_max) {}

void PheromoneMatrix::update(const Schedule& best, const PheromoneConfig& cfg) {
  for (auto& t : tau_) t *= (1.0 - cfg.rho);
  // Deposit along the best schedule; bounded even for zero-cost schedules.
  double deposit = 1.0 / (1.0 + best.cost);
  for (std::size_t pos = 0; pos < best.perm.size(); ++pos) {
    std::size_t job = static_cast<std::size_t>(best.perm[pos]);
    tau_[job * n_ + pos] += deposit;
  }
  for (auto& t : tau_) t = std::clamp(t, cfg.tau_min, cfg.tau_max);
}

bool PheromoneMatrix::within_bounds(const PheromoneConfig& cfg) const {
  for (double t : tau_)
    if (t < cfg.tau_min || t > cfg.tau_max) return false;
  return true;
}

Schedule ant_construct(const SmtwtpInstance& inst, const PheromoneMatrix& tau,
                       const PheromoneConfig& cfg, DetRng& rng) {
  const std::size_t n = inst.jobs.size();
  std::vector<int> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = static_cast<int>(i);

  Schedule out;
  out.perm.reserve(n);
  std::vector<double> weights(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    double total = 0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      std::size_t job = static_cast<std::size_t>(remaining[k]);
      double eta = 1.0 / (inst.jobs[job].due + 1.0);
      double w = std::pow(tau.at(job, pos), cfg.alpha) *
                 std::pow(eta, cfg.beta);
      weights[k] = w;
      total += w;
    }
    std::size_t pick = 0;
    if (total > 0) {
      double u = rng.uniform() * total;
      double acc = 0;
      pick = remaining.size() - 1;
      for (std::size_t k = 0; k < remaining.size(); ++k) {
        acc += weights[k];
        if (u < acc) {
          pick = k;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(remaining.size()));
    }
    out.perm.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  out.cost = evaluate_schedule(inst, out.perm);
  return out;
}

}  // namespace sgsim
