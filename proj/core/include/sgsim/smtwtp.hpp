#pragma once

#include <string>
#include <vector>

#include "sgsim/det_rng.hpp"
#include "sgsim/ids.hpp"

namespace sgsim {

// Single machine total weighted tardiness: jobs with processing time,
// weight, and due date are arranged into one linear schedule whose cost is
// sum_j w_j * max(0, C_j - d_j).
struct Job {
  double processing = 1;
  double weight = 0;
  double due = 0;
};

struct SmtwtpInstance {
  std::vector<Job> jobs;

  void validate() const;  // throws SimError on empty/non-finite instances
  std::size_t size() const { return jobs.size(); }

  // File format: one job per line, "p w d", whitespace separated; '#'
  // comments allowed. Matches the usual benchmark listings.
  static SmtwtpInstance parse(const std::string& text);  // throws ParseError
  static SmtwtpInstance load(const std::string& path);
  static SmtwtpInstance random(DetRng& rng, int jobs);
};

struct Schedule {
  std::vector<int> perm;  // job index per position
  double cost = 0;

  bool valid_for(const SmtwtpInstance& inst) const;  // perm is a bijection
};

double evaluate_schedule(const SmtwtpInstance& inst,
                         const std::vector<int>& perm);

struct PheromoneConfig {
  double alpha = 1.0;  // pheromone exponent
  double beta = 2.0;   // heuristic exponent
  double rho = 0.1;    // evaporation
  double tau_min = 0.01;
  double tau_max = 10.0;
};

// Job-to-position desirability, clamped to [tau_min, tau_max].
class PheromoneMatrix {
 public:
  PheromoneMatrix() = default;
  PheromoneMatrix(std::size_t jobs, const PheromoneConfig& cfg);

  double at(std::size_t job, std::size_t pos) const {
    return tau_[job * n_ + pos];
  }
  std::size_t jobs() const { return n_; }

  // Evaporates everything, deposits along the given schedule, clamps.
  void update(const Schedule& best, const PheromoneConfig& cfg);

  bool within_bounds(const PheromoneConfig& cfg) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> tau_;
};

// Builds one schedule: at each position an unscheduled job is drawn with
// probability proportional to tau[job][pos]^alpha * eta(job)^beta, where
// eta(j) = 1 / (d_j + 1). Deterministic for a fixed rng stream.
Schedule ant_construct(const SmtwtpInstance& inst, const PheromoneMatrix& tau,
                       const PheromoneConfig& cfg, DetRng& rng);

}  // namespace sgsim
