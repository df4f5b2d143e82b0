#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manas/core.hpp"
#include "manas/environment.hpp"

namespace manas {

struct TraceRound {
  JointAction action;
  double loss = 0.0;
  // pi_t^i[a_t^i]: the probability each agent sampled its chosen action with.
  std::vector<double> chosen_prob;
};

struct PolicySnapshot {
  std::int64_t round = 0;  // scores as they stood entering this round
  std::vector<std::vector<double>> scores;
};

struct LossTrace {
  std::vector<TraceRound> rounds;
  std::vector<PolicySnapshot> snapshots;

  std::int64_t horizon() const { return static_cast<std::int64_t>(rounds.size()); }
  double total_loss() const;
};

// Sum of played losses minus the hindsight optimum's total. May be negative
// only when observations were noisy; callers flag, never clip.
double cumulative_regret(const LossTrace& trace, double oracle_min);

// Total replayed loss of the recommended action minus the hindsight optimum.
// Requires a replayable environment.
double simple_regret(const Environment& env, std::int64_t horizon, const JointAction& recommended,
                     double oracle_min);

// Exact minimizer of sum_t L_t(a) by scanning all K^N joint actions in
// lexicographic order (ties keep the first). Guarded at K^N <= 10^6.
HindsightResult best_in_hindsight_bruteforce(const Environment& env, std::int64_t horizon);

// Appendix-style factorization for linear environments: agent i's regret is
// sum_t beta_t^i[a_t^i] - min_k sum_t beta_t^i[k]. The entries sum to the
// cumulative regret when losses are noise-free.
std::vector<double> per_agent_regret(const LossTrace& trace, const LinearEnvironment& env);
std::vector<double> per_agent_regret(const LossTrace& trace, const Environment& env);

// curve[t-1] = 2*N*sqrt(t*K*ln K) for t = 1..horizon; identically zero for K=1.
std::vector<double> exp3_bound_curve(const Topology& topo, std::int64_t horizon);

struct ComplexityH {
  double value = 0.0;
  bool degenerate = false;  // some block has a duplicated minimum
};

// H = N * min over agents of (second-smallest - smallest) of each K-block of
// cumulative credit. Diagnostic only.
ComplexityH ls_complexity_H(const std::vector<double>& beta_totals, const Topology& topo);

struct RegretReport {
  double cumulative_regret = 0.0;
  std::optional<double> simple_regret;
  std::vector<double> per_round;  // instantaneous regret vs the hindsight action
  std::optional<std::vector<double>> per_agent;
  JointAction best_hindsight_action;
  double oracle_min = 0.0;
  std::optional<std::vector<double>> theoretical_bound_curve;
  std::optional<double> complexity_h;
  bool complexity_degenerate = false;
  // Set when measured regret went negative (stochastic oracle).
  bool negative_regret_noise = false;
};

struct ReportOptions {
  bool include_bound = false;
  bool include_simple = true;
  bool include_per_agent = true;  // linear environments only; ignored otherwise
};

RegretReport build_report(const LossTrace& trace, const Environment& env,
                          const JointAction& recommendation, const ReportOptions& opts = {});

}  // namespace manas
