#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "manas/core.hpp"
#include "manas/environment.hpp"
#include "manas/policy.hpp"
#include "manas/regret.hpp"

namespace manas {

enum class Algorithm { kManas, kManasLs, kRandomSearch };

std::string algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);

// Least-squares loop settings. Zeros resolve to the defaults
// solve_period = K*N, min_samples = K*N, window = 4*K*N.
struct LsSettings {
  std::int64_t solve_period = 0;
  std::int64_t min_samples = 0;
  std::int64_t window = 0;
  bool full_history = false;

  std::int64_t resolved_solve_period(const Topology& t) const {
    return solve_period > 0 ? solve_period : t.flat_size();
  }
  std::int64_t resolved_min_samples(const Topology& t) const {
    return min_samples > 0 ? min_samples : t.flat_size();
  }
  std::int64_t resolved_window(const Topology& t) const {
    return window > 0 ? window : 4ll * t.flat_size();
  }
};

struct ExperimentConfig {
  Topology topology{1, 1};
  Algorithm algorithm = Algorithm::kManas;
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  int repeats = 1;
  RecommendMode recommend_mode = RecommendMode::kArgmin;
  std::optional<ManasHyperparams> manas_params;  // nullopt: Appendix-style defaults
  LsSettings ls;
  std::int64_t snapshot_interval = 0;  // 0 disables policy snapshots
  bool enforce_unit_loss = false;      // theory-diagnostic: require L in [0,1]

  ManasHyperparams resolved_manas_params() const {
    return manas_params ? *manas_params : manas_defaults(topology, horizon);
  }
};

// One full pass of the round loop. The per-round randomness layout is fixed:
// one uniform per agent in index order, then any environment noise draws;
// the recommendation draw (sample mode) comes after round T.
struct RunResult {
  LossTrace trace;
  JointAction recommendation;
  std::vector<AgentScores> final_scores;
  std::string error;  // non-empty: aborted, trace holds the completed prefix

  bool ok() const { return error.empty(); }
};

RunResult run_manas(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed);
RunResult run_manas_ls(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed);
RunResult run_random_search(const ExperimentConfig& cfg, const Environment& env,
                            std::uint64_t seed);
RunResult run_single(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed);

struct RepeatOutcome {
  std::uint64_t seed = 0;
  RunResult run;
  std::optional<RegretReport> report;
  // Average replayed loss of the recommendation; ranks repeats.
  std::optional<double> recommendation_loss;
};

struct RepeatsReport {
  std::vector<RepeatOutcome> outcomes;
  std::vector<double> mean_per_round;        // instantaneous regret, mean over runs
  std::vector<double> std_per_round;
  std::vector<double> mean_cumulative;       // running-sum regret, mean over runs
  std::vector<double> std_cumulative;
  int best_run = -1;                         // by recommendation loss
  std::vector<std::string> warnings;

  int completed_runs() const;
};

// Runs repeats with seeds cfg.seed + 0 .. cfg.seed + repeats-1. Repeats are
// independent and may execute on up to `threads` workers; results are
// identical for any thread count.
RepeatsReport run_repeats(const ExperimentConfig& cfg, const Environment& env, int threads = 1,
                          const ReportOptions& report_opts = {});

}  // namespace manas
