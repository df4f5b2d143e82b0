#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "manas/core.hpp"

namespace manas {

// Best fixed joint action in hindsight and its total loss over the horizon.
struct HindsightResult {
  JointAction action;
  double total_loss = 0.0;
};

// A loss oracle nu = {L_1, ..., L_T}. Rounds are 1-based. mean_loss is the
// noise-free value and doubles as deterministic replay; sample_loss draws
// observation noise (if any) from the caller's stream, keeping determinism
// under the caller's control. Instances are immutable after construction and
// safe to share across threads.
class Environment {
 public:
  explicit Environment(const Topology& topo) : topo_(topo) {}
  virtual ~Environment() = default;

  const Topology& topology() const { return topo_; }

  virtual double mean_loss(const JointAction& joint, std::int64_t round) const = 0;
  virtual double sample_loss(const JointAction& joint, std::int64_t round,
                             std::mt19937_64& rng) const {
    (void)rng;
    return mean_loss(joint, round);
  }

  virtual bool stationary() const = 0;
  // Whether per-round replay of arbitrary actions is supported.
  virtual bool replayable() const { return true; }

  // Exact environment-specific hindsight oracle, when one cheaper than
  // brute force exists.
  virtual std::optional<HindsightResult> hindsight_optimum(std::int64_t horizon) const {
    (void)horizon;
    return std::nullopt;
  }

 private:
  Topology topo_;
};

// -- Gaussian squeeze -------------------------------------------------------

// Cooperative squeeze objective: agents' contributions sum to x, scored by
// G(x) = x * exp(-(x - mu)^2 / sigma^2). Loss is normalized against the best
// achievable sum: L = 1 - G(x)/G(x*), so the optimum has loss 0.
struct GsdConfig {
  double mu = 1.0;
  double sigma = 10.0;
  // Per-action contribution; empty means action k contributes k.
  std::vector<double> contributions;
};

class GsdEnvironment : public Environment {
 public:
  GsdEnvironment(const GsdConfig& cfg, const Topology& topo);

  double mean_loss(const JointAction& joint, std::int64_t round) const override;
  bool stationary() const override { return true; }
  std::optional<HindsightResult> hindsight_optimum(std::int64_t horizon) const override;

  double loss_of_sum(double x) const;
  double objective(double x) const;
  double best_sum() const { return best_sum_; }
  const std::vector<double>& contributions() const { return contributions_; }

 private:
  void enumerate_optimum();

  GsdConfig cfg_;
  std::vector<double> contributions_;
  double best_sum_ = 0.0;
  double best_objective_ = 0.0;
  JointAction best_action_;
  bool degenerate_ = false;  // G vanishes on every achievable sum
};

double gsd_loss(const JointAction& joint, const GsdConfig& cfg, const Topology& topo);

struct GsdHindsight {
  double best_sum = 0.0;
  double loss = 0.0;
  JointAction action;
};

// Exact optimum over achievable contribution sums. Contribution tables whose
// values share a common step are enumerated agent-by-agent (O(N*K) distinct
// sums for the default table); incommensurable tables fall back to scanning
// all K^N joint actions, guarded at 10^6.
GsdHindsight gsd_best_in_hindsight(const GsdConfig& cfg, const Topology& topo);

// -- Linear adversary -------------------------------------------------------

struct BetaSegment {
  std::int64_t start_round = 1;
  std::vector<double> beta;
};

struct LinearEnvConfig {
  enum class Kind { kStationary, kPiecewise, kRandomWalk };
  Kind kind = Kind::kStationary;
  std::vector<double> beta;                // stationary / random-walk start
  std::vector<BetaSegment> segments;       // piecewise, ascending start_round
  double step_size = 0.0;                  // random-walk per-round step std
  double noise_std = 0.0;                  // observation noise
};

// L_t(Z) = beta_t^T Z (+ observation noise). beta_t follows the configured
// schedule; random-walk paths are drawn once at construction from env_seed
// so every repeat faces the same adversary.
class LinearEnvironment : public Environment {
 public:
  LinearEnvironment(const LinearEnvConfig& cfg, const Topology& topo, std::int64_t horizon,
                    std::uint64_t env_seed = 0);

  double mean_loss(const JointAction& joint, std::int64_t round) const override;
  double sample_loss(const JointAction& joint, std::int64_t round,
                     std::mt19937_64& rng) const override;
  bool stationary() const override { return cfg_.kind == LinearEnvConfig::Kind::kStationary; }
  std::optional<HindsightResult> hindsight_optimum(std::int64_t horizon) const override;

  const std::vector<double>& beta_at(std::int64_t round) const;
  std::int64_t horizon() const { return horizon_; }
  double noise_std() const { return cfg_.noise_std; }

 private:
  LinearEnvConfig cfg_;
  std::int64_t horizon_ = 0;
  std::vector<std::vector<double>> walk_path_;  // random-walk only
};

double linear_loss(const ArchitectureVector& z, const LinearEnvironment& env, std::int64_t round,
                   std::mt19937_64* rng = nullptr);

// -- Tabular benchmark ------------------------------------------------------

struct TabularEntry {
  double mean = 0.0;
  std::optional<double> stddev;
};

struct TabularBenchmark {
  Topology topology{1, 1};
  std::map<std::vector<int>, TabularEntry> entries;
};

double tabular_lookup(const JointAction& joint, const TabularBenchmark& bench, bool noisy,
                      std::mt19937_64& rng);

class TabularEnvironment : public Environment {
 public:
  TabularEnvironment(TabularBenchmark bench, bool noisy);

  double mean_loss(const JointAction& joint, std::int64_t round) const override;
  double sample_loss(const JointAction& joint, std::int64_t round,
                     std::mt19937_64& rng) const override;
  bool stationary() const override { return true; }
  std::optional<HindsightResult> hindsight_optimum(std::int64_t horizon) const override;

  const TabularBenchmark& benchmark() const { return bench_; }

 private:
  TabularBenchmark bench_;
  bool noisy_ = false;
};

}  // namespace manas
