#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "manas/core.hpp"

namespace manas {

// Cumulative per-operation credit for one agent. Lower is better: entries
// accumulate (importance-weighted) losses.
struct AgentScores {
  std::vector<double> b;

  static AgentScores zeros(int num_actions) {
    return AgentScores{std::vector<double>(num_actions, 0.0)};
  }
};

struct SamplingDistribution {
  std::vector<double> p;
};

// Softmax/EXP3 hyperparameters. horizon_n is the planned number of sampled
// architectures and only feeds the default formulas.
struct ManasHyperparams {
  double eta = 0.0;
  double gamma = 0.0;
  std::int64_t horizon_n = 1;
  bool degenerate = false;  // K = 1: single action, nothing to learn
};

// Defaults eta = 0.95*sqrt(ln K)/(n*K), gamma = min(1, 1.05*K*ln(K)/n).
ManasHyperparams manas_defaults(const Topology& topo, std::int64_t horizon_n);

// p[k] = (1-gamma)*exp(-eta*b[k]) / sum_j exp(-eta*b[j]) + gamma/K.
// b holds losses, so the minimum score gets the largest probability.
// Stabilized by subtracting min(b) before exponentiation.
SamplingDistribution softmax_distribution(const AgentScores& scores, const ManasHyperparams& hp);

// Coordinated-descent credit update: b[chosen] += loss / p_chosen, where
// p_chosen must be the probability the caller actually sampled with.
void exp3_update(AgentScores& scores, int chosen, double loss, double p_chosen);

// p[k] = 1 / (rank(k) * H_K) with H_K the K-th harmonic number and ranks
// assigned by ascending score. Ties break toward the lower action index.
SamplingDistribution zipf_distribution(const AgentScores& scores);

// Same law, but ties break by ascending tie_order[k] (a permutation of
// 0..K-1). Used to randomize the all-equal initial ranking once per run.
SamplingDistribution zipf_distribution(const AgentScores& scores,
                                       const std::vector<int>& tie_order);

// Batch of evaluated architectures: one KN-bit column per sample plus the
// observed loss. A solve is statistically meaningful once size() >= K*N;
// that gate belongs to the caller.
struct LsBatch {
  explicit LsBatch(const Topology& topo) : topo_(topo) {}

  void add(const ArchitectureVector& z, double loss);
  std::size_t size() const { return losses_.size(); }
  const Topology& topology() const { return topo_; }
  const std::vector<ArchitectureVector>& columns() const { return columns_; }
  const std::vector<double>& losses() const { return losses_; }

 private:
  Topology topo_;
  std::vector<ArchitectureVector> columns_;
  std::vector<double> losses_;
};

// Minimum-norm solution of min_beta sum_s (L_s - beta^T Z_s)^2 via the
// rank-revealing normal-equation route (Z Z^T)^+ Z L. Singular values of Z
// below 1e-10 * sigma_max are treated as zero. Coefficients are only
// identified up to per-agent-block shifts; callers should consume
// predictions beta^T Z or per-block argmins, not raw entries.
std::vector<double> ls_batch_solve(const LsBatch& batch);

// Exact second moment P = E[Z Z^T] under the product sampling law:
// block (i,i) = diag(pi_i), block (i,j) = pi_i pi_j^T for i != j.
Eigen::MatrixXd second_moment(const std::vector<SamplingDistribution>& policies);

// Moore-Penrose pseudo-inverse; singular values below rtol * sigma_max are
// dropped.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rtol = 1e-10);

// One-round estimator beta_tilde = loss * P^+ z. Unbiased for predictions
// over feasible architectures when P matches the sampling law of z.
std::vector<double> comband_estimate(double loss, const ArchitectureVector& z,
                                     const Eigen::MatrixXd& pinv_p);

enum class RecommendMode { kArgmin, kSample };

// Lowest index among the minimum entries.
int argmin_index(const std::vector<double>& values);

// kArgmin: argmin of scores (deterministic). kSample: one draw from dist.
int recommend(const AgentScores& scores, RecommendMode mode, const SamplingDistribution& dist,
              std::mt19937_64* rng);

}  // namespace manas
