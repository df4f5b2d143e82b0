#include "manas/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "manas/random.hpp"

namespace manas {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InputError(std::string(what) + " contains a non-finite value");
}

// H_k as an exact reduced fraction. When num*k and den stay below 2^53 the
// final division den/(num*rank) is a single correctly-rounded operation on
// exact operands, so the probabilities are the bit-exact rationals.
// Returns false when k is too large for that guarantee.
bool harmonic_fraction(int k, std::uint64_t& num_out, std::uint64_t& den_out) {
  constexpr unsigned __int128 kMantissa = 1ull << 53;
  unsigned __int128 num = 0, den = 1;
  for (unsigned __int128 j = 1; j <= static_cast<unsigned __int128>(k); ++j) {
    num = num * j + den;  // num/den + 1/j
    den = den * j;
    std::uint64_t g = std::gcd(static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den));
    num /= g;
    den /= g;
    if (num > kMantissa || den > kMantissa) return false;
  }
  if (num * static_cast<unsigned __int128>(k) > kMantissa) return false;
  num_out = static_cast<std::uint64_t>(num);
  den_out = static_cast<std::uint64_t>(den);
  return true;
}

std::vector<int> ranks_ascending(const std::vector<double>& b, const std::vector<int>* tie_order) {
  const int k = static_cast<int>(b.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (b[lhs] != b[rhs]) return b[lhs] < b[rhs];
    if (tie_order) return (*tie_order)[lhs] < (*tie_order)[rhs];
    return lhs < rhs;
  });
  std::vector<int> rank(k);
  for (int pos = 0; pos < k; ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

SamplingDistribution zipf_from_ranks(const std::vector<int>& rank) {
  const int k = static_cast<int>(rank.size());
  SamplingDistribution dist;
  dist.p.resize(k);
  std::uint64_t num = 0, den = 1;
  if (harmonic_fraction(k, num, den)) {
    // p = den / (num * rank): exact integer operands, one rounding each.
    for (int i = 0; i < k; ++i)
      dist.p[i] = static_cast<double>(den) / (static_cast<double>(num) * rank[i]);
  } else {
    double h = 0.0;
    for (int j = 1; j <= k; ++j) h += 1.0 / j;
    for (int i = 0; i < k; ++i) dist.p[i] = 1.0 / (rank[i] * h);
  }
  return dist;
}

}  // namespace

ManasHyperparams manas_defaults(const Topology& topo, std::int64_t horizon_n) {
  if (horizon_n < 1) throw InputError("horizon_n must be >= 1");
  ManasHyperparams hp;
  hp.horizon_n = horizon_n;
  const double k = topo.num_actions;
  if (topo.num_actions == 1) {
    hp.degenerate = true;  // ln(1) = 0: eta and gamma collapse to zero
    return hp;
  }
  const double log_k = std::log(k);
  hp.eta = 0.95 * std::sqrt(log_k) / (static_cast<double>(horizon_n) * k);
  hp.gamma = std::min(1.0, 1.05 * k * log_k / static_cast<double>(horizon_n));
  return hp;
}

SamplingDistribution softmax_distribution(const AgentScores& scores, const ManasHyperparams& hp) {
  require_finite(scores.b, "scores");
  if (scores.b.empty()) throw InputError("scores are empty");
  if (!(hp.eta >= 0.0)) throw InputError("eta must be >= 0");
  if (hp.gamma < 0.0 || hp.gamma > 1.0) throw InputError("gamma must be in [0,1]");
  const int k = static_cast<int>(scores.b.size());
  const double lo = *std::min_element(scores.b.begin(), scores.b.end());
  SamplingDistribution dist;
  dist.p.resize(k);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    dist.p[i] = std::exp(-hp.eta * (scores.b[i] - lo));
    total += dist.p[i];
  }
  for (int i = 0; i < k; ++i) dist.p[i] = (1.0 - hp.gamma) * dist.p[i] / total + hp.gamma / k;
  return dist;
}

void exp3_update(AgentScores& scores, int chosen, double loss, double p_chosen) {
  if (chosen < 0 || chosen >= static_cast<int>(scores.b.size()))
    throw InputError("chosen action out of range");
  if (!std::isfinite(loss)) throw InputError("loss is not finite");
  if (!(p_chosen > 0.0) || p_chosen > 1.0)
    throw ImportanceWeightError("p_chosen must lie in (0,1]; got " + std::to_string(p_chosen));
  scores.b[chosen] += loss / p_chosen;
}

SamplingDistribution zipf_distribution(const AgentScores& scores) {
  require_finite(scores.b, "scores");
  if (scores.b.empty()) throw InputError("scores are empty");
  return zipf_from_ranks(ranks_ascending(scores.b, nullptr));
}

SamplingDistribution zipf_distribution(const AgentScores& scores,
                                       const std::vector<int>& tie_order) {
  require_finite(scores.b, "scores");
  if (tie_order.size() != scores.b.size())
    throw InputError("tie_order size does not match scores");
  return zipf_from_ranks(ranks_ascending(scores.b, &tie_order));
}

void LsBatch::add(const ArchitectureVector& z, double loss) {
  decode(z, topo_);  // validates one set bit per agent block
  if (!std::isfinite(loss)) throw InputError("loss is not finite");
  columns_.push_back(z);
  losses_.push_back(loss);
}

std::vector<double> ls_batch_solve(const LsBatch& batch) {
  const int rows = batch.topology().flat_size();
  std::vector<double> beta(rows, 0.0);
  if (batch.size() == 0) return beta;  // minimum-norm solution of an empty system

  // Normal equations (Z Z^T) beta = Z L, accumulated sparsely: each column
  // has exactly N set bits. The gram spectrum is the squared Z spectrum, so
  // the 1e-10 cutoff on singular values of Z becomes 1e-20 here.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  std::vector<int> ones;
  ones.reserve(batch.topology().num_agents);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    ones.clear();
    const auto& bits = batch.columns()[s].bits;
    for (int r = 0; r < rows; ++r)
      if (bits[r]) ones.push_back(r);
    const double loss = batch.losses()[s];
    for (int a : ones) {
      rhs[a] += loss;
      for (int b : ones) gram(a, b) += 1.0;
    }
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(rows, rows);
  cod.setThreshold(1e-20);
  cod.compute(gram);
  Eigen::VectorXd solution = cod.solve(rhs);
  for (int r = 0; r < rows; ++r) beta[r] = solution[r];
  return beta;
}

Eigen::MatrixXd second_moment(const std::vector<SamplingDistribution>& policies) {
  const int n = static_cast<int>(policies.size());
  if (n == 0) throw InputError("second_moment needs at least one policy");
  const int k = static_cast<int>(policies.front().p.size());
  for (const auto& pi : policies) {
    if (static_cast<int>(pi.p.size()) != k)
      throw InputError("policies must share the same action count");
    require_finite(pi.p, "policy");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * k, n * k);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < k; ++a) p(i * k + a, i * k + a) = policies[i].p[a];
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) p(i * k + a, j * k + b) = policies[i].p[a] * policies[j].p[b];
    }
  }
  return p;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rtol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rtol * sigma(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::vector<double> comband_estimate(double loss, const ArchitectureVector& z,
                                     const Eigen::MatrixXd& pinv_p) {
  const int dim = static_cast<int>(z.bits.size());
  if (pinv_p.rows() != dim || pinv_p.cols() != dim)
    throw InputError("pinv_p dimensions do not match the architecture vector");
  if (!std::isfinite(loss)) throw InputError("loss is not finite");
  Eigen::VectorXd zv(dim);
  for (int i = 0; i < dim; ++i) zv[i] = z.bits[i];
  Eigen::VectorXd est = loss * (pinv_p * zv);
  return std::vector<double>(est.data(), est.data() + dim);
}

int argmin_index(const std::vector<double>& values) {
  if (values.empty()) throw InputError("argmin of empty vector");
  return static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
}

int recommend(const AgentScores& scores, RecommendMode mode, const SamplingDistribution& dist,
              std::mt19937_64* rng) {
  if (mode == RecommendMode::kArgmin) return argmin_index(scores.b);
  if (!rng) throw InputError("sample mode needs a random source");
  return sample_index(dist.p, *rng);
}

}  // namespace manas
