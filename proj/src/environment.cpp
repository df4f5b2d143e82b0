#include "manas/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "manas/random.hpp"

namespace manas {

namespace {

std::string action_to_string(const std::vector<int>& actions) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out << ",";
    out << actions[i];
  }
  out << "]";
  return out.str();
}

// Lexicographically next joint action; false once exhausted.
bool next_action(std::vector<int>& actions, int num_actions) {
  for (int i = static_cast<int>(actions.size()) - 1; i >= 0; --i) {
    if (++actions[i] < num_actions) return true;
    actions[i] = 0;
  }
  return false;
}

// Tries to express contributions as c_min + h*m_k with small integer m_k.
// Returns false for incommensurable tables.
bool integer_grid(const std::vector<double>& c, double& base, double& step,
                  std::vector<std::int64_t>& multiples) {
  base = *std::min_element(c.begin(), c.end());
  double h = 0.0;
  for (double v : c) {
    double d = v - base;
    if (d > 1e-12 && (h == 0.0 || d < h)) h = d;
  }
  if (h == 0.0) {  // all contributions equal
    step = 0.0;
    multiples.assign(c.size(), 0);
    return true;
  }
  multiples.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double m = (c[i] - base) / h;
    double rounded = std::round(m);
    if (std::abs(m - rounded) > 1e-9 || rounded > 1e7) return false;
    multiples[i] = static_cast<std::int64_t>(rounded);
  }
  step = h;
  return true;
}

constexpr std::uint64_t kBruteForceGuard = 1000000;

}  // namespace

// -- GsdEnvironment ----------------------------------------------------------

GsdEnvironment::GsdEnvironment(const GsdConfig& cfg, const Topology& topo)
    : Environment(topo), cfg_(cfg) {
  if (!(cfg.sigma > 0.0)) throw InputError("gsd sigma must be > 0");
  if (!std::isfinite(cfg.mu)) throw InputError("gsd mu must be finite");
  if (cfg.contributions.empty()) {
    contributions_.resize(topo.num_actions);
    for (int k = 0; k < topo.num_actions; ++k) contributions_[k] = k;
  } else {
    if (static_cast<int>(cfg.contributions.size()) != topo.num_actions)
      throw InputError("gsd contribution table size does not match num_actions");
    for (double v : cfg.contributions)
      if (!std::isfinite(v)) throw InputError("gsd contribution is not finite");
    contributions_ = cfg.contributions;
  }
  enumerate_optimum();
}

double GsdEnvironment::objective(double x) const {
  const double d = (x - cfg_.mu) / cfg_.sigma;
  return x * std::exp(-d * d);
}

double GsdEnvironment::loss_of_sum(double x) const {
  if (degenerate_) return 0.0;
  double loss = 1.0 - objective(x) / best_objective_;
  // Equal sums can round differently depending on summation order; keep the
  // optimum at exactly zero instead of a negative ulp.
  return loss < 0.0 ? 0.0 : loss;
}

double GsdEnvironment::mean_loss(const JointAction& joint, std::int64_t) const {
  require_valid(joint, topology());
  double x = 0.0;
  for (int a : joint.actions) x += contributions_[a];
  return loss_of_sum(x);
}

void GsdEnvironment::enumerate_optimum() {
  const Topology& topo = topology();
  const int n = topo.num_agents;
  const int k = topo.num_actions;

  double base = 0.0, step = 0.0;
  std::vector<std::int64_t> mult;
  if (integer_grid(contributions_, base, step, mult)) {
    const std::int64_t max_per_agent = *std::max_element(mult.begin(), mult.end());
    const std::int64_t span = max_per_agent * n;
    if (step == 0.0 || span == 0) {
      // All contributions equal: a single achievable sum, every action optimal.
      best_sum_ = base * n;
      best_objective_ = objective(best_sum_);
      best_action_.actions.assign(n, 0);
    } else {
      if (span > 50000000 / n)
        throw SizeGuardError("gsd contribution grid too large to enumerate");
      // reachable[i][s]: some choice for the last (n-i) agents sums to s.
      std::vector<std::vector<char>> reachable(n + 1);
      reachable[n] = std::vector<char>(1, 1);
      for (int i = n - 1; i >= 0; --i) {
        const std::int64_t cap = max_per_agent * (n - i);
        reachable[i].assign(cap + 1, 0);
        for (std::int64_t s = 0; s <= cap; ++s) {
          for (std::int64_t m : mult) {
            if (m > s) continue;
            if (s - m < static_cast<std::int64_t>(reachable[i + 1].size()) &&
                reachable[i + 1][s - m]) {
              reachable[i][s] = 1;
              break;
            }
          }
        }
      }
      std::int64_t best_s = 0;
      double best_g = -std::numeric_limits<double>::infinity();
      for (std::int64_t s = 0; s <= span; ++s) {
        if (!reachable[0][s]) continue;
        double g = objective(base * n + step * s);
        if (g > best_g) {
          best_g = g;
          best_s = s;
        }
      }
      best_sum_ = base * n + step * best_s;
      best_objective_ = best_g;
      // Lexicographically smallest action achieving best_s.
      best_action_.actions.resize(n);
      std::int64_t remaining = best_s;
      for (int i = 0; i < n; ++i) {
        for (int a = 0; a < k; ++a) {
          std::int64_t rest = remaining - mult[a];
          if (rest >= 0 && rest < static_cast<std::int64_t>(reachable[i + 1].size()) &&
              reachable[i + 1][rest]) {
            best_action_.actions[i] = a;
            remaining = rest;
            break;
          }
        }
      }
    }
  } else {
    auto space = topo.joint_space_size();
    if (!space || *space > kBruteForceGuard)
      throw SizeGuardError("gsd contributions are not enumerable and K^N exceeds 10^6");
    JointAction joint;
    joint.actions.assign(n, 0);
    double best_g = -std::numeric_limits<double>::infinity();
    do {
      double x = 0.0;
      for (int a : joint.actions) x += contributions_[a];
      double g = objective(x);
      if (g > best_g) {
        best_g = g;
        best_sum_ = x;
        best_action_ = joint;
      }
    } while (next_action(joint.actions, k));
    best_objective_ = best_g;
  }

  if (!(best_objective_ > 0.0)) {
    degenerate_ = true;  // every achievable sum scores zero: all actions optimal
    best_objective_ = 1.0;
  }
}

std::optional<HindsightResult> GsdEnvironment::hindsight_optimum(std::int64_t horizon) const {
  (void)horizon;
  return HindsightResult{best_action_, 0.0};
}

double gsd_loss(const JointAction& joint, const GsdConfig& cfg, const Topology& topo) {
  return GsdEnvironment(cfg, topo).mean_loss(joint, 1);
}

GsdHindsight gsd_best_in_hindsight(const GsdConfig& cfg, const Topology& topo) {
  GsdEnvironment env(cfg, topo);
  GsdHindsight result;
  result.best_sum = env.best_sum();
  result.loss = env.loss_of_sum(env.best_sum());
  result.action = env.hindsight_optimum(1)->action;
  return result;
}

// -- LinearEnvironment -------------------------------------------------------

LinearEnvironment::LinearEnvironment(const LinearEnvConfig& cfg, const Topology& topo,
                                     std::int64_t horizon, std::uint64_t env_seed)
    : Environment(topo), cfg_(cfg), horizon_(horizon) {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (cfg.noise_std < 0.0) throw InputError("noise_std must be >= 0");
  const std::size_t dim = static_cast<std::size_t>(topo.flat_size());
  auto check_beta = [&](const std::vector<double>& beta, const char* what) {
    if (beta.size() != dim)
      throw InputError(std::string(what) + " must have length K*N = " + std::to_string(dim));
    for (double v : beta)
      if (!std::isfinite(v)) throw InputError(std::string(what) + " contains a non-finite value");
  };
  switch (cfg.kind) {
    case LinearEnvConfig::Kind::kStationary:
      check_beta(cfg.beta, "beta");
      break;
    case LinearEnvConfig::Kind::kPiecewise: {
      if (cfg.segments.empty()) throw InputError("piecewise schedule needs segments");
      if (cfg.segments.front().start_round > 1)
        throw InputError("first piecewise segment must start at round 1");
      std::int64_t prev = 0;
      for (const auto& seg : cfg.segments) {
        if (seg.start_round <= prev) throw InputError("piecewise segments must be ascending");
        prev = seg.start_round;
        check_beta(seg.beta, "segment beta");
      }
      break;
    }
    case LinearEnvConfig::Kind::kRandomWalk: {
      check_beta(cfg.beta, "beta");
      if (cfg.step_size < 0.0) throw InputError("step_size must be >= 0");
      if (horizon * static_cast<std::int64_t>(dim) > 50000000)
        throw SizeGuardError("random-walk path horizon*K*N exceeds the memory guard");
      walk_path_.reserve(horizon);
      std::mt19937_64 rng(env_seed);
      std::vector<double> beta = cfg.beta;
      for (std::int64_t t = 1; t <= horizon; ++t) {
        walk_path_.push_back(beta);
        for (double& v : beta) v += cfg.step_size * normal_draw(rng);
      }
      break;
    }
  }
}

const std::vector<double>& LinearEnvironment::beta_at(std::int64_t round) const {
  if (round < 1 || round > horizon_)
    throw InputError("round " + std::to_string(round) + " outside horizon");
  switch (cfg_.kind) {
    case LinearEnvConfig::Kind::kStationary:
      return cfg_.beta;
    case LinearEnvConfig::Kind::kRandomWalk:
      return walk_path_[round - 1];
    case LinearEnvConfig::Kind::kPiecewise: {
      const BetaSegment* active = &cfg_.segments.front();
      for (const auto& seg : cfg_.segments) {
        if (seg.start_round > round) break;
        active = &seg;
      }
      return active->beta;
    }
  }
  throw Error("unreachable");
}

double LinearEnvironment::mean_loss(const JointAction& joint, std::int64_t round) const {
  require_valid(joint, topology());
  const std::vector<double>& beta = beta_at(round);
  const int k = topology().num_actions;
  double loss = 0.0;
  for (std::size_t i = 0; i < joint.actions.size(); ++i)
    loss += beta[i * k + joint.actions[i]];
  return loss;
}

double LinearEnvironment::sample_loss(const JointAction& joint, std::int64_t round,
                                      std::mt19937_64& rng) const {
  double loss = mean_loss(joint, round);
  if (cfg_.noise_std > 0.0) loss += cfg_.noise_std * normal_draw(rng);
  return loss;
}

std::optional<HindsightResult> LinearEnvironment::hindsight_optimum(std::int64_t horizon) const {
  if (horizon < 1 || horizon > horizon_) return std::nullopt;
  const int n = topology().num_agents;
  const int k = topology().num_actions;
  // Best fixed action separates per agent block.
  std::vector<double> totals(static_cast<std::size_t>(n) * k, 0.0);
  if (stationary()) {
    for (std::size_t i = 0; i < totals.size(); ++i)
      totals[i] = static_cast<double>(horizon) * cfg_.beta[i];
  } else {
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const auto& beta = beta_at(t);
      for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += beta[i];
    }
  }
  HindsightResult result;
  result.action.actions.resize(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int a = 1; a < k; ++a)
      if (totals[i * k + a] < totals[i * k + best]) best = a;
    result.action.actions[i] = best;
    result.total_loss += totals[i * k + best];
  }
  return result;
}

double linear_loss(const ArchitectureVector& z, const LinearEnvironment& env, std::int64_t round,
                   std::mt19937_64* rng) {
  JointAction joint = decode(z, env.topology());
  if (rng) return env.sample_loss(joint, round, *rng);
  return env.mean_loss(joint, round);
}

// -- TabularEnvironment ------------------------------------------------------

double tabular_lookup(const JointAction& joint, const TabularBenchmark& bench, bool noisy,
                      std::mt19937_64& rng) {
  require_valid(joint, bench.topology);
  auto it = bench.entries.find(joint.actions);
  if (it == bench.entries.end())
    throw LookupError("architecture " + action_to_string(joint.actions) +
                      " is not in the benchmark");
  const TabularEntry& entry = it->second;
  if (noisy && entry.stddev && *entry.stddev > 0.0)
    return entry.mean + *entry.stddev * normal_draw(rng);
  return entry.mean;
}

TabularEnvironment::TabularEnvironment(TabularBenchmark bench, bool noisy)
    : Environment(bench.topology), bench_(std::move(bench)), noisy_(noisy) {
  for (const auto& [actions, entry] : bench_.entries) {
    JointAction joint{actions};
    require_valid(joint, bench_.topology);
    if (!std::isfinite(entry.mean)) throw InputError("benchmark loss_mean is not finite");
    if (entry.stddev && (!std::isfinite(*entry.stddev) || *entry.stddev < 0.0))
      throw InputError("benchmark loss_std must be finite and >= 0");
  }
}

double TabularEnvironment::mean_loss(const JointAction& joint, std::int64_t) const {
  require_valid(joint, topology());
  auto it = bench_.entries.find(joint.actions);
  if (it == bench_.entries.end())
    throw LookupError("architecture " + action_to_string(joint.actions) +
                      " is not in the benchmark");
  return it->second.mean;
}

double TabularEnvironment::sample_loss(const JointAction& joint, std::int64_t round,
                                       std::mt19937_64& rng) const {
  if (!noisy_) return mean_loss(joint, round);
  return tabular_lookup(joint, bench_, true, rng);
}

std::optional<HindsightResult> TabularEnvironment::hindsight_optimum(std::int64_t horizon) const {
  if (bench_.entries.empty()) return std::nullopt;
  // Map order is lexicographic, so the first strict minimum is the
  // lexicographically smallest optimum.
  auto best = bench_.entries.begin();
  for (auto it = bench_.entries.begin(); it != bench_.entries.end(); ++it)
    if (it->second.mean < best->second.mean) best = it;
  return HindsightResult{JointAction{best->first},
                         static_cast<double>(horizon) * best->second.mean};
}

}  // namespace manas
