#include "manas/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace manas {

namespace {

bool next_action(std::vector<int>& actions, int num_actions) {
  for (int i = static_cast<int>(actions.size()) - 1; i >= 0; --i) {
    if (++actions[i] < num_actions) return true;
    actions[i] = 0;
  }
  return false;
}

}  // namespace

double LossTrace::total_loss() const {
  double total = 0.0;
  for (const auto& r : rounds) total += r.loss;
  return total;
}

double cumulative_regret(const LossTrace& trace, double oracle_min) {
  if (trace.rounds.empty()) throw InputError("trace is empty");
  return trace.total_loss() - oracle_min;
}

double simple_regret(const Environment& env, std::int64_t horizon, const JointAction& recommended,
                     double oracle_min) {
  if (!env.replayable())
    throw UnsupportedMetricError("simple regret needs a replayable environment");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  double total = 0.0;
  if (env.stationary()) {
    total = static_cast<double>(horizon) * env.mean_loss(recommended, 1);
  } else {
    for (std::int64_t t = 1; t <= horizon; ++t) total += env.mean_loss(recommended, t);
  }
  return total - oracle_min;
}

HindsightResult best_in_hindsight_bruteforce(const Environment& env, std::int64_t horizon) {
  const Topology& topo = env.topology();
  auto space = topo.joint_space_size();
  if (!space || *space > 1000000)
    throw SizeGuardError(
        "joint action space exceeds 10^6; use an environment-specific hindsight oracle");
  if (!env.replayable())
    throw UnsupportedMetricError("hindsight scan needs a replayable environment");
  JointAction joint;
  joint.actions.assign(topo.num_agents, 0);
  HindsightResult best;
  best.total_loss = std::numeric_limits<double>::infinity();
  const bool stationary = env.stationary();
  do {
    double total = 0.0;
    if (stationary) {
      total = static_cast<double>(horizon) * env.mean_loss(joint, 1);
    } else {
      for (std::int64_t t = 1; t <= horizon; ++t) total += env.mean_loss(joint, t);
    }
    if (total < best.total_loss) {
      best.total_loss = total;
      best.action = joint;
    }
  } while (next_action(joint.actions, topo.num_actions));
  return best;
}

std::vector<double> per_agent_regret(const LossTrace& trace, const LinearEnvironment& env) {
  const Topology& topo = env.topology();
  const int n = topo.num_agents;
  const int k = topo.num_actions;
  const std::int64_t horizon = trace.horizon();
  if (horizon < 1) throw InputError("trace is empty");

  std::vector<double> played(n, 0.0);
  std::vector<double> totals(static_cast<std::size_t>(n) * k, 0.0);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const auto& beta = env.beta_at(t);
    const auto& action = trace.rounds[t - 1].action;
    require_valid(action, topo);
    for (int i = 0; i < n; ++i) {
      played[i] += beta[i * k + action.actions[i]];
      for (int a = 0; a < k; ++a) totals[i * k + a] += beta[i * k + a];
    }
  }
  std::vector<double> regret(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double best = totals[i * k];
    for (int a = 1; a < k; ++a) best = std::min(best, totals[i * k + a]);
    regret[i] = played[i] - best;
  }
  return regret;
}

std::vector<double> per_agent_regret(const LossTrace& trace, const Environment& env) {
  const auto* linear = dynamic_cast<const LinearEnvironment*>(&env);
  if (!linear)
    throw UnsupportedMetricError("per-agent regret factorization needs a linear environment");
  return per_agent_regret(trace, *linear);
}

std::vector<double> exp3_bound_curve(const Topology& topo, std::int64_t horizon) {
  if (horizon < 0) throw InputError("horizon must be >= 0");
  std::vector<double> curve(horizon, 0.0);
  if (topo.num_actions < 2) return curve;
  const double n = topo.num_agents;
  const double k = topo.num_actions;
  const double klogk = k * std::log(k);
  for (std::int64_t t = 1; t <= horizon; ++t)
    curve[t - 1] = 2.0 * n * std::sqrt(static_cast<double>(t) * klogk);
  return curve;
}

ComplexityH ls_complexity_H(const std::vector<double>& beta_totals, const Topology& topo) {
  const int n = topo.num_agents;
  const int k = topo.num_actions;
  if (beta_totals.size() != static_cast<std::size_t>(topo.flat_size()))
    throw InputError("beta_totals must have length K*N");
  if (k < 2) throw InputError("complexity H needs K >= 2 per agent block");
  ComplexityH result;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int a = 1; a < k; ++a)
      if (beta_totals[i * k + a] < beta_totals[i * k + best]) best = a;
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a) {
      if (a == best) continue;
      gap = std::min(gap, beta_totals[i * k + a] - beta_totals[i * k + best]);
    }
    min_gap = std::min(min_gap, gap);
  }
  result.value = n * min_gap;
  result.degenerate = (min_gap == 0.0);
  return result;
}

RegretReport build_report(const LossTrace& trace, const Environment& env,
                          const JointAction& recommendation, const ReportOptions& opts) {
  const std::int64_t horizon = trace.horizon();
  if (horizon < 1) throw InputError("trace is empty");

  auto hindsight = env.hindsight_optimum(horizon);
  if (!hindsight) hindsight = best_in_hindsight_bruteforce(env, horizon);

  RegretReport report;
  report.best_hindsight_action = hindsight->action;
  report.oracle_min = hindsight->total_loss;

  report.per_round.resize(horizon);
  const bool stationary = env.stationary();
  const double stationary_best =
      stationary && env.replayable() ? env.mean_loss(hindsight->action, 1) : 0.0;
  double cumulative = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    double best_t = stationary ? stationary_best : env.mean_loss(hindsight->action, t);
    report.per_round[t - 1] = trace.rounds[t - 1].loss - best_t;
    cumulative += report.per_round[t - 1];
  }
  report.cumulative_regret = cumulative;
  report.negative_regret_noise = cumulative < 0.0;

  if (opts.include_simple && env.replayable() && !recommendation.actions.empty())
    report.simple_regret = simple_regret(env, horizon, recommendation, hindsight->total_loss);

  if (opts.include_per_agent) {
    if (const auto* linear = dynamic_cast<const LinearEnvironment*>(&env)) {
      report.per_agent = per_agent_regret(trace, *linear);
      if (env.topology().num_actions >= 2) {
        std::vector<double> totals(env.topology().flat_size(), 0.0);
        for (std::int64_t t = 1; t <= horizon; ++t) {
          const auto& beta = linear->beta_at(t);
          for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += beta[i];
        }
        ComplexityH h = ls_complexity_H(totals, env.topology());
        report.complexity_h = h.value;
        report.complexity_degenerate = h.degenerate;
      }
    }
  }

  if (opts.include_bound)
    report.theoretical_bound_curve = exp3_bound_curve(env.topology(), horizon);

  return report;
}

}  // namespace manas
