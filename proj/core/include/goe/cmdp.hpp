#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "goe/rng.hpp"

namespace goe {

// One nonzero entry of p(s, a, .) with its reward r(s, a, s').
struct Outcome {
  std::size_t next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

// Finite constrained MDP (S, A, p, r, c, lambda, C_max).
//
// Transitions are stored sparsely per (state, action) row; the dense
// accessors return 0 for pairs that were never listed. Construction validates
// that every row is a probability vector and that rewards are non-negative.
class CmdpModel {
 public:
  CmdpModel(std::size_t states, std::size_t actions, std::vector<std::vector<Outcome>> rows,
            std::vector<double> action_cost, double discount, double budget,
            std::vector<std::string> state_labels = {});

  // transition[s][a][s'] and reward[s][a][s'].
  static CmdpModel from_dense(const std::vector<std::vector<std::vector<double>>>& transition,
                              const std::vector<std::vector<std::vector<double>>>& reward,
                              std::vector<double> action_cost, double discount, double budget);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  std::span<const Outcome> row(std::size_t s, std::size_t a) const { return rows_[s * actions_ + a]; }
  double transition(std::size_t s, std::size_t a, std::size_t next) const;
  double reward(std::size_t s, std::size_t a, std::size_t next) const;
  // Sum over s' of p(s, a, s') r(s, a, s').
  double expected_reward(std::size_t s, std::size_t a) const { return expected_reward_[s * actions_ + a]; }
  double action_cost(std::size_t a) const { return action_cost_[a]; }
  std::span<const double> action_costs() const { return action_cost_; }
  double discount() const { return discount_; }
  double budget() const { return budget_; }
  const std::vector<std::string>& state_labels() const { return labels_; }

  CmdpModel with_budget(double budget) const;

 private:
  std::size_t states_;
  std::size_t actions_;
  std::vector<std::vector<Outcome>> rows_;
  std::vector<double> expected_reward_;
  std::vector<double> action_cost_;
  double discount_;
  double budget_;
  std::vector<std::string> labels_;
};

using PolicyTable = std::vector<int>;

// Randomized stationary policy: pick `low` with probability eta, else `high`.
struct MixedPolicy {
  PolicyTable low;
  PolicyTable high;
  double eta = 1.0;
};

// stationary_average: long-run mean under the stationary distribution of the
// induced chain. discounted_normalized: (1 - lambda) * sum_n lambda^n E[.]
// from a uniform initial state.
enum class HorizonMode { stationary_average, discounted_normalized };

std::string_view to_string(HorizonMode mode);
HorizonMode horizon_mode_from_string(std::string_view name);

double span(std::span<const double> v);

struct ValueIterationResult {
  PolicyTable policy;
  std::vector<double> value;
  int iterations = 0;
  double final_span = 0.0;
  std::vector<double> spans;  // sp(V_k - V_{k-1}) per iteration
};

// Value iteration on the net reward r - mu * c(a), from V_0 = 0, stopping once
// sp(V_k - V_{k-1}) < eps_pi. Ties go to the lower action index.
ValueIterationResult value_iterate(const CmdpModel& model, double mu, double eps_pi, int max_iterations = 1'000'000);

struct PolicyEvaluation {
  double reward = 0.0;
  double cost = 0.0;
  bool power_fallback = false;  // linear solve failed; power iteration used
};

PolicyEvaluation evaluate_policy(const CmdpModel& model, const PolicyTable& policy, HorizonMode mode);
double policy_cost(const CmdpModel& model, const PolicyTable& policy, HorizonMode mode);
double policy_cost(const CmdpModel& model, const MixedPolicy& policy, HorizonMode mode);

// Stationary distribution of the chain a policy induces.
std::vector<double> stationary_distribution(const CmdpModel& model, const PolicyTable& policy,
                                            bool* used_fallback = nullptr);

struct SolverOptions {
  double eps_mu = 1e-4;
  double eps_pi = 1e-4;
  double mu_hi_init = 10.0;
  double eta_default = 0.5;  // used when both boundary policies cost the same
  HorizonMode horizon_mode = HorizonMode::stationary_average;
  int max_doublings = 20;
  double cost_tolerance = 1e-9;
};

struct SolveReport {
  bool early_exit = false;
  int bisection_steps = 0;
  int vi_iterations = 0;
  double final_span = 0.0;
  bool power_fallback = false;
  double cost_low = 0.0;
  double cost_high = 0.0;
  double mixture_cost = 0.0;
  double reward_low = 0.0;
  double reward_high = 0.0;
  double objective = 0.0;  // eta * reward_low + (1 - eta) * reward_high
};

struct PolicySolution {
  PolicyTable policy_low;   // pi_{mu-}: infeasible side
  PolicyTable policy_high;  // pi_{mu+}: feasible side
  double mix_prob = 1.0;
  double multiplier = 0.0;
  std::vector<double> value;
  SolveReport report;

  bool deterministic() const { return policy_low == policy_high; }
  MixedPolicy mixture() const { return {policy_low, policy_high, mix_prob}; }
  // Action in state s; draws the mixture component once per call.
  int act(std::size_t s, Rng& rng) const;
};

// Lagrangian bisection around value iteration, with a two-policy mixture when
// the budget is not met with equality.
PolicySolution solve(const CmdpModel& model, const SolverOptions& options = {});

struct ReachabilityReport {
  bool accessible = false;         // every state reachable from every state
  bool weakly_accessible = false;  // transient states plus one communicating closed class
  std::size_t closed_class_count = 0;
  std::vector<std::size_t> recurrent;  // the closed class when unique
  std::vector<std::size_t> transient;
};

// Reachability over the union of nonzero transitions of all actions.
ReachabilityReport check_reachability(const CmdpModel& model);

nlohmann::json to_json(const CmdpModel& model);
CmdpModel cmdp_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PolicySolution& solution);
PolicySolution solution_from_json(const nlohmann::json& doc);

}  // namespace goe
