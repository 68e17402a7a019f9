#include "goe/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "goe/error.hpp"

namespace goe {

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr int kPowerIterations = 1'000'000;

using SparseMatrix = Eigen::SparseMatrix<double>;

// P_pi as a sparse S x S matrix.
SparseMatrix induced_chain(const CmdpModel& model, const PolicyTable& policy) {
  const auto n = static_cast<Eigen::Index>(model.state_count());
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t s = 0; s < model.state_count(); ++s) {
    for (const Outcome& o : model.row(s, static_cast<std::size_t>(policy[s]))) {
      entries.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(o.next), o.prob);
    }
  }
  SparseMatrix p(n, n);
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

void check_policy(const CmdpModel& model, const PolicyTable& policy) {
  if (policy.size() != model.state_count()) throw ModelError("policy size does not match the state count");
  for (int a : policy) {
    if (a < 0 || static_cast<std::size_t>(a) >= model.action_count()) throw ModelError("policy action out of range");
  }
}

// Lazy-chain power iteration from the uniform distribution. Converges for
// periodic chains too; for multichain models it picks the limit reached from
// the uniform start.
Eigen::VectorXd power_stationary(const SparseMatrix& p) {
  const auto n = p.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const SparseMatrix pt = p.transpose();
  for (int k = 0; k < kPowerIterations; ++k) {
    Eigen::VectorXd next = 0.5 * (d + pt * d);
    const double diff = (next - d).lpNorm<1>();
    d = std::move(next);
    if (diff < 1e-15) break;
  }
  return d / d.sum();
}

Eigen::VectorXd stationary_impl(const SparseMatrix& p, bool& fallback) {
  const auto n = p.rows();
  fallback = false;
  if (n == 1) return Eigen::VectorXd::Ones(1);

  // (P^T - I) d = 0 with the last equation replaced by sum(d) = 1.
  SparseMatrix a = SparseMatrix(p.transpose());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n));
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() != n - 1) entries.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < n - 1; ++i) entries.emplace_back(i, i, -1.0);
  for (Eigen::Index j = 0; j < n; ++j) entries.emplace_back(n - 1, j, 1.0);
  SparseMatrix system(n, n);
  system.setFromTriplets(entries.begin(), entries.end());
  system.makeCompressed();

  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(system);
  if (lu.info() == Eigen::Success) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd d = lu.solve(rhs);
    if (lu.info() == Eigen::Success && d.allFinite() && d.minCoeff() > -1e-9) {
      const Eigen::VectorXd residual = SparseMatrix(p.transpose()) * d - d;
      if (residual.lpNorm<1>() < 1e-8) {
        d = d.cwiseMax(0.0);
        return d / d.sum();
      }
    }
  }
  fallback = true;
  return power_stationary(p);
}

Eigen::VectorXd per_state(const CmdpModel& model, const PolicyTable& policy, bool cost) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(model.state_count()));
  for (std::size_t s = 0; s < model.state_count(); ++s) {
    const auto a = static_cast<std::size_t>(policy[s]);
    out(static_cast<Eigen::Index>(s)) = cost ? model.action_cost(a) : model.expected_reward(s, a);
  }
  return out;
}

}  // namespace

CmdpModel::CmdpModel(std::size_t states, std::size_t actions, std::vector<std::vector<Outcome>> rows,
                     std::vector<double> action_cost, double discount, double budget,
                     std::vector<std::string> state_labels)
    : states_(states),
      actions_(actions),
      rows_(std::move(rows)),
      action_cost_(std::move(action_cost)),
      discount_(discount),
      budget_(budget),
      labels_(std::move(state_labels)) {
  if (states_ == 0 || actions_ == 0) throw ModelError("model needs at least one state and one action");
  if (rows_.size() != states_ * actions_) throw ModelError("expected one transition row per (state, action)");
  if (action_cost_.size() != actions_) throw ModelError("action cost vector size mismatch");
  if (!(discount_ >= 0.0 && discount_ < 1.0)) throw ModelError("discount must lie in [0, 1)");
  if (!(budget_ >= 0.0)) throw ModelError("budget must be non-negative");
  if (!labels_.empty() && labels_.size() != states_) throw ModelError("state label count mismatch");
  for (double c : action_cost_) {
    if (!(c >= 0.0)) throw ModelError("action costs must be non-negative");
  }
  expected_reward_.assign(states_ * actions_, 0.0);
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    double total = 0.0;
    double expected = 0.0;
    for (const Outcome& o : rows_[k]) {
      if (o.next >= states_) throw ModelError("transition target out of range");
      if (!(o.prob >= 0.0)) throw ModelError("negative transition probability");
      if (!(o.reward >= 0.0)) throw ModelError("rewards must be bounded below by 0");
      total += o.prob;
      expected += o.prob * o.reward;
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
      throw ModelError("transition row (s=" + std::to_string(k / actions_) + ", a=" + std::to_string(k % actions_) +
                       ") sums to " + std::to_string(total));
    }
    expected_reward_[k] = expected;
  }
}

CmdpModel CmdpModel::from_dense(const std::vector<std::vector<std::vector<double>>>& transition,
                                const std::vector<std::vector<std::vector<double>>>& reward,
                                std::vector<double> action_cost, double discount, double budget) {
  const std::size_t states = transition.size();
  if (states == 0 || reward.size() != states) throw ModelError("dense tensors must be non-empty and agree in size");
  const std::size_t actions = transition[0].size();
  std::vector<std::vector<Outcome>> rows(states * actions);
  for (std::size_t s = 0; s < states; ++s) {
    if (transition[s].size() != actions || reward[s].size() != actions) throw ModelError("ragged dense tensor");
    for (std::size_t a = 0; a < actions; ++a) {
      if (transition[s][a].size() != states || reward[s][a].size() != states) throw ModelError("ragged dense tensor");
      for (std::size_t t = 0; t < states; ++t) {
        if (transition[s][a][t] != 0.0) rows[s * actions + a].push_back({t, transition[s][a][t], reward[s][a][t]});
      }
    }
  }
  return {states, actions, std::move(rows), std::move(action_cost), discount, budget};
}

double CmdpModel::transition(std::size_t s, std::size_t a, std::size_t next) const {
  double p = 0.0;
  for (const Outcome& o : row(s, a)) {
    if (o.next == next) p += o.prob;
  }
  return p;
}

double CmdpModel::reward(std::size_t s, std::size_t a, std::size_t next) const {
  for (const Outcome& o : row(s, a)) {
    if (o.next == next) return o.reward;
  }
  return 0.0;
}

CmdpModel CmdpModel::with_budget(double budget) const {
  CmdpModel copy = *this;
  if (!(budget >= 0.0)) throw ModelError("budget must be non-negative");
  copy.budget_ = budget;
  return copy;
}

std::string_view to_string(HorizonMode mode) {
  return mode == HorizonMode::stationary_average ? "stationary_average" : "discounted_normalized";
}

HorizonMode horizon_mode_from_string(std::string_view name) {
  if (name == "stationary_average") return HorizonMode::stationary_average;
  if (name == "discounted_normalized") return HorizonMode::discounted_normalized;
  throw ParameterError("unknown horizon mode: " + std::string(name));
}

double span(std::span<const double> v) {
  if (v.empty()) throw DomainError("span of an empty vector");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

ValueIterationResult value_iterate(const CmdpModel& model, double mu, double eps_pi, int max_iterations) {
  if (!(eps_pi > 0.0)) throw ParameterError("eps_pi must be positive");
  const std::size_t n = model.state_count();
  const std::size_t na = model.action_count();
  const double lambda = model.discount();

  ValueIterationResult out;
  out.policy.assign(n, 0);
  std::vector<double> prev(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> diff(n, 0.0);

  for (int k = 1; k <= max_iterations; ++k) {
    for (std::size_t s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (std::size_t a = 0; a < na; ++a) {
        double future = 0.0;
        for (const Outcome& o : model.row(s, a)) future += o.prob * prev[o.next];
        const double q = model.expected_reward(s, a) - mu * model.action_cost(a) + lambda * future;
        // Strictly better only: equal values keep the lower action.
        if (a == 0 || q > best + 1e-12 * (1.0 + std::abs(best))) {
          best = q;
          best_action = static_cast<int>(a);
        }
      }
      next[s] = best;
      out.policy[s] = best_action;
    }
    for (std::size_t s = 0; s < n; ++s) diff[s] = next[s] - prev[s];
    const double sp = span(diff);
    out.spans.push_back(sp);
    out.iterations = k;
    out.final_span = sp;
    prev.swap(next);
    if (sp < eps_pi) break;
  }
  out.value = std::move(prev);
  return out;
}

std::vector<double> stationary_distribution(const CmdpModel& model, const PolicyTable& policy, bool* used_fallback) {
  check_policy(model, policy);
  bool fallback = false;
  const Eigen::VectorXd d = stationary_impl(induced_chain(model, policy), fallback);
  if (used_fallback) *used_fallback = fallback;
  return {d.data(), d.data() + d.size()};
}

PolicyEvaluation evaluate_policy(const CmdpModel& model, const PolicyTable& policy, HorizonMode mode) {
  check_policy(model, policy);
  const SparseMatrix p = induced_chain(model, policy);
  const Eigen::VectorXd r = per_state(model, policy, false);
  const Eigen::VectorXd c = per_state(model, policy, true);
  PolicyEvaluation out;

  if (mode == HorizonMode::stationary_average) {
    const Eigen::VectorXd d = stationary_impl(p, out.power_fallback);
    out.reward = d.dot(r);
    out.cost = d.dot(c);
    return out;
  }

  // Discounted occupancy x = d0^T (I - lambda P)^{-1}, d0 uniform.
  const auto n = p.rows();
  const double lambda = model.discount();
  SparseMatrix system(n, n);
  system.setIdentity();
  system -= lambda * SparseMatrix(p.transpose());
  system.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw ModelError("discounted occupancy solve failed");
  const Eigen::VectorXd d0 = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd x = lu.solve(d0);
  out.reward = (1.0 - lambda) * x.dot(r);
  out.cost = (1.0 - lambda) * x.dot(c);
  return out;
}

double policy_cost(const CmdpModel& model, const PolicyTable& policy, HorizonMode mode) {
  return evaluate_policy(model, policy, mode).cost;
}

double policy_cost(const CmdpModel& model, const MixedPolicy& policy, HorizonMode mode) {
  const double low = policy_cost(model, policy.low, mode);
  if (policy.low == policy.high) return low;
  return policy.eta * low + (1.0 - policy.eta) * policy_cost(model, policy.high, mode);
}

int PolicySolution::act(std::size_t s, Rng& rng) const {
  if (deterministic()) return policy_low[s];
  return rng.bernoulli(mix_prob) ? policy_low[s] : policy_high[s];
}

PolicySolution solve(const CmdpModel& model, const SolverOptions& options) {
  if (!(options.eps_mu > 0.0) || !(options.eps_pi > 0.0)) throw ParameterError("eps_mu and eps_pi must be positive");
  if (!(options.mu_hi_init > 0.0)) throw ParameterError("mu_hi_init must be positive");

  const double budget = model.budget();
  const auto costs = model.action_costs();
  if (*std::min_element(costs.begin(), costs.end()) > budget + options.cost_tolerance)
    throw InfeasibleError("budget below the cheapest action cost");

  PolicySolution sol;
  SolveReport& report = sol.report;

  auto run_vi = [&](double mu) {
    ValueIterationResult vi = value_iterate(model, mu, options.eps_pi);
    report.vi_iterations += vi.iterations;
    report.final_span = vi.final_span;
    return vi;
  };
  auto evaluate = [&](const PolicyTable& policy) {
    const PolicyEvaluation ev = evaluate_policy(model, policy, options.horizon_mode);
    report.power_fallback = report.power_fallback || ev.power_fallback;
    return ev;
  };

  // Unconstrained optimum first: if it already fits the budget we are done.
  ValueIterationResult vi0 = run_vi(0.0);
  const PolicyEvaluation ev0 = evaluate(vi0.policy);
  if (ev0.cost <= budget + options.cost_tolerance) {
    sol.policy_low = sol.policy_high = vi0.policy;
    sol.mix_prob = options.eta_default;
    sol.multiplier = 0.0;
    sol.value = std::move(vi0.value);
    report.early_exit = true;
    report.cost_low = report.cost_high = report.mixture_cost = ev0.cost;
    report.reward_low = report.reward_high = report.objective = ev0.reward;
    return sol;
  }

  double mu_lo = 0.0;
  PolicyTable pi_lo = vi0.policy;
  PolicyEvaluation ev_lo = ev0;

  // Grow the upper bracket until its policy is feasible.
  double mu_hi = options.mu_hi_init;
  ValueIterationResult vi_hi = run_vi(mu_hi);
  PolicyEvaluation ev_hi = evaluate(vi_hi.policy);
  for (int d = 0; ev_hi.cost > budget + options.cost_tolerance; ++d) {
    if (d >= options.max_doublings) throw InfeasibleError("no multiplier up to the bracket limit meets the budget");
    mu_lo = mu_hi;
    pi_lo = vi_hi.policy;
    ev_lo = ev_hi;
    mu_hi *= 2.0;
    vi_hi = run_vi(mu_hi);
    ev_hi = evaluate(vi_hi.policy);
  }
  PolicyTable pi_hi = vi_hi.policy;
  std::vector<double> value = vi_hi.value;

  while (mu_hi - mu_lo >= options.eps_mu) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    ValueIterationResult vi = run_vi(mu);
    const PolicyEvaluation ev = evaluate(vi.policy);
    ++report.bisection_steps;
    if (ev.cost >= budget) {
      mu_lo = mu;
      pi_lo = std::move(vi.policy);
      ev_lo = ev;
    } else {
      mu_hi = mu;
      pi_hi = std::move(vi.policy);
      ev_hi = ev;
      value = std::move(vi.value);
    }
  }

  sol.multiplier = 0.5 * (mu_lo + mu_hi);
  sol.value = std::move(value);
  report.cost_low = ev_lo.cost;
  report.cost_high = ev_hi.cost;
  report.reward_low = ev_lo.reward;
  report.reward_high = ev_hi.reward;

  if (std::abs(ev_lo.cost - budget) <= options.cost_tolerance) {
    // The budget binds with equality: the mu- policy is already optimal.
    sol.policy_low = sol.policy_high = pi_lo;
    sol.mix_prob = 1.0;
    report.cost_high = ev_lo.cost;
    report.reward_high = ev_lo.reward;
  } else {
    sol.policy_low = std::move(pi_lo);
    sol.policy_high = std::move(pi_hi);
    const double gap = ev_lo.cost - ev_hi.cost;
    sol.mix_prob = gap > options.cost_tolerance ? std::clamp((budget - ev_hi.cost) / gap, 0.0, 1.0)
                                                : options.eta_default;
  }
  report.mixture_cost = sol.mix_prob * report.cost_low + (1.0 - sol.mix_prob) * report.cost_high;
  report.objective = sol.mix_prob * report.reward_low + (1.0 - sol.mix_prob) * report.reward_high;
  return sol;
}

ReachabilityReport check_reachability(const CmdpModel& model) {
  const std::size_t n = model.state_count();
  std::vector<std::vector<std::size_t>> adj(n), radj(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      for (const Outcome& o : model.row(s, a)) {
        if (o.prob > 0.0) {
          adj[s].push_back(o.next);
          radj[o.next].push_back(s);
        }
      }
    }
  }

  // Kosaraju, iterative.
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    seen[root] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < adj[v].size()) {
        const std::size_t w = adj[v][i++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> component(n, kNone);
  std::size_t components = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (component[*it] != kNone) continue;
    std::vector<std::size_t> stack{*it};
    component[*it] = components;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : radj[v]) {
        if (component[w] == kNone) {
          component[w] = components;
          stack.push_back(w);
        }
      }
    }
    ++components;
  }

  std::vector<char> closed(components, 1);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t : adj[s]) {
      if (component[t] != component[s]) closed[component[s]] = 0;
    }
  }

  ReachabilityReport report;
  report.accessible = components == 1;
  report.closed_class_count = static_cast<std::size_t>(std::count(closed.begin(), closed.end(), 1));
  report.weakly_accessible = report.closed_class_count == 1;
  if (report.weakly_accessible) {
    const auto cls = static_cast<std::size_t>(std::find(closed.begin(), closed.end(), 1) - closed.begin());
    for (std::size_t s = 0; s < n; ++s) (component[s] == cls ? report.recurrent : report.transient).push_back(s);
  }
  return report;
}

nlohmann::json to_json(const CmdpModel& model) {
  nlohmann::json transitions = nlohmann::json::array();
  for (std::size_t s = 0; s < model.state_count(); ++s) {
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      for (const Outcome& o : model.row(s, a)) transitions.push_back({s, a, o.next, o.prob, o.reward});
    }
  }
  nlohmann::json doc = {
      {"format", "goe.cmdp"},
      {"version", 1},
      {"states", model.state_count()},
      {"actions", model.action_count()},
      {"discount", model.discount()},
      {"budget", model.budget()},
      {"action_cost", std::vector<double>(model.action_costs().begin(), model.action_costs().end())},
      {"transitions", std::move(transitions)},
  };
  if (!model.state_labels().empty()) doc["state_labels"] = model.state_labels();
  return doc;
}

CmdpModel cmdp_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "goe.cmdp" || doc.at("version") != 1) throw ModelError("unsupported CMDP document");
    const auto states = doc.at("states").get<std::size_t>();
    const auto actions = doc.at("actions").get<std::size_t>();
    std::vector<std::vector<Outcome>> rows(states * actions);
    for (const auto& t : doc.at("transitions")) {
      const auto s = t.at(0).get<std::size_t>();
      const auto a = t.at(1).get<std::size_t>();
      if (s >= states || a >= actions) throw ModelError("transition index out of range");
      rows[s * actions + a].push_back({t.at(2).get<std::size_t>(), t.at(3).get<double>(), t.at(4).get<double>()});
    }
    std::vector<std::string> labels;
    if (doc.contains("state_labels")) labels = doc.at("state_labels").get<std::vector<std::string>>();
    return {states,
            actions,
            std::move(rows),
            doc.at("action_cost").get<std::vector<double>>(),
            doc.at("discount").get<double>(),
            doc.at("budget").get<double>(),
            std::move(labels)};
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed CMDP document: ") + e.what());
  }
}

nlohmann::json to_json(const PolicySolution& solution) {
  const SolveReport& r = solution.report;
  return {
      {"format", "goe.policy_solution"},
      {"version", 1},
      {"policy_low", solution.policy_low},
      {"policy_high", solution.policy_high},
      {"mix_prob", solution.mix_prob},
      {"multiplier", solution.multiplier},
      {"value", solution.value},
      {"report",
       {{"early_exit", r.early_exit},
        {"bisection_steps", r.bisection_steps},
        {"vi_iterations", r.vi_iterations},
        {"final_span", r.final_span},
        {"power_fallback", r.power_fallback},
        {"cost_low", r.cost_low},
        {"cost_high", r.cost_high},
        {"mixture_cost", r.mixture_cost},
        {"reward_low", r.reward_low},
        {"reward_high", r.reward_high},
        {"objective", r.objective}}},
  };
}

PolicySolution solution_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "goe.policy_solution" || doc.at("version") != 1)
      throw ModelError("unsupported policy solution document");
    PolicySolution sol;
    sol.policy_low = doc.at("policy_low").get<PolicyTable>();
    sol.policy_high = doc.at("policy_high").get<PolicyTable>();
    sol.mix_prob = doc.at("mix_prob").get<double>();
    sol.multiplier = doc.at("multiplier").get<double>();
    sol.value = doc.at("value").get<std::vector<double>>();
    const auto& r = doc.at("report");
    sol.report.early_exit = r.at("early_exit").get<bool>();
    sol.report.bisection_steps = r.at("bisection_steps").get<int>();
    sol.report.vi_iterations = r.at("vi_iterations").get<int>();
    sol.report.final_span = r.at("final_span").get<double>();
    sol.report.power_fallback = r.at("power_fallback").get<bool>();
    sol.report.cost_low = r.at("cost_low").get<double>();
    sol.report.cost_high = r.at("cost_high").get<double>();
    sol.report.mixture_cost = r.at("mixture_cost").get<double>();
    sol.report.reward_low = r.at("reward_low").get<double>();
    sol.report.reward_high = r.at("reward_high").get<double>();
    sol.report.objective = r.at("objective").get<double>();
    return sol;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed policy solution document: ") + e.what());
  }
}

}  // namespace goe
