#include "goe/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "goe/error.hpp"

namespace goe {

namespace {

double unit_cost(CostMode mode, double per_slot) { return mode == CostMode::unit ? per_slot : 1.0; }

// Running sums for the metric columns.
struct Tally {
  std::uint64_t slots = 0;
  std::uint64_t effective = 0;
  std::uint64_t tx = 0;
  std::uint64_t received = 0;
  std::uint64_t acted = 0;
  std::uint64_t queries = 0;
  std::uint64_t eacks = 0;
  double goe = 0.0;

  void add(const SlotTrace& t) {
    ++slots;
    effective += static_cast<std::uint64_t>(t.effective);
    tx += static_cast<std::uint64_t>(t.alpha);
    received += static_cast<std::uint64_t>(t.received);
    acted += static_cast<std::uint64_t>(t.acted);
    queries += static_cast<std::uint64_t>(t.beta);
    eacks += static_cast<std::uint64_t>(t.eack);
    goe += t.goe;
  }
  double rate(std::uint64_t count) const { return slots ? static_cast<double>(count) / static_cast<double>(slots) : 0.0; }
};

}  // namespace

void write_trace_header(std::ostream& out) {
  out << "slot,horizon,v,alpha,beta,forward_erased,received,acted,v_hat,delta,theta,goe,effective,backward_erased,eack\n";
}

void write_trace_row(std::ostream& out, const SlotTrace& t, const UsefulnessLevels& source_levels,
                     const UsefulnessLevels& received_levels) {
  out << t.slot << ',' << (t.horizon == Horizon::estimation ? 'E' : 'D') << ',' << source_levels[t.v] << ','
      << t.alpha << ',' << t.beta << ',' << t.forward_erased << ',' << t.received << ',' << t.acted << ','
      << received_levels[t.v_hat] << ',' << t.delta << ',' << t.theta << ',' << std::setprecision(10) << t.goe << ','
      << t.effective << ',' << t.backward_erased << ',' << t.eack << '\n';
}

Engine::Engine(const SimConfig& config)
    : config_(config),
      source_levels_(UsefulnessLevels::source(config.source_levels)),
      received_levels_(UsefulnessLevels::received(config.received_levels)),
      target_levels_(UsefulnessLevels::target(config.target_levels)),
      source_(SourceDistribution::beta_binomial(config.source_levels, config.shape_a, config.shape_b)),
      sa_encoder_(config.source_levels),
      aa_encoder_(config.received_levels, config.goe.delta_max, config.goe.lateness_cap()),
      source_rng_(config.seed, Stream::source),
      forward_rng_(config.seed, Stream::forward_channel),
      backward_rng_(config.seed, Stream::backward_channel),
      sa_rng_(config.seed, Stream::sa_policy),
      aa_rng_(config.seed, Stream::aa_policy) {
  config_.validate();
  for (std::size_t i = 0; i < source_levels_.size(); ++i)
    received_index_of_source_.push_back(received_levels_.index_of(source_levels_[i]));
  reset_state();
}

void Engine::reset_state() {
  v_ = 0;
  eack_ = 0;
  v_hat_ = 0;
  delta_ = config_.goe.delta_max;
  theta_ = config_.goe.lateness_cap();
}

void Engine::begin_slot() { v_ = source_.sample(source_rng_); }

SlotTrace Engine::finish_slot(int alpha, int beta, Horizon horizon) {
  const GoeParams& g = config_.goe;
  SlotTrace t;
  t.slot = ++slot_;
  t.horizon = horizon;
  t.v = v_;
  t.alpha = alpha ? 1 : 0;
  t.beta = beta ? 1 : 0;

  // A query opens (or restarts) the action window.
  theta_ = t.beta ? 1 : std::min(theta_ + 1, g.lateness_cap());
  const bool in_window = g.window_admits(theta_);

  // Channel draws happen every slot so each stream advances in lockstep with time.
  t.forward_erased = forward_rng_.bernoulli(config_.p_erasure) ? 1 : 0;
  t.backward_erased = backward_rng_.bernoulli(config_.p_erasure_ack) ? 1 : 0;

  t.received = t.alpha && !t.forward_erased ? 1 : 0;
  t.acted = t.received && in_window ? 1 : 0;
  if (t.acted) {
    v_hat_ = received_index_of_source_[v_];
    delta_ = 1;
  } else {
    delta_ = std::min(delta_ + 1, g.delta_max);
  }

  t.v_hat = v_hat_;
  t.delta = delta_;
  t.theta = theta_;
  t.goe = goe_evaluate(received_levels_[v_hat_], delta_, theta_, t.alpha, t.beta, g);
  t.effective = t.acted && effectiveness_indicator(t.goe, theta_, g) ? 1 : 0;
  t.eack = t.effective && !t.backward_erased ? 1 : 0;
  eack_ = t.eack;
  return t;
}

SlotTrace Engine::step(PolicyCursor& sa, PolicyCursor& aa, Horizon horizon) {
  begin_slot();
  const int alpha = sa.decide(sa_state_index(), sa_rng_);
  const int beta = aa.decide(aa_state_index(), aa_rng_);
  return finish_slot(alpha, beta, horizon);
}

std::vector<double> target_pmf_or_uniform(const EstimatedPmfs& estimates, std::size_t target_count) {
  if (estimates.target_pmf.size() == target_count) return estimates.target_pmf;
  return std::vector<double>(target_count, 1.0 / static_cast<double>(target_count));
}

SolverOptions solver_options(const SimConfig& config) {
  SolverOptions o;
  o.eps_mu = config.eps_mu;
  o.eps_pi = config.eps_pi;
  o.eta_default = config.eta;
  o.horizon_mode = config.horizon_mode;
  return o;
}

AgentModelOptions sa_model_options(const SimConfig& config) {
  return {config.discount, config.c_max_sa, config.cost_mode};
}

AgentModelOptions aa_model_options(const SimConfig& config) {
  return {config.discount, config.c_max_aa, config.cost_mode};
}

DecisionPolicy agnostic_policy(PolicyKind kind, double rate) {
  switch (kind) {
    case PolicyKind::periodic: return DecisionPolicy::periodic(rate);
    case PolicyKind::markovian: return DecisionPolicy::markovian(rate);
    case PolicyKind::effect_aware: break;
  }
  throw ParameterError("effect-aware policies need a solved model");
}

DecisionPolicy estimation_sa_policy(const SimConfig& config) {
  const double cost = unit_cost(config.cost_mode, config.goe.cost_tx);
  return DecisionPolicy::periodic(cost > 0.0 ? std::min(1.0, config.c_max_sa / cost) : 1.0);
}

DecisionPolicy estimation_aa_policy(const SimConfig& config) {
  const PolicyKind kind = config.aa_policy == PolicyKind::effect_aware ? PolicyKind::periodic : config.aa_policy;
  return agnostic_policy(kind, config.query_rate);
}

std::pair<std::uint64_t, std::uint64_t> periodic_phases(const SimConfig& config) {
  if (!config.random_phase) return {0, 0};
  Rng rng(config.seed, Stream::phase);
  const std::uint64_t sa = rng.below(1u << 20);
  const std::uint64_t aa = rng.below(1u << 20);
  return {sa, aa};
}

void run_estimation_horizon(Engine& engine, EstimationLog& log, const SlotObserver& observer) {
  const SimConfig& config = engine.config();
  const DecisionPolicy sa_policy = estimation_sa_policy(config);
  const DecisionPolicy aa_policy = estimation_aa_policy(config);
  const auto [sa_phase, aa_phase] = periodic_phases(config);
  PolicyCursor sa(sa_policy, sa_phase);
  PolicyCursor aa(aa_policy, aa_phase);
  log.records.reserve(log.records.size() + config.e_horizon);
  for (std::uint64_t m = 0; m < config.e_horizon; ++m) {
    const SlotTrace t = engine.step(sa, aa, Horizon::estimation);
    log.add(t.v, t.acted ? t.v_hat : 0, t.eack);
    if (observer) observer(t);
  }
}

AgentSolutions fit_agents(const SimConfig& config, const EstimationLog& log, bool need_sa, bool need_aa) {
  const auto source_levels = UsefulnessLevels::source(config.source_levels);
  const auto received_levels = UsefulnessLevels::received(config.received_levels);
  const auto target_levels = UsefulnessLevels::target(config.target_levels);

  AgentSolutions out;
  try {
    out.estimates = estimate_all(log, source_levels, received_levels, target_levels);
  } catch (const EstimationError& e) {
    out.warnings.push_back(std::string("target estimation failed, using a uniform target pmf: ") + e.what());
    out.estimates.q = estimate_received_pmf(log, received_levels);
    out.estimates.pr_eack = estimate_eack_prob(log);
  }
  for (const auto& w : out.estimates.warnings) out.warnings.push_back(w);

  const SolverOptions options = solver_options(config);
  if (need_sa) {
    const auto source = SourceDistribution::beta_binomial(config.source_levels, config.shape_a, config.shape_b);
    const CmdpModel model =
        build_sa_model(source, source_levels, target_pmf_or_uniform(out.estimates, target_levels.size()),
                       target_levels, config.goe, sa_model_options(config));
    out.sa = std::make_shared<const PolicySolution>(solve(model, options));
  }
  if (need_aa) {
    const CmdpModel model =
        build_aa_model(out.estimates.q, received_levels, config.p_erasure, config.goe, aa_model_options(config));
    out.aa = std::make_shared<const PolicySolution>(solve(model, options));
  }
  return out;
}

RunResult run(const SimConfig& config, std::ostream* trace) {
  Engine engine(config);
  RunResult result;
  Metrics& m = result.metrics;
  m.policy_pair = pair_label(config.pair());
  m.seed = config.seed;
  m.slots = config.d_horizon;

  Tally overall;
  Tally decision;
  const std::uint64_t total = config.e_horizon + config.d_horizon;
  const auto observe = [&](const SlotTrace& t) {
    overall.add(t);
    if (t.horizon == Horizon::decision) decision.add(t);
    if (t.slot % config.series_stride == 0 || t.slot == total)
      m.effectiveness_series.emplace_back(t.slot, overall.rate(overall.effective));
    if (trace) write_trace_row(*trace, t, engine.source_levels(), engine.received_levels());
  };
  if (trace) write_trace_header(*trace);

  EstimationLog log;
  run_estimation_horizon(engine, log, observe);

  const bool sa_aware = config.sa_policy == PolicyKind::effect_aware;
  const bool aa_aware = config.aa_policy == PolicyKind::effect_aware;
  AgentSolutions fitted = fit_agents(config, log, sa_aware, aa_aware);
  m.warnings = fitted.warnings;
  result.estimates = std::move(fitted.estimates);
  result.sa_solution = fitted.sa;
  result.aa_solution = fitted.aa;

  const DecisionPolicy sa_policy =
      sa_aware ? DecisionPolicy::effect_aware(fitted.sa) : agnostic_policy(config.sa_policy, config.tx_rate);
  const DecisionPolicy aa_policy =
      aa_aware ? DecisionPolicy::effect_aware(fitted.aa) : agnostic_policy(config.aa_policy, config.query_rate);
  const auto [sa_phase, aa_phase] = periodic_phases(config);
  PolicyCursor sa(sa_policy, sa_phase);
  PolicyCursor aa(aa_policy, aa_phase);
  for (std::uint64_t n = 0; n < config.d_horizon; ++n) observe(engine.step(sa, aa, Horizon::decision));

  m.avg_effectiveness = decision.rate(decision.effective);
  m.avg_goe = decision.slots ? decision.goe / static_cast<double>(decision.slots) : 0.0;
  m.tx_rate = decision.rate(decision.tx);
  m.reception_rate = decision.rate(decision.received);
  m.action_rate = decision.rate(decision.acted);
  m.query_rate = decision.rate(decision.queries);
  m.eack_rate = decision.rate(decision.eacks);
  m.overall_effectiveness = overall.rate(overall.effective);
  m.overall_goe = overall.slots ? overall.goe / static_cast<double>(overall.slots) : 0.0;
  return result;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::theta_max: return "theta_max";
    case SweepAxis::goe_target: return "goe_target";
    case SweepAxis::c_max: return "c_max";
    case SweepAxis::tx_rate: return "tx_rate";
    case SweepAxis::query_rate: return "query_rate";
    case SweepAxis::e_horizon: return "e_horizon";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  for (SweepAxis a : {SweepAxis::theta_max, SweepAxis::goe_target, SweepAxis::c_max, SweepAxis::tx_rate,
                      SweepAxis::query_rate, SweepAxis::e_horizon}) {
    if (to_string(a) == name) return a;
  }
  throw ParameterError("unknown sweep axis: " + std::string(name));
}

SimConfig apply_axis(SimConfig config, SweepAxis axis, double value) {
  const auto whole = [&](const char* name) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw ParameterError(std::string(name) + " sweep values must be positive integers");
    return value;
  };
  switch (axis) {
    case SweepAxis::theta_max: config.goe.theta_max = static_cast<int>(whole("theta_max")); break;
    case SweepAxis::goe_target: config.goe.goe_target = value; break;
    case SweepAxis::c_max: config.c_max_sa = config.c_max_aa = value; break;
    case SweepAxis::tx_rate: config.tx_rate = value; break;
    case SweepAxis::query_rate: config.query_rate = value; break;
    case SweepAxis::e_horizon: config.e_horizon = static_cast<std::uint64_t>(whole("e_horizon")); break;
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ParameterError(e.what());
  }
  return config;
}

std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values) {
  struct Task {
    double value;
    PolicyPair pair;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double v : values) {
    for (const auto& pair : base.policy_pairs) {
      for (std::uint64_t r = 0; r < base.repetitions; ++r) tasks.push_back({v, pair, base.seed + r});
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& task = tasks[k];
      SweepRow& row = rows[k];
      row.metrics.policy_pair = pair_label(task.pair);
      row.metrics.axis_value = task.value;
      row.metrics.seed = task.seed;
      try {
        SimConfig config = apply_axis(base, axis, task.value);
        config.sa_policy = task.pair.first;
        config.aa_policy = task.pair.second;
        config.seed = task.seed;
        row.metrics = run(config).metrics;
        row.metrics.axis_value = task.value;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  unsigned threads = base.threads ? base.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

void write_metrics_header(std::ostream& out) {
  out << "policy_pair,axis_value,avg_effectiveness,avg_goe,tx_rate,action_rate,seed\n";
}

void write_metrics_row(std::ostream& out, const Metrics& m) {
  out << m.policy_pair << ',' << std::setprecision(10) << m.axis_value << ',' << m.avg_effectiveness << ','
      << m.avg_goe << ',' << m.tx_rate << ',' << m.action_rate << ',' << m.seed << '\n';
}

}  // namespace goe
