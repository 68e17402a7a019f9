#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "goe/agents.hpp"
#include "goe/config.hpp"
#include "goe/domain.hpp"
#include "goe/estimation.hpp"
#include "goe/policies.hpp"
#include "goe/rng.hpp"

namespace goe {

enum class Horizon { estimation, decision };

struct SlotTrace {
  std::uint64_t slot = 0;  // 1-based across the whole run
  Horizon horizon = Horizon::decision;
  std::size_t v = 0;  // source level index
  int alpha = 0;
  int beta = 0;
  int forward_erased = 0;
  int received = 0;
  int acted = 0;
  std::size_t v_hat = 0;  // received level index held by the AA after the slot
  int delta = 1;
  int theta = 1;
  double goe = 0.0;
  int effective = 0;
  int backward_erased = 0;
  int eack = 0;
};

void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const SlotTrace& t, const UsefulnessLevels& source_levels,
                     const UsefulnessLevels& received_levels);

// Slot-level engine. A slot is split in two so that an external agent can be
// shown its observation between the source draw and the decisions:
// begin_slot() draws v_n, finish_slot(alpha, beta) runs channels and grading.
class Engine {
 public:
  explicit Engine(const SimConfig& config);

  void begin_slot();
  SlotTrace finish_slot(int alpha, int beta, Horizon horizon = Horizon::decision);
  // begin_slot, both cursors decide, finish_slot.
  SlotTrace step(PolicyCursor& sa, PolicyCursor& aa, Horizon horizon = Horizon::decision);

  // Agent states for the current slot (valid after begin_slot).
  SaState sa_state() const { return {v_, eack_}; }
  AaState aa_state() const { return {v_hat_, delta_, theta_}; }
  std::size_t sa_state_index() const { return sa_encoder_.encode(sa_state()); }
  std::size_t aa_state_index() const { return aa_encoder_.encode(aa_state()); }

  // Restores the initial agent state; random streams keep their position.
  void reset_state();

  Rng& sa_rng() { return sa_rng_; }
  Rng& aa_rng() { return aa_rng_; }

  const SimConfig& config() const { return config_; }
  const UsefulnessLevels& source_levels() const { return source_levels_; }
  const UsefulnessLevels& received_levels() const { return received_levels_; }
  const UsefulnessLevels& target_levels() const { return target_levels_; }
  const SourceDistribution& source() const { return source_; }
  const SaEncoder& sa_encoder() const { return sa_encoder_; }
  const AaEncoder& aa_encoder() const { return aa_encoder_; }
  std::uint64_t slot() const { return slot_; }

 private:
  SimConfig config_;
  UsefulnessLevels source_levels_;
  UsefulnessLevels received_levels_;
  UsefulnessLevels target_levels_;
  SourceDistribution source_;
  SaEncoder sa_encoder_;
  AaEncoder aa_encoder_;
  std::vector<std::size_t> received_index_of_source_;

  Rng source_rng_;
  Rng forward_rng_;
  Rng backward_rng_;
  Rng sa_rng_;
  Rng aa_rng_;

  std::uint64_t slot_ = 0;
  std::size_t v_ = 0;
  int eack_ = 0;
  std::size_t v_hat_ = 0;
  int delta_ = 1;
  int theta_ = 1;
};

struct Metrics {
  std::string policy_pair;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t slots = 0;  // decision-horizon length

  // Decision-horizon averages.
  double avg_effectiveness = 0.0;
  double avg_goe = 0.0;
  double tx_rate = 0.0;
  double reception_rate = 0.0;
  double action_rate = 0.0;
  double query_rate = 0.0;
  double eack_rate = 0.0;

  // Averages over both horizons.
  double overall_effectiveness = 0.0;
  double overall_goe = 0.0;

  // Running mean of effectiveness over the whole run, sampled every stride.
  std::vector<std::pair<std::uint64_t, double>> effectiveness_series;
  std::vector<std::string> warnings;
};

struct RunResult {
  Metrics metrics;
  EstimatedPmfs estimates;
  std::shared_ptr<const PolicySolution> sa_solution;  // null unless the SA is effect-aware
  std::shared_ptr<const PolicySolution> aa_solution;
};

// Policies and solver inputs derived from the estimation horizon.
struct AgentSolutions {
  EstimatedPmfs estimates;
  std::shared_ptr<const PolicySolution> sa;
  std::shared_ptr<const PolicySolution> aa;
  std::vector<std::string> warnings;
};

// Target pmf with the fallback used when estimation fails.
std::vector<double> target_pmf_or_uniform(const EstimatedPmfs& estimates, std::size_t target_count);

SolverOptions solver_options(const SimConfig& config);
AgentModelOptions sa_model_options(const SimConfig& config);
AgentModelOptions aa_model_options(const SimConfig& config);

// E-horizon decision rules: the SA probes at its budgeted maximum rate and an
// effect-aware AA bootstraps with the periodic schedule.
DecisionPolicy estimation_sa_policy(const SimConfig& config);
DecisionPolicy estimation_aa_policy(const SimConfig& config);
// D-horizon rule for an effect-agnostic agent.
DecisionPolicy agnostic_policy(PolicyKind kind, double rate);

// Periodic phase offsets (SA, AA) for a run.
std::pair<std::uint64_t, std::uint64_t> periodic_phases(const SimConfig& config);

using SlotObserver = std::function<void(const SlotTrace&)>;

// Runs the estimation horizon on `engine`, appending every slot to `log`.
void run_estimation_horizon(Engine& engine, EstimationLog& log, const SlotObserver& observer = {});

// Fits the pmfs and solves the CMDP of every effect-aware agent.
AgentSolutions fit_agents(const SimConfig& config, const EstimationLog& log, bool need_sa, bool need_aa);

RunResult run(const SimConfig& config, std::ostream* trace = nullptr);

enum class SweepAxis { theta_max, goe_target, c_max, tx_rate, query_rate, e_horizon };

std::string_view to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view name);
SimConfig apply_axis(SimConfig config, SweepAxis axis, double value);

struct SweepRow {
  Metrics metrics;
  std::string error;  // empty on success
};

// One run per (value, policy pair, repetition); repetition r uses seed base.seed + r.
std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const Metrics& m);

}  // namespace goe
