#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "goe/agents.hpp"
#include "goe/cmdp.hpp"
#include "goe/rng.hpp"

namespace goe {

enum class PolicyKind { effect_aware, periodic, markovian };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

inline constexpr double kMarkovStayIdle = 0.9;

// p11 such that the two-state chain with p00 = stay_idle spends `rate` of
// its time in state 1. Rates below the chain's floor throw ParameterError.
double markov_rate_to_p11(double rate, double stay_idle = kMarkovStayIdle);

// Immutable description of a per-slot binary decision rule.
class DecisionPolicy {
 public:
  static DecisionPolicy effect_aware(std::shared_ptr<const PolicySolution> solution);
  static DecisionPolicy periodic(double rate);
  static DecisionPolicy markovian(double rate, double stay_idle = kMarkovStayIdle);

  PolicyKind kind() const { return kind_; }
  double rate() const { return rate_; }
  double p00() const { return p00_; }
  double p11() const { return p11_; }
  const PolicySolution* solution() const { return solution_.get(); }

 private:
  PolicyKind kind_ = PolicyKind::periodic;
  double rate_ = 0.0;
  double p00_ = kMarkovStayIdle;
  double p11_ = 0.0;
  std::shared_ptr<const PolicySolution> solution_;
};

// Mutable per-run state of a policy: accumulator position or chain state.
class PolicyCursor {
 public:
  // phase shifts the periodic accumulator, so two agents with the same rate
  // need not fire in lockstep.
  explicit PolicyCursor(const DecisionPolicy& policy, std::uint64_t phase = 0);

  // state is the agent's encoded CMDP state; ignored by effect-agnostic kinds.
  int decide(std::size_t state, Rng& rng);

  const DecisionPolicy& policy() const { return *policy_; }
  std::uint64_t steps() const { return step_; }

 private:
  const DecisionPolicy* policy_;
  std::uint64_t step_ = 0;
  std::uint64_t phase_ = 0;
  int chain_state_ = 0;
};

// 1-based count of ones a periodic schedule emits over its first k slots.
std::uint64_t periodic_emitted(double rate, std::uint64_t k);

// Threshold lines along one state axis, one per combination of the other axes.
struct AxisThresholds {
  std::string axis;
  std::vector<std::string> line_labels;
  // Smallest axis value (in the axis's own units) at which the policy acts;
  // nullopt when it never acts on that line.
  std::vector<std::optional<int>> thresholds;
  // Every line is of the form 0...0 1...1 along the axis.
  bool threshold_structured = true;
};

struct ThresholdReport {
  std::string agent;
  std::vector<AxisThresholds> axes;

  const AxisThresholds& axis(std::string_view name) const;
};

// SA axes: "importance" (1-based level index, one line per E-ACK) and "eack".
ThresholdReport extract_sa_thresholds(const PolicyTable& policy, const SaEncoder& encoder);
// AA axes: "usefulness" (received level index), "aoi", "lateness".
ThresholdReport extract_aa_thresholds(const PolicyTable& policy, const AaEncoder& encoder);

// Inverse of extract_sa_thresholds on the importance axis.
PolicyTable rebuild_sa_policy(const ThresholdReport& report, const SaEncoder& encoder);
// Inverse on the named AA axis.
PolicyTable rebuild_aa_policy(const ThresholdReport& report, const AaEncoder& encoder, std::string_view axis);

nlohmann::json to_json(const ThresholdReport& report);

// Multi-dimensional lookup map: axes, per-cell actions of both mixture
// components, thresholds, and the solver's multiplier and mixing probability.
nlohmann::json sa_lookup_map(const PolicySolution& solution, const SaEncoder& encoder,
                             const UsefulnessLevels& source_levels);
nlohmann::json aa_lookup_map(const PolicySolution& solution, const AaEncoder& encoder,
                             const UsefulnessLevels& received_levels);

// Cells of a lookup map whose actions differ from `solution`.
std::vector<std::size_t> lookup_map_mismatches(const nlohmann::json& map, const PolicySolution& solution);

}  // namespace goe
