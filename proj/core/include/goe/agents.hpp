#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "goe/cmdp.hpp"
#include "goe/domain.hpp"

namespace goe {

// Per-action cost in the agents' decision problems. unit charges the per-slot
// communication cost (C1 for the SA, C2 for the AA); literal charges c(a) = a.
enum class CostMode { unit, literal };

std::string_view to_string(CostMode mode);
CostMode cost_mode_from_string(std::string_view name);

struct SaState {
  std::size_t importance = 0;  // index into the source levels
  int eack = 0;
};

struct AaState {
  std::size_t usefulness = 0;  // index into the received levels, 0 is the zero level
  int aoi = 1;
  int lateness = 1;
};

class SaEncoder {
 public:
  explicit SaEncoder(std::size_t source_count);

  std::size_t size() const { return 2 * source_count_; }
  std::size_t source_count() const { return source_count_; }
  std::size_t encode(const SaState& s) const;
  SaState decode(std::size_t index) const;
  std::string label(std::size_t index) const;

 private:
  std::size_t source_count_;
};

class AaEncoder {
 public:
  AaEncoder(std::size_t received_count, int delta_max, int lateness_cap);

  std::size_t size() const { return received_count_ * static_cast<std::size_t>(delta_max_ * lateness_cap_); }
  std::size_t received_count() const { return received_count_; }
  int delta_max() const { return delta_max_; }
  int lateness_cap() const { return lateness_cap_; }
  std::size_t encode(const AaState& s) const;
  AaState decode(std::size_t index) const;
  std::string label(std::size_t index) const;

 private:
  std::size_t received_count_;
  int delta_max_;
  int lateness_cap_;
};

struct AgentModelOptions {
  double discount = 0.75;
  double budget = 0.08;
  CostMode cost_mode = CostMode::unit;
};

// SA decision problem over (v, E-ACK). The next E-ACK is 1 with probability
// equal to the target-usefulness CDF at alpha * v.
CmdpModel build_sa_model(const SourceDistribution& source, const UsefulnessLevels& source_levels,
                         const std::vector<double>& target_pmf, const UsefulnessLevels& target_levels,
                         const GoeParams& params, const AgentModelOptions& options = {});

// AA decision problem over (v_hat, AoI, lateness). q is the received-usefulness
// pmf including the zero level.
CmdpModel build_aa_model(const std::vector<double>& received_pmf, const UsefulnessLevels& received_levels,
                         double p_erasure, const GoeParams& params, const AgentModelOptions& options = {});

// Probability that an E-ACK follows, given the transmitted usefulness alpha * v.
double eack_success_probability(double transmitted, const std::vector<double>& target_pmf,
                                const UsefulnessLevels& target_levels);

struct TruncationReport {
  bool delta_ok = true;
  bool theta_ok = true;
  bool delta_vacuous = false;
  bool theta_vacuous = false;
  double min_eps_delta = 0.0;
  double min_eps_theta = 0.0;
};

// Checks g_delta(v, Dmax - 1) <= (1 + eps_delta) g_delta(v, Dmax) over the
// received levels and the same for g_theta at theta_max.
TruncationReport validate_truncation(const GoeParams& params, double eps_delta, double eps_theta,
                                     const UsefulnessLevels& received_levels = UsefulnessLevels::received());
TruncationReport validate_truncation(const GoeMetric& metric, const GoeParams& params, double eps_delta,
                                     double eps_theta, const UsefulnessLevels& received_levels);

}  // namespace goe
