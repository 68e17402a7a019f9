#include "goe/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "goe/error.hpp"

namespace goe {

namespace {

constexpr double kPmfTolerance = 1e-9;
constexpr double kLevelSlack = 1e-9;

void check_pmf(const std::vector<double>& pmf, std::size_t expected, const char* what) {
  if (pmf.size() != expected) throw ModelError(std::string(what) + " size does not match its level set");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw ModelError(std::string(what) + " has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > kPmfTolerance) throw ModelError(std::string(what) + " does not sum to 1");
}

std::vector<double> action_costs(CostMode mode, double unit_cost) {
  return {0.0, mode == CostMode::unit ? unit_cost : 1.0};
}

}  // namespace

std::string_view to_string(CostMode mode) { return mode == CostMode::unit ? "unit" : "literal"; }

CostMode cost_mode_from_string(std::string_view name) {
  if (name == "unit") return CostMode::unit;
  if (name == "literal") return CostMode::literal;
  throw ParameterError("unknown cost mode: " + std::string(name));
}

SaEncoder::SaEncoder(std::size_t source_count) : source_count_(source_count) {
  if (source_count_ == 0) throw ParameterError("SA encoder needs at least one source level");
}

std::size_t SaEncoder::encode(const SaState& s) const {
  if (s.importance >= source_count_ || (s.eack != 0 && s.eack != 1))
    throw EncodingError("SA state outside the encoder's space");
  return s.importance * 2 + static_cast<std::size_t>(s.eack);
}

SaState SaEncoder::decode(std::size_t index) const {
  if (index >= size()) throw EncodingError("SA state index out of range");
  return {index / 2, static_cast<int>(index % 2)};
}

std::string SaEncoder::label(std::size_t index) const {
  const SaState s = decode(index);
  return "i=" + std::to_string(s.importance + 1) + ",E=" + std::to_string(s.eack);
}

AaEncoder::AaEncoder(std::size_t received_count, int delta_max, int lateness_cap)
    : received_count_(received_count), delta_max_(delta_max), lateness_cap_(lateness_cap) {
  if (received_count_ == 0 || delta_max_ < 1 || lateness_cap_ < 1) throw ParameterError("invalid AA encoder dimensions");
}

std::size_t AaEncoder::encode(const AaState& s) const {
  if (s.usefulness >= received_count_ || s.aoi < 1 || s.aoi > delta_max_ || s.lateness < 1 || s.lateness > lateness_cap_)
    throw EncodingError("AA state outside the encoder's space");
  return (s.usefulness * static_cast<std::size_t>(delta_max_) + static_cast<std::size_t>(s.aoi - 1)) *
             static_cast<std::size_t>(lateness_cap_) +
         static_cast<std::size_t>(s.lateness - 1);
}

AaState AaEncoder::decode(std::size_t index) const {
  if (index >= size()) throw EncodingError("AA state index out of range");
  const auto cap = static_cast<std::size_t>(lateness_cap_);
  const auto dmax = static_cast<std::size_t>(delta_max_);
  return {index / (cap * dmax), static_cast<int>((index / cap) % dmax) + 1, static_cast<int>(index % cap) + 1};
}

std::string AaEncoder::label(std::size_t index) const {
  const AaState s = decode(index);
  return "j=" + std::to_string(s.usefulness) + ",D=" + std::to_string(s.aoi) + ",T=" + std::to_string(s.lateness);
}

double eack_success_probability(double transmitted, const std::vector<double>& target_pmf,
                                const UsefulnessLevels& target_levels) {
  double cdf = 0.0;
  for (std::size_t j = 0; j < target_levels.size(); ++j) {
    if (target_levels[j] <= transmitted + kLevelSlack) cdf += target_pmf[j];
  }
  return std::clamp(cdf, 0.0, 1.0);
}

CmdpModel build_sa_model(const SourceDistribution& source, const UsefulnessLevels& source_levels,
                         const std::vector<double>& target_pmf, const UsefulnessLevels& target_levels,
                         const GoeParams& params, const AgentModelOptions& options) {
  check_pmf(source.pmf, source_levels.size(), "source pmf");
  check_pmf(target_pmf, target_levels.size(), "target pmf");

  const SaEncoder enc(source_levels.size());
  std::vector<std::vector<Outcome>> rows(enc.size() * 2);
  std::vector<std::string> labels(enc.size());
  for (std::size_t s = 0; s < enc.size(); ++s) {
    labels[s] = enc.label(s);
    const SaState st = enc.decode(s);
    for (int a = 0; a < 2; ++a) {
      const double success = eack_success_probability(a * source_levels[st.importance], target_pmf, target_levels);
      auto& row = rows[s * 2 + static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < source_levels.size(); ++i) {
        const double pv = source.pmf[i];
        if (pv <= 0.0) continue;
        if (success < 1.0) row.push_back({enc.encode({i, 0}), pv * (1.0 - success), 0.0});
        if (success > 0.0) row.push_back({enc.encode({i, 1}), pv * success, 1.0});
      }
    }
  }
  return {enc.size(), 2, std::move(rows), action_costs(options.cost_mode, params.cost_tx),
          options.discount, options.budget, std::move(labels)};
}

CmdpModel build_aa_model(const std::vector<double>& received_pmf, const UsefulnessLevels& received_levels,
                         double p_erasure, const GoeParams& params, const AgentModelOptions& options) {
  params.validate();
  check_pmf(received_pmf, received_levels.size(), "received pmf");
  if (!(p_erasure >= 0.0 && p_erasure <= 1.0)) throw ModelError("erasure probability outside [0, 1]");

  const int dmax = params.delta_max;
  const int cap = params.lateness_cap();
  const AaEncoder enc(received_levels.size(), dmax, cap);
  const auto reward = [&](std::size_t j, int delta, int theta, int beta) {
    const double goe = goe_evaluate(received_levels[j], delta, theta, 1, beta, params);
    return static_cast<double>(effectiveness_indicator(goe, theta, params));
  };

  std::vector<std::vector<Outcome>> rows(enc.size() * 2);
  std::vector<std::string> labels(enc.size());
  for (std::size_t s = 0; s < enc.size(); ++s) {
    labels[s] = enc.label(s);
    const AaState st = enc.decode(s);
    const int aged = std::min(st.aoi + 1, dmax);

    const int later = std::min(st.lateness + 1, cap);
    rows[s * 2].push_back({enc.encode({st.usefulness, aged, later}), 1.0, reward(st.usefulness, aged, later, 0)});

    auto& pull = rows[s * 2 + 1];
    if (p_erasure > 0.0) pull.push_back({enc.encode({st.usefulness, aged, 1}), p_erasure, reward(st.usefulness, aged, 1, 1)});
    for (std::size_t j = 0; j < received_levels.size(); ++j) {
      const double p = (1.0 - p_erasure) * received_pmf[j];
      if (p > 0.0) pull.push_back({enc.encode({j, 1, 1}), p, reward(j, 1, 1, 1)});
    }
  }
  return {enc.size(), 2, std::move(rows), action_costs(options.cost_mode, params.cost_query),
          options.discount, options.budget, std::move(labels)};
}

TruncationReport validate_truncation(const GoeMetric& metric, const GoeParams& params, double eps_delta,
                                     double eps_theta, const UsefulnessLevels& received_levels) {
  TruncationReport report;
  // Smallest eps with prev <= (1 + eps) last; infinite when last is 0 but prev is not.
  const auto needed = [](double prev, double last) {
    if (prev <= last) return 0.0;
    if (last <= 0.0) return std::numeric_limits<double>::infinity();
    return prev / last - 1.0;
  };

  if (params.delta_max <= 1) {
    report.delta_vacuous = true;
  } else {
    for (std::size_t j = 0; j < received_levels.size(); ++j) {
      const double v = received_levels[j];
      report.min_eps_delta = std::max(
          report.min_eps_delta, needed(metric.g_delta(v, params.delta_max - 1), metric.g_delta(v, params.delta_max)));
    }
    report.delta_ok = eps_delta >= report.min_eps_delta - 1e-12;
  }

  if (params.theta_max <= 1) {
    report.theta_vacuous = true;
  } else {
    report.min_eps_theta = needed(metric.g_theta(params.theta_max - 1), metric.g_theta(params.theta_max));
    report.theta_ok = eps_theta >= report.min_eps_theta - 1e-12;
  }
  return report;
}

TruncationReport validate_truncation(const GoeParams& params, double eps_delta, double eps_theta,
                                     const UsefulnessLevels& received_levels) {
  return validate_truncation(GoeMetric::from_params(params), params, eps_delta, eps_theta, received_levels);
}

}  // namespace goe
