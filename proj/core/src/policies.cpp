#include "goe/policies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "goe/error.hpp"

namespace goe {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::effect_aware: return "effect_aware";
    case PolicyKind::periodic: return "periodic";
    case PolicyKind::markovian: return "markovian";
  }
  return "?";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "effect_aware") return PolicyKind::effect_aware;
  if (name == "periodic") return PolicyKind::periodic;
  if (name == "markovian") return PolicyKind::markovian;
  throw ParameterError("unknown policy kind: " + std::string(name));
}

double markov_rate_to_p11(double rate, double stay_idle) {
  if (!(stay_idle >= 0.0 && stay_idle < 1.0)) throw ParameterError("p00 must lie in [0, 1)");
  const double leave = 1.0 - stay_idle;
  const double floor = leave / (leave + 1.0);
  if (!(rate <= 1.0) || rate < floor - 1e-12)
    throw ParameterError("Markov rate " + std::to_string(rate) + " outside [" + std::to_string(floor) + ", 1]");
  // Stationary mass of state 1 is leave / (leave + 1 - p11).
  return std::clamp(1.0 - leave * (1.0 - rate) / rate, 0.0, 1.0);
}

DecisionPolicy DecisionPolicy::effect_aware(std::shared_ptr<const PolicySolution> solution) {
  if (!solution) throw ParameterError("effect-aware policy needs a solution");
  DecisionPolicy p;
  p.kind_ = PolicyKind::effect_aware;
  p.solution_ = std::move(solution);
  return p;
}

DecisionPolicy DecisionPolicy::periodic(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("periodic rate must lie in [0, 1]");
  DecisionPolicy p;
  p.kind_ = PolicyKind::periodic;
  p.rate_ = rate;
  return p;
}

DecisionPolicy DecisionPolicy::markovian(double rate, double stay_idle) {
  DecisionPolicy p;
  p.kind_ = PolicyKind::markovian;
  p.rate_ = rate;
  p.p00_ = stay_idle;
  p.p11_ = markov_rate_to_p11(rate, stay_idle);
  return p;
}

std::uint64_t periodic_emitted(double rate, std::uint64_t k) {
  // ceil with a guard so exact products such as 0.8 * 5 are not pushed up.
  return static_cast<std::uint64_t>(std::ceil(rate * static_cast<double>(k) - 1e-9));
}

PolicyCursor::PolicyCursor(const DecisionPolicy& policy, std::uint64_t phase) : policy_(&policy), phase_(phase) {}

int PolicyCursor::decide(std::size_t state, Rng& rng) {
  const std::uint64_t k = step_++;
  switch (policy_->kind()) {
    case PolicyKind::periodic: {
      const std::uint64_t at = k + phase_;
      return periodic_emitted(policy_->rate(), at + 1) > periodic_emitted(policy_->rate(), at) ? 1 : 0;
    }
    case PolicyKind::markovian: {
      const double stay = chain_state_ == 0 ? policy_->p00() : policy_->p11();
      if (!rng.bernoulli(stay)) chain_state_ = 1 - chain_state_;
      return chain_state_;
    }
    case PolicyKind::effect_aware: {
      const PolicySolution& sol = *policy_->solution();
      if (state >= sol.policy_low.size()) throw EncodingError("state outside the policy table");
      return sol.act(state, rng);
    }
  }
  return 0;
}

const AxisThresholds& ThresholdReport::axis(std::string_view name) const {
  for (const auto& a : axes) {
    if (a.axis == name) return a;
  }
  throw ParameterError("no threshold axis named " + std::string(name));
}

namespace {

// Scans one line of actions at axis positions values[0..n) and records the
// first acting position plus whether the line is a single 0 -> 1 step.
void scan_line(AxisThresholds& out, std::string label, const std::vector<int>& actions, const std::vector<int>& values) {
  std::optional<int> first;
  bool structured = true;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (actions[k] == 1 && !first) first = values[k];
    if (actions[k] == 0 && first) structured = false;
  }
  out.line_labels.push_back(std::move(label));
  out.thresholds.push_back(first);
  out.threshold_structured = out.threshold_structured && structured;
}

std::vector<int> iota_from(int start, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) v[static_cast<std::size_t>(k)] = start + k;
  return v;
}

int acts(std::optional<int> threshold, int value) { return threshold && value >= *threshold ? 1 : 0; }

}  // namespace

ThresholdReport extract_sa_thresholds(const PolicyTable& policy, const SaEncoder& encoder) {
  if (policy.size() != encoder.size()) throw EncodingError("policy does not match the SA encoder");
  const auto n = static_cast<int>(encoder.source_count());
  ThresholdReport report{"sa", {{"importance", {}, {}, true}, {"eack", {}, {}, true}}};
  for (int e = 0; e < 2; ++e) {
    std::vector<int> line;
    for (int i = 0; i < n; ++i) line.push_back(policy[encoder.encode({static_cast<std::size_t>(i), e})]);
    scan_line(report.axes[0], "E=" + std::to_string(e), line, iota_from(1, n));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> line;
    for (int e = 0; e < 2; ++e) line.push_back(policy[encoder.encode({static_cast<std::size_t>(i), e})]);
    scan_line(report.axes[1], "i=" + std::to_string(i + 1), line, {0, 1});
  }
  return report;
}

ThresholdReport extract_aa_thresholds(const PolicyTable& policy, const AaEncoder& encoder) {
  if (policy.size() != encoder.size()) throw EncodingError("policy does not match the AA encoder");
  const auto nj = static_cast<int>(encoder.received_count());
  const int nd = encoder.delta_max();
  const int nt = encoder.lateness_cap();
  const auto at = [&](int j, int d, int t) { return policy[encoder.encode({static_cast<std::size_t>(j), d, t})]; };

  ThresholdReport report{"aa", {{"usefulness", {}, {}, true}, {"aoi", {}, {}, true}, {"lateness", {}, {}, true}}};
  for (int d = 1; d <= nd; ++d) {
    for (int t = 1; t <= nt; ++t) {
      std::vector<int> line;
      for (int j = 0; j < nj; ++j) line.push_back(at(j, d, t));
      scan_line(report.axes[0], "D=" + std::to_string(d) + ",T=" + std::to_string(t), line, iota_from(0, nj));
    }
  }
  for (int j = 0; j < nj; ++j) {
    for (int t = 1; t <= nt; ++t) {
      std::vector<int> line;
      for (int d = 1; d <= nd; ++d) line.push_back(at(j, d, t));
      scan_line(report.axes[1], "j=" + std::to_string(j) + ",T=" + std::to_string(t), line, iota_from(1, nd));
    }
  }
  for (int j = 0; j < nj; ++j) {
    for (int d = 1; d <= nd; ++d) {
      std::vector<int> line;
      for (int t = 1; t <= nt; ++t) line.push_back(at(j, d, t));
      scan_line(report.axes[2], "j=" + std::to_string(j) + ",D=" + std::to_string(d), line, iota_from(1, nt));
    }
  }
  return report;
}

PolicyTable rebuild_sa_policy(const ThresholdReport& report, const SaEncoder& encoder) {
  const auto& ax = report.axis("importance");
  if (ax.thresholds.size() != 2) throw EncodingError("SA importance axis must have one line per E-ACK value");
  PolicyTable policy(encoder.size(), 0);
  for (std::size_t s = 0; s < encoder.size(); ++s) {
    const SaState st = encoder.decode(s);
    policy[s] = acts(ax.thresholds[static_cast<std::size_t>(st.eack)], static_cast<int>(st.importance) + 1);
  }
  return policy;
}

PolicyTable rebuild_aa_policy(const ThresholdReport& report, const AaEncoder& encoder, std::string_view axis) {
  const auto& ax = report.axis(axis);
  const auto nd = static_cast<std::size_t>(encoder.delta_max());
  const auto nt = static_cast<std::size_t>(encoder.lateness_cap());
  PolicyTable policy(encoder.size(), 0);
  for (std::size_t s = 0; s < encoder.size(); ++s) {
    const AaState st = encoder.decode(s);
    const auto d = static_cast<std::size_t>(st.aoi - 1);
    const auto t = static_cast<std::size_t>(st.lateness - 1);
    if (axis == "usefulness") {
      policy[s] = acts(ax.thresholds[d * nt + t], static_cast<int>(st.usefulness));
    } else if (axis == "aoi") {
      policy[s] = acts(ax.thresholds[st.usefulness * nt + t], st.aoi);
    } else {
      policy[s] = acts(ax.thresholds[st.usefulness * nd + d], st.lateness);
    }
  }
  return policy;
}

nlohmann::json to_json(const ThresholdReport& report) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : report.axes) {
    nlohmann::json lines = nlohmann::json::array();
    for (std::size_t k = 0; k < a.thresholds.size(); ++k) {
      lines.push_back({{"line", a.line_labels[k]},
                       {"threshold", a.thresholds[k] ? nlohmann::json(*a.thresholds[k]) : nlohmann::json(nullptr)}});
    }
    axes.push_back({{"axis", a.axis}, {"threshold_structured", a.threshold_structured}, {"lines", std::move(lines)}});
  }
  return {{"agent", report.agent}, {"axes", std::move(axes)}};
}

namespace {

nlohmann::json solution_header(const PolicySolution& solution, std::string_view agent) {
  return {
      {"format", "goe.lookup_map"},
      {"version", 1},
      {"agent", agent},
      {"multiplier", solution.multiplier},
      {"mix_prob", solution.mix_prob},
      {"deterministic", solution.deterministic()},
  };
}

}  // namespace

nlohmann::json sa_lookup_map(const PolicySolution& solution, const SaEncoder& encoder,
                             const UsefulnessLevels& source_levels) {
  if (solution.policy_low.size() != encoder.size()) throw EncodingError("solution does not match the SA encoder");
  nlohmann::json doc = solution_header(solution, "sa");
  doc["axes"] = {{{"name", "importance"}, {"values", std::vector<double>(source_levels.values().begin(),
                                                                         source_levels.values().end())}},
                 {{"name", "eack"}, {"values", {0, 1}}}};
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t s = 0; s < encoder.size(); ++s) {
    const SaState st = encoder.decode(s);
    cells.push_back({{"state", s},
                     {"coords", {st.importance, st.eack}},
                     {"action_low", solution.policy_low[s]},
                     {"action_high", solution.policy_high[s]}});
  }
  doc["cells"] = std::move(cells);
  doc["thresholds_low"] = to_json(extract_sa_thresholds(solution.policy_low, encoder));
  doc["thresholds_high"] = to_json(extract_sa_thresholds(solution.policy_high, encoder));
  return doc;
}

nlohmann::json aa_lookup_map(const PolicySolution& solution, const AaEncoder& encoder,
                             const UsefulnessLevels& received_levels) {
  if (solution.policy_low.size() != encoder.size()) throw EncodingError("solution does not match the AA encoder");
  nlohmann::json doc = solution_header(solution, "aa");
  doc["axes"] = {
      {{"name", "usefulness"},
       {"values", std::vector<double>(received_levels.values().begin(), received_levels.values().end())}},
      {{"name", "aoi"}, {"values", iota_from(1, encoder.delta_max())}},
      {{"name", "lateness"}, {"values", iota_from(1, encoder.lateness_cap())}},
  };
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t s = 0; s < encoder.size(); ++s) {
    const AaState st = encoder.decode(s);
    cells.push_back({{"state", s},
                     {"coords", {st.usefulness, st.aoi, st.lateness}},
                     {"action_low", solution.policy_low[s]},
                     {"action_high", solution.policy_high[s]}});
  }
  doc["cells"] = std::move(cells);
  doc["thresholds_low"] = to_json(extract_aa_thresholds(solution.policy_low, encoder));
  doc["thresholds_high"] = to_json(extract_aa_thresholds(solution.policy_high, encoder));
  return doc;
}

std::vector<std::size_t> lookup_map_mismatches(const nlohmann::json& map, const PolicySolution& solution) {
  try {
    if (map.at("format") != "goe.lookup_map") throw ParameterError("not a lookup map document");
    const auto& cells = map.at("cells");
    if (cells.size() != solution.policy_low.size()) throw ParameterError("lookup map size differs from the solution");
    std::vector<std::size_t> bad;
    for (const auto& cell : cells) {
      const auto s = cell.at("state").get<std::size_t>();
      if (s >= solution.policy_low.size()) throw ParameterError("lookup map cell out of range");
      if (cell.at("action_low").get<int>() != solution.policy_low[s] ||
          cell.at("action_high").get<int>() != solution.policy_high[s])
        bad.push_back(s);
    }
    return bad;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed lookup map: ") + e.what());
  }
}

}  // namespace goe
