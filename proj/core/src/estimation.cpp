#include "goe/estimation.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "goe/error.hpp"

namespace goe {

namespace {

constexpr double kLevelSlack = 1e-9;

void require_nonempty(const EstimationLog& log) {
  if (log.records.empty()) throw EstimationError("estimation log is empty");
}

std::vector<double> normalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0.0) {
    for (double& x : v) x /= total;
  }
  return v;
}

}  // namespace

std::vector<double> estimate_received_pmf(const EstimationLog& log, const UsefulnessLevels& received_levels) {
  require_nonempty(log);
  std::vector<double> counts(received_levels.size(), 0.0);
  for (const auto& r : log.records) {
    if (r.v_hat >= counts.size()) throw EstimationError("received level index out of range");
    counts[r.v_hat] += 1.0;
  }
  const double m = static_cast<double>(log.size());
  for (double& c : counts) c /= m;
  return counts;
}

std::array<double, 2> estimate_eack_prob(const EstimationLog& log) {
  require_nonempty(log);
  std::size_t ones = 0;
  for (const auto& r : log.records) ones += r.eack == 1 ? 1 : 0;
  const std::size_t zeros = log.size() - ones;
  const double m = static_cast<double>(log.size());
  return {static_cast<double>(zeros) / m, static_cast<double>(ones) / m};
}

std::vector<double> estimate_conditional_importance(const EstimationLog& log, const UsefulnessLevels& source_levels,
                                                    int e) {
  require_nonempty(log);
  std::vector<double> joint(source_levels.size(), 0.0);
  std::size_t hits = 0;
  for (const auto& r : log.records) {
    if (r.v >= joint.size()) throw EstimationError("source level index out of range");
    if (r.eack == e) {
      joint[r.v] += 1.0;
      ++hits;
    }
  }
  if (hits == 0) throw EstimationError("E-ACK outcome " + std::to_string(e) + " never occurs in the log");
  // Joint frequency over the marginal frequency; the 1/M factors cancel.
  for (double& j : joint) j /= static_cast<double>(hits);
  return joint;
}

std::vector<double> target_numerators(const std::vector<double>& conditional, const UsefulnessLevels& source_levels,
                                      const UsefulnessLevels& target_levels, int e) {
  std::vector<double> num(target_levels.size(), 0.0);
  for (std::size_t j = 0; j < target_levels.size(); ++j) {
    for (std::size_t i = 0; i < source_levels.size(); ++i) {
      const bool counted = e == 1 ? source_levels[i] >= target_levels[j] - kLevelSlack
                                  : source_levels[i] < target_levels[j] - kLevelSlack;
      if (counted) num[j] += conditional[i];
    }
  }
  return num;
}

namespace {

// Combined target pmf plus the branches that contributed.
std::vector<double> combine_target(const EstimationLog& log, const UsefulnessLevels& source_levels,
                                   const UsefulnessLevels& target_levels, EstimatedPmfs* detail) {
  const auto pr = estimate_eack_prob(log);
  std::vector<double> out(target_levels.size(), 0.0);
  double weight = 0.0;
  for (int e = 0; e < 2; ++e) {
    if (pr[static_cast<std::size_t>(e)] <= 0.0) {
      if (detail) detail->warnings.push_back("no slots with E-ACK=" + std::to_string(e) + "; branch dropped");
      continue;
    }
    auto cond = estimate_conditional_importance(log, source_levels, e);
    const auto branch = normalized(target_numerators(cond, source_levels, target_levels, e));
    if (detail) detail->conditionals[static_cast<std::size_t>(e)] = std::move(cond);
    if (std::accumulate(branch.begin(), branch.end(), 0.0) <= 0.0) {
      if (detail) detail->warnings.push_back("E-ACK=" + std::to_string(e) + " branch has no mass; dropped");
      continue;
    }
    weight += pr[static_cast<std::size_t>(e)];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += pr[static_cast<std::size_t>(e)] * branch[j];
  }
  if (weight <= 0.0) throw EstimationError("no E-ACK branch yields a target pmf");
  for (double& x : out) x /= weight;
  return out;
}

}  // namespace

std::vector<double> estimate_target_pmf(const EstimationLog& log, const UsefulnessLevels& source_levels,
                                        const UsefulnessLevels& target_levels) {
  return combine_target(log, source_levels, target_levels, nullptr);
}

EstimatedPmfs estimate_all(const EstimationLog& log, const UsefulnessLevels& source_levels,
                           const UsefulnessLevels& received_levels, const UsefulnessLevels& target_levels) {
  EstimatedPmfs out;
  out.q = estimate_received_pmf(log, received_levels);
  out.pr_eack = estimate_eack_prob(log);
  out.target_pmf = combine_target(log, source_levels, target_levels, &out);
  return out;
}

void write_log_csv(std::ostream& out, const EstimationLog& log, const UsefulnessLevels& source_levels,
                   const UsefulnessLevels& received_levels) {
  out << "slot,v,v_hat,eack\n";
  for (std::size_t m = 0; m < log.size(); ++m) {
    const auto& r = log.records[m];
    out << m + 1 << ',' << source_levels[r.v] << ',' << received_levels[r.v_hat] << ',' << r.eack << '\n';
  }
}

EstimationLog read_log_csv(std::istream& in, const UsefulnessLevels& source_levels,
                           const UsefulnessLevels& received_levels) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("slot,v,v_hat,eack", 0) != 0)
    throw EstimationError("log CSV must start with the header slot,v,v_hat,eack");
  EstimationLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string slot, v, v_hat, eack;
    if (!std::getline(row, slot, ',') || !std::getline(row, v, ',') || !std::getline(row, v_hat, ',') ||
        !std::getline(row, eack))
      throw EstimationError("malformed log CSV line " + std::to_string(line_no));
    try {
      const int e = std::stoi(eack);
      if (e != 0 && e != 1) throw EstimationError("eack must be 0 or 1 on line " + std::to_string(line_no));
      log.add(source_levels.index_of(std::stod(v)), received_levels.index_of(std::stod(v_hat)), e);
    } catch (const std::logic_error&) {
      throw EstimationError("malformed number on log CSV line " + std::to_string(line_no));
    } catch (const DomainError& err) {
      throw EstimationError("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return log;
}

nlohmann::json to_json(const EstimatedPmfs& pmfs) {
  nlohmann::json doc = {
      {"format", "goe.estimated_pmfs"},
      {"version", 1},
      {"q", pmfs.q},
      {"pr_eack", pmfs.pr_eack},
      {"target_pmf", pmfs.target_pmf},
      {"warnings", pmfs.warnings},
  };
  for (int e = 0; e < 2; ++e) {
    const auto& c = pmfs.conditionals[static_cast<std::size_t>(e)];
    doc["conditional_importance"][std::to_string(e)] = c.empty() ? nlohmann::json(nullptr) : nlohmann::json(c);
  }
  return doc;
}

}  // namespace goe
