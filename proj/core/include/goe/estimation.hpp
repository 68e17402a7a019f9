#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "goe/domain.hpp"

namespace goe {

// One E-horizon slot as seen by the estimators. Indices refer to the source
// and received level sets; eack is the E-ACK after the backward channel.
struct EstimationRecord {
  std::size_t v = 0;
  std::size_t v_hat = 0;
  int eack = 0;
};

struct EstimationLog {
  std::vector<EstimationRecord> records;

  std::size_t size() const { return records.size(); }
  void add(std::size_t v, std::size_t v_hat, int eack) { records.push_back({v, v_hat, eack}); }
};

struct EstimatedPmfs {
  std::vector<double> q;                         // over the received levels
  std::array<double, 2> pr_eack{1.0, 0.0};       // Pr(E-ACK = 0), Pr(E-ACK = 1)
  std::vector<double> target_pmf;                // over the target levels
  std::array<std::vector<double>, 2> conditionals;  // p(v | E-ACK = e); empty when e never occurred
  std::vector<std::string> warnings;
};

std::vector<double> estimate_received_pmf(const EstimationLog& log, const UsefulnessLevels& received_levels);
std::array<double, 2> estimate_eack_prob(const EstimationLog& log);
// Throws EstimationError when e never occurs in the log.
std::vector<double> estimate_conditional_importance(const EstimationLog& log, const UsefulnessLevels& source_levels,
                                                    int e);
std::vector<double> estimate_target_pmf(const EstimationLog& log, const UsefulnessLevels& source_levels,
                                        const UsefulnessLevels& target_levels);

// Un-normalized per-level numerators of the mapped target pmf for one E-ACK
// branch: tail sums of p(v | 1) at or above each level, head sums of p(v | 0)
// strictly below it.
std::vector<double> target_numerators(const std::vector<double>& conditional, const UsefulnessLevels& source_levels,
                                      const UsefulnessLevels& target_levels, int e);

EstimatedPmfs estimate_all(const EstimationLog& log, const UsefulnessLevels& source_levels,
                           const UsefulnessLevels& received_levels, const UsefulnessLevels& target_levels);

// CSV with columns slot,v,v_hat,eack holding level values.
void write_log_csv(std::ostream& out, const EstimationLog& log, const UsefulnessLevels& source_levels,
                   const UsefulnessLevels& received_levels);
EstimationLog read_log_csv(std::istream& in, const UsefulnessLevels& source_levels,
                           const UsefulnessLevels& received_levels);

nlohmann::json to_json(const EstimatedPmfs& pmfs);

}  // namespace goe
