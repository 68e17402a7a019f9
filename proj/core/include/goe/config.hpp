#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "goe/agents.hpp"
#include "goe/cmdp.hpp"
#include "goe/domain.hpp"
#include "goe/policies.hpp"

namespace goe {

// push: wide fixed window (10 slots); pull: query-only window of 1 slot;
// push_and_pull: configurable window (5 slots by default).
enum class ModelKind { push, pull, push_and_pull };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);
int default_theta_max(ModelKind kind);

using PolicyPair = std::pair<PolicyKind, PolicyKind>;  // (SA, AA)

std::string pair_label(const PolicyPair& pair);
PolicyPair pair_from_label(std::string_view label);
// The seven combinations compared in the experiments.
std::vector<PolicyPair> standard_policy_pairs();

struct SimConfig {
  std::uint64_t e_horizon = 100'000;
  std::uint64_t d_horizon = 400'000;
  double p_erasure = 0.2;
  double p_erasure_ack = 0.1;

  std::size_t source_levels = 10;
  std::size_t received_levels = 11;
  std::size_t target_levels = 11;
  double shape_a = 0.3;
  double shape_b = 0.3;

  ModelKind model = ModelKind::push_and_pull;
  GoeParams goe;  // theta_max follows `model` unless set explicitly

  double c_max_sa = 0.08;
  double c_max_aa = 0.08;
  double discount = 0.75;
  double eps_mu = 1e-4;
  double eps_pi = 1e-4;
  double eta = 0.5;
  HorizonMode horizon_mode = HorizonMode::stationary_average;
  CostMode cost_mode = CostMode::unit;

  double tx_rate = 0.8;
  double query_rate = 0.8;
  PolicyKind sa_policy = PolicyKind::effect_aware;
  PolicyKind aa_policy = PolicyKind::effect_aware;

  std::uint64_t seed = 1;
  bool random_phase = true;
  std::uint64_t series_stride = 1000;

  std::uint64_t episode_length = 512;
  std::uint64_t episodes = 0;  // 0: serve until the client closes the stream

  std::vector<PolicyPair> policy_pairs = standard_policy_pairs();
  std::uint64_t repetitions = 1;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
  PolicyPair pair() const { return {sa_policy, aa_policy}; }
};

// Throws ConfigError on unknown keys, wrong types, or invalid values.
SimConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SimConfig& config);
SimConfig load_config(const std::string& path);

// FNV-1a of the canonical JSON dump.
std::uint64_t config_hash(const SimConfig& config);

}  // namespace goe
