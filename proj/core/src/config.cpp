#include "goe/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "goe/error.hpp"

namespace goe {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::push: return "push";
    case ModelKind::pull: return "pull";
    case ModelKind::push_and_pull: return "push_and_pull";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "push") return ModelKind::push;
  if (name == "pull") return ModelKind::pull;
  if (name == "push_and_pull") return ModelKind::push_and_pull;
  throw ParameterError("unknown model kind: " + std::string(name));
}

int default_theta_max(ModelKind kind) {
  switch (kind) {
    case ModelKind::push: return 10;
    case ModelKind::pull: return 1;
    case ModelKind::push_and_pull: return 5;
  }
  return 5;
}

std::string pair_label(const PolicyPair& pair) {
  return std::string(to_string(pair.first)) + ":" + std::string(to_string(pair.second));
}

PolicyPair pair_from_label(std::string_view label) {
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) throw ParameterError("policy pair must look like sa_kind:aa_kind");
  return {policy_kind_from_string(label.substr(0, colon)), policy_kind_from_string(label.substr(colon + 1))};
}

std::vector<PolicyPair> standard_policy_pairs() {
  using K = PolicyKind;
  return {{K::effect_aware, K::effect_aware}, {K::effect_aware, K::periodic}, {K::effect_aware, K::markovian},
          {K::periodic, K::effect_aware},     {K::markovian, K::effect_aware}, {K::periodic, K::periodic},
          {K::markovian, K::markovian}};
}

void SimConfig::validate() const {
  const auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  if (e_horizon < 1 || d_horizon < 1) throw ConfigError("e_horizon and d_horizon must be >= 1");
  prob(p_erasure, "p_erasure");
  prob(p_erasure_ack, "p_erasure_ack");
  prob(tx_rate, "tx_rate");
  prob(query_rate, "query_rate");
  prob(eta, "eta");
  if (source_levels < 1 || received_levels != source_levels + 1 || target_levels < 1)
    throw ConfigError("level counts must satisfy received_levels = source_levels + 1");
  if (!(shape_a > 0.0) || !(shape_b > 0.0)) throw ConfigError("shape_a and shape_b must be positive");
  if (!(c_max_sa >= 0.0) || !(c_max_aa >= 0.0)) throw ConfigError("c_max values must be non-negative");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  if (!(eps_mu > 0.0) || !(eps_pi > 0.0)) throw ConfigError("eps_mu and eps_pi must be positive");
  if (series_stride < 1) throw ConfigError("series_stride must be >= 1");
  if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (policy_pairs.empty()) throw ConfigError("policy_pairs must not be empty");
  try {
    goe.validate();
    if (sa_policy == PolicyKind::markovian) markov_rate_to_p11(tx_rate);
    if (aa_policy == PolicyKind::markovian) markov_rate_to_p11(query_rate);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

using Setter = std::function<void(SimConfig&, const nlohmann::json&)>;

template <typename T>
Setter field(T SimConfig::*member) {
  return [member](SimConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); };
}

template <typename T>
Setter goe_field(T GoeParams::*member) {
  return [member](SimConfig& c, const nlohmann::json& v) { c.goe.*member = v.get<T>(); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"e_horizon", field(&SimConfig::e_horizon)},
      {"d_horizon", field(&SimConfig::d_horizon)},
      {"p_erasure", field(&SimConfig::p_erasure)},
      {"p_erasure_ack", field(&SimConfig::p_erasure_ack)},
      {"source_levels", field(&SimConfig::source_levels)},
      {"received_levels", field(&SimConfig::received_levels)},
      {"target_levels", field(&SimConfig::target_levels)},
      {"shape_a", field(&SimConfig::shape_a)},
      {"shape_b", field(&SimConfig::shape_b)},
      {"model", [](SimConfig& c, const nlohmann::json& v) { c.model = model_kind_from_string(v.get<std::string>()); }},
      {"cost_tx", goe_field(&GoeParams::cost_tx)},
      {"cost_query", goe_field(&GoeParams::cost_query)},
      {"cost_avail", goe_field(&GoeParams::cost_avail)},
      {"goe_target", goe_field(&GoeParams::goe_target)},
      {"delta_max", goe_field(&GoeParams::delta_max)},
      {"theta_max", goe_field(&GoeParams::theta_max)},
      {"window_rule",
       [](SimConfig& c, const nlohmann::json& v) { c.goe.window_rule = window_rule_from_string(v.get<std::string>()); }},
      {"goe_form", [](SimConfig& c, const nlohmann::json& v) { c.goe.form = goe_form_from_string(v.get<std::string>()); }},
      {"c_max_sa", field(&SimConfig::c_max_sa)},
      {"c_max_aa", field(&SimConfig::c_max_aa)},
      {"discount", field(&SimConfig::discount)},
      {"eps_mu", field(&SimConfig::eps_mu)},
      {"eps_pi", field(&SimConfig::eps_pi)},
      {"eta", field(&SimConfig::eta)},
      {"horizon_mode",
       [](SimConfig& c, const nlohmann::json& v) { c.horizon_mode = horizon_mode_from_string(v.get<std::string>()); }},
      {"cost_mode", [](SimConfig& c, const nlohmann::json& v) { c.cost_mode = cost_mode_from_string(v.get<std::string>()); }},
      {"tx_rate", field(&SimConfig::tx_rate)},
      {"query_rate", field(&SimConfig::query_rate)},
      {"sa_policy",
       [](SimConfig& c, const nlohmann::json& v) { c.sa_policy = policy_kind_from_string(v.get<std::string>()); }},
      {"aa_policy",
       [](SimConfig& c, const nlohmann::json& v) { c.aa_policy = policy_kind_from_string(v.get<std::string>()); }},
      {"seed", field(&SimConfig::seed)},
      {"random_phase", field(&SimConfig::random_phase)},
      {"series_stride", field(&SimConfig::series_stride)},
      {"episode_length", field(&SimConfig::episode_length)},
      {"episodes", field(&SimConfig::episodes)},
      {"policy_pairs",
       [](SimConfig& c, const nlohmann::json& v) {
         c.policy_pairs.clear();
         for (const auto& label : v) c.policy_pairs.push_back(pair_from_label(label.get<std::string>()));
       }},
      {"repetitions", field(&SimConfig::repetitions)},
      {"threads", field(&SimConfig::threads)},
  };
  return table;
}

}  // namespace

SimConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig config;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key: " + key);
    try {
      it->second(config, value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for " + key + ": " + e.what());
    } catch (const ParameterError& e) {
      throw ConfigError("bad value for " + key + ": " + e.what());
    }
  }
  if (!doc.contains("theta_max")) config.goe.theta_max = default_theta_max(config.model);
  config.validate();
  return config;
}

nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : c.policy_pairs) pairs.push_back(pair_label(p));
  return {
      {"e_horizon", c.e_horizon},
      {"d_horizon", c.d_horizon},
      {"p_erasure", c.p_erasure},
      {"p_erasure_ack", c.p_erasure_ack},
      {"source_levels", c.source_levels},
      {"received_levels", c.received_levels},
      {"target_levels", c.target_levels},
      {"shape_a", c.shape_a},
      {"shape_b", c.shape_b},
      {"model", to_string(c.model)},
      {"cost_tx", c.goe.cost_tx},
      {"cost_query", c.goe.cost_query},
      {"cost_avail", c.goe.cost_avail},
      {"goe_target", c.goe.goe_target},
      {"delta_max", c.goe.delta_max},
      {"theta_max", c.goe.theta_max},
      {"window_rule", to_string(c.goe.window_rule)},
      {"goe_form", to_string(c.goe.form)},
      {"c_max_sa", c.c_max_sa},
      {"c_max_aa", c.c_max_aa},
      {"discount", c.discount},
      {"eps_mu", c.eps_mu},
      {"eps_pi", c.eps_pi},
      {"eta", c.eta},
      {"horizon_mode", to_string(c.horizon_mode)},
      {"cost_mode", to_string(c.cost_mode)},
      {"tx_rate", c.tx_rate},
      {"query_rate", c.query_rate},
      {"sa_policy", to_string(c.sa_policy)},
      {"aa_policy", to_string(c.aa_policy)},
      {"seed", c.seed},
      {"random_phase", c.random_phase},
      {"series_stride", c.series_stride},
      {"episode_length", c.episode_length},
      {"episodes", c.episodes},
      {"policy_pairs", std::move(pairs)},
      {"repetitions", c.repetitions},
      {"threads", c.threads},
  };
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

std::uint64_t config_hash(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace goe
