#include "goe/env_server.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "goe/error.hpp"
#include "goe/simulator.hpp"

namespace goe {

std::string_view to_string(AgentRole role) { return role == AgentRole::sa ? "sa" : "aa"; }

AgentRole agent_role_from_string(std::string_view name) {
  if (name == "sa") return AgentRole::sa;
  if (name == "aa") return AgentRole::aa;
  throw ParameterError("unknown agent role: " + std::string(name));
}

namespace {

void send(std::ostream& out, const nlohmann::json& msg) { out << msg.dump() << '\n' << std::flush; }

// Validated action value, or nullopt with `why` set.
std::optional<int> parse_action(const std::string& line, std::string& why) {
  const auto msg = nlohmann::json::parse(line, nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) {
    why = "message is not a JSON object";
    return std::nullopt;
  }
  const auto v = msg.find("v");
  if (v == msg.end() || !v->is_number_integer() || v->get<int>() != 1) {
    why = "missing or unsupported protocol version";
    return std::nullopt;
  }
  const auto type = msg.find("type");
  if (type == msg.end() || *type != "act") {
    why = "expected a message of type act";
    return std::nullopt;
  }
  const auto value = msg.find("value");
  if (value == msg.end() || !value->is_number_integer() || (value->get<int>() != 0 && value->get<int>() != 1)) {
    why = "act value must be 0 or 1";
    return std::nullopt;
  }
  return value->get<int>();
}

}  // namespace

int env_serve(const SimConfig& config, AgentRole role, std::istream& in, std::ostream& out) {
  Engine engine(config);
  const PolicyKind internal_kind = role == AgentRole::sa ? config.aa_policy : config.sa_policy;

  // An effect-aware counterpart needs its estimation horizon and solve first.
  std::optional<DecisionPolicy> internal;
  if (internal_kind == PolicyKind::effect_aware) {
    EstimationLog log;
    run_estimation_horizon(engine, log);
    const AgentSolutions fitted = fit_agents(config, log, role == AgentRole::aa, role == AgentRole::sa);
    internal = DecisionPolicy::effect_aware(role == AgentRole::sa ? fitted.aa : fitted.sa);
    engine.reset_state();
  } else {
    internal = agnostic_policy(internal_kind, role == AgentRole::sa ? config.query_rate : config.tx_rate);
  }
  const auto [sa_phase, aa_phase] = periodic_phases(config);
  PolicyCursor cursor(*internal, role == AgentRole::sa ? aa_phase : sa_phase);

  std::uint64_t episode = 0;
  std::uint64_t step = 0;
  std::string line;
  for (;;) {
    engine.begin_slot();
    nlohmann::json state;
    if (role == AgentRole::sa) {
      const SaState s = engine.sa_state();
      state = {s.importance, s.eack};
    } else {
      const AaState s = engine.aa_state();
      state = {s.usefulness, s.aoi, s.lateness};
    }
    send(out, {{"v", 1}, {"type", "obs"}, {"slot", engine.slot() + 1}, {"episode", episode}, {"state", state}});

    if (!std::getline(in, line)) return 0;
    std::string why;
    const std::optional<int> action = parse_action(line, why);
    if (!action) {
      send(out, {{"v", 1}, {"type", "error"}, {"message", why}});
      return 3;
    }

    SlotTrace t;
    if (role == AgentRole::sa) {
      const int beta = cursor.decide(engine.aa_state_index(), engine.aa_rng());
      t = engine.finish_slot(*action, beta);
    } else {
      const int alpha = cursor.decide(engine.sa_state_index(), engine.sa_rng());
      t = engine.finish_slot(alpha, *action);
    }
    const bool done = ++step == config.episode_length;
    send(out, {{"v", 1}, {"type", "rew"}, {"value", role == AgentRole::sa ? t.eack : t.effective}, {"done", done}});
    if (done) {
      step = 0;
      engine.reset_state();
      if (config.episodes != 0 && ++episode == config.episodes) return 0;
      if (config.episodes == 0) ++episode;
    }
  }
}

}  // namespace goe
