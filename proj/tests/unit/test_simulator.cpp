#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "goe/config.hpp"
#include "goe/error.hpp"
#include "goe/simulator.hpp"

namespace goe {
namespace {

SimConfig small_config(std::uint64_t seed = 1) {
  SimConfig c;
  c.e_horizon = 3000;
  c.d_horizon = 6000;
  c.seed = seed;
  c.goe.theta_max = 5;
  return c;
}

// Re-derives every post-slot field from the pre-slot state and the slot's draws.
struct ReplayOracle {
  const SimConfig& config;
  const UsefulnessLevels source = UsefulnessLevels::source(config.source_levels);
  const UsefulnessLevels received = UsefulnessLevels::received(config.received_levels);
  std::size_t v_hat = 0;
  int delta = config.goe.delta_max;
  int theta = config.goe.lateness_cap();
  std::uint64_t slot = 0;

  void check(const SlotTrace& t) {
    const GoeParams& g = config.goe;
    ASSERT_EQ(t.slot, ++slot);
    theta = t.beta ? 1 : std::min(theta + 1, g.lateness_cap());
    const bool window = g.window_admits(theta);
    ASSERT_EQ(t.received, t.alpha && !t.forward_erased ? 1 : 0);
    ASSERT_EQ(t.acted, t.received && window ? 1 : 0);
    if (t.acted) {
      v_hat = received.index_of(source[t.v]);
      delta = 1;
    } else {
      delta = std::min(delta + 1, g.delta_max);
    }
    ASSERT_EQ(t.v_hat, v_hat);
    ASSERT_EQ(t.delta, delta);
    ASSERT_EQ(t.theta, theta);
    const double goe = received[v_hat] / (delta * theta) - g.cost_tx * t.alpha - g.cost_query * t.beta - g.cost_avail;
    ASSERT_NEAR(t.goe, goe, 1e-12);
    ASSERT_EQ(t.effective, t.acted && window && goe >= g.goe_target - 1e-12 ? 1 : 0);
    ASSERT_EQ(t.eack, t.effective && !t.backward_erased ? 1 : 0);
  }
};

TEST(Engine, ReplayMatchesTheSlotRules) {
  for (bool inclusive : {false, true}) {
    SimConfig c = small_config(4);
    if (inclusive) c.goe.window_rule = WindowRule::inclusive;
    Engine engine(c);
    ReplayOracle oracle{c};
    EstimationLog log;
    run_estimation_horizon(engine, log, [&](const SlotTrace& t) { oracle.check(t); });
    ASSERT_EQ(log.size(), c.e_horizon);
  }
}

TEST(Engine, InitialStateAndSaturation) {
  SimConfig c = small_config();
  Engine engine(c);
  EXPECT_EQ(engine.aa_state().aoi, 10);
  EXPECT_EQ(engine.aa_state().lateness, 5);
  EXPECT_EQ(engine.aa_state().usefulness, 0u);
  for (int k = 0; k < 30; ++k) {
    engine.begin_slot();
    const SlotTrace t = engine.finish_slot(0, 0);
    EXPECT_EQ(t.delta, 10);
    EXPECT_EQ(t.theta, 5);
    EXPECT_EQ(t.effective, 0);
    EXPECT_NEAR(t.goe, -0.01, 1e-15);
  }
}

TEST(Engine, SameSlotPushAndPullCanBeEffective) {
  SimConfig c = small_config(2);
  c.p_erasure = 0.0;
  c.p_erasure_ack = 0.0;
  Engine engine(c);
  int seen = 0;
  for (int k = 0; k < 200; ++k) {
    engine.begin_slot();
    const std::size_t v = engine.sa_state().importance;
    const SlotTrace t = engine.finish_slot(1, 1);
    EXPECT_EQ(t.acted, 1);
    EXPECT_EQ(t.delta, 1);
    EXPECT_EQ(t.theta, 1);
    // 0.9 - 0.21 = 0.69 clears the target; 0.8 - 0.21 does not.
    EXPECT_EQ(t.effective, v >= 8 ? 1 : 0);
    EXPECT_EQ(t.eack, t.effective);
    seen += t.effective;
  }
  EXPECT_GT(seen, 0);
}

TEST(Engine, ResetRestoresInitialState) {
  SimConfig c = small_config();
  Engine engine(c);
  engine.begin_slot();
  engine.finish_slot(1, 1);
  engine.reset_state();
  EXPECT_EQ(engine.aa_state().aoi, 10);
  EXPECT_EQ(engine.sa_state().eack, 0);
}

TEST(Run, IsDeterministicPerSeed) {
  const auto a = run(small_config(7)).metrics;
  const auto b = run(small_config(7)).metrics;
  const auto d = run(small_config(8)).metrics;
  EXPECT_EQ(a.avg_effectiveness, b.avg_effectiveness);
  EXPECT_EQ(a.avg_goe, b.avg_goe);
  EXPECT_EQ(a.effectiveness_series, b.effectiveness_series);
  EXPECT_NE(a.avg_goe, d.avg_goe);
}

TEST(Run, TraceHasOneRowPerSlot) {
  SimConfig c = small_config(5);
  c.sa_policy = PolicyKind::markovian;
  c.aa_policy = PolicyKind::periodic;
  std::stringstream trace;
  run(c, &trace);
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line.rfind("slot,horizon,v,alpha,beta", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, c.e_horizon + c.d_horizon);
}

TEST(Run, ConservationOfRates) {
  for (const auto& pair : standard_policy_pairs()) {
    SimConfig c = small_config(3);
    c.sa_policy = pair.first;
    c.aa_policy = pair.second;
    const Metrics m = run(c).metrics;
    EXPECT_LE(m.avg_effectiveness, m.action_rate + 1e-15) << m.policy_pair;
    EXPECT_LE(m.action_rate, m.reception_rate + 1e-15);
    EXPECT_LE(m.reception_rate, m.tx_rate + 1e-15);
    EXPECT_LE(m.eack_rate, m.avg_effectiveness + 1e-15);
    EXPECT_EQ(m.slots, c.d_horizon);
    ASSERT_FALSE(m.effectiveness_series.empty());
    EXPECT_EQ(m.effectiveness_series.back().first, c.e_horizon + c.d_horizon);
  }
}

TEST(Run, PullOnlyWindowIsNeverEffective) {
  SimConfig c = small_config(1);
  c.goe.theta_max = 1;
  for (const auto& pair : standard_policy_pairs()) {
    c.sa_policy = pair.first;
    c.aa_policy = pair.second;
    EXPECT_EQ(run(c).metrics.avg_effectiveness, 0.0) << pair_label(pair);
  }
}

TEST(Run, AlwaysOnLosslessCostFreeIsAlwaysEffective) {
  SimConfig c = small_config(1);
  c.sa_policy = c.aa_policy = PolicyKind::periodic;
  c.tx_rate = c.query_rate = 1.0;
  c.p_erasure = 0.0;
  c.goe.goe_target = 0.0;
  c.goe.cost_tx = c.goe.cost_query = c.goe.cost_avail = 0.0;
  const Metrics m = run(c).metrics;
  EXPECT_EQ(m.avg_effectiveness, 1.0);
  EXPECT_EQ(m.action_rate, 1.0);
}

TEST(Run, EackFidelityMatchesTheBackwardChannel) {
  SimConfig c = small_config(11);
  c.d_horizon = 200000;
  const Metrics m = run(c).metrics;
  ASSERT_GT(m.avg_effectiveness, 0.05);
  EXPECT_NEAR(m.eack_rate / m.avg_effectiveness, 1.0 - c.p_erasure_ack, 0.01);
}

TEST(Run, EffectAwareAgentsGetSolutions) {
  const RunResult r = run(small_config(2));
  ASSERT_TRUE(r.sa_solution);
  ASSERT_TRUE(r.aa_solution);
  EXPECT_EQ(r.sa_solution->policy_low.size(), 20u);
  EXPECT_EQ(r.aa_solution->policy_low.size(), 550u);
  EXPECT_EQ(r.estimates.q.size(), 11u);
  SimConfig c = small_config(2);
  c.sa_policy = c.aa_policy = PolicyKind::periodic;
  const RunResult agnostic = run(c);
  EXPECT_FALSE(agnostic.sa_solution);
  EXPECT_FALSE(agnostic.aa_solution);
}

TEST(Sweep, RowsCoverEveryValuePairAndRepetition) {
  SimConfig c = small_config();
  c.e_horizon = 500;
  c.d_horizon = 500;
  c.repetitions = 2;
  const std::vector<double> values = {1, 2, 3};
  const auto rows = sweep(c, SweepAxis::theta_max, values);
  ASSERT_EQ(rows.size(), values.size() * standard_policy_pairs().size() * 2);
  for (const auto& row : rows) EXPECT_TRUE(row.error.empty()) << row.error;
  EXPECT_EQ(rows[0].metrics.seed, 1u);
  EXPECT_EQ(rows[1].metrics.seed, 2u);
  EXPECT_EQ(rows.back().metrics.axis_value, 3.0);
  // Identical tasks produce identical rows regardless of scheduling.
  const auto again = sweep(c, SweepAxis::theta_max, values);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].metrics.avg_goe, again[k].metrics.avg_goe);
}

TEST(Sweep, AxisApplication) {
  const SimConfig c = small_config();
  EXPECT_EQ(apply_axis(c, SweepAxis::theta_max, 7).goe.theta_max, 7);
  const SimConfig cm = apply_axis(c, SweepAxis::c_max, 0.05);
  EXPECT_EQ(cm.c_max_sa, 0.05);
  EXPECT_EQ(cm.c_max_aa, 0.05);
  EXPECT_THROW(apply_axis(c, SweepAxis::theta_max, 2.5), ParameterError);
  EXPECT_THROW(apply_axis(c, SweepAxis::tx_rate, 1.5), ParameterError);
  EXPECT_THROW(sweep_axis_from_string("budget"), ParameterError);
}

TEST(Config, DefaultsFollowTheModelKind) {
  EXPECT_EQ(config_from_json(nlohmann::json::object()).goe.theta_max, 5);
  EXPECT_EQ(config_from_json({{"model", "push"}}).goe.theta_max, 10);
  EXPECT_EQ(config_from_json({{"model", "pull"}}).goe.theta_max, 1);
  EXPECT_EQ(config_from_json({{"model", "pull"}, {"theta_max", 3}}).goe.theta_max, 3);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json({{"e_horizonn", 5}}), ConfigError);
  EXPECT_THROW(config_from_json({{"p_erasure", 1.5}}), ConfigError);
  EXPECT_THROW(config_from_json({{"p_erasure", "high"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"received_levels", 5}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, JsonRoundTripAndHash) {
  SimConfig c = small_config(9);
  c.policy_pairs = {{PolicyKind::markovian, PolicyKind::effect_aware}};
  c.goe.window_rule = WindowRule::inclusive;
  const SimConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  c.seed = 10;
  EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Config, PairLabels) {
  const auto pairs = standard_policy_pairs();
  EXPECT_EQ(pairs.size(), 7u);
  for (const auto& p : pairs) EXPECT_EQ(pair_from_label(pair_label(p)), p);
  EXPECT_THROW(pair_from_label("periodic"), ParameterError);
}

}  // namespace
}  // namespace goe
