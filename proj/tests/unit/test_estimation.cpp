#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "goe/domain.hpp"
#include "goe/error.hpp"
#include "goe/estimation.hpp"
#include "support/oracles.hpp"

namespace goe {
namespace {

const UsefulnessLevels kSource = UsefulnessLevels::source();
const UsefulnessLevels kReceived = UsefulnessLevels::received();
const UsefulnessLevels kTarget = UsefulnessLevels::target();

testing::SyntheticLogModel table_model() {
  testing::SyntheticLogModel model;
  model.source_pmf = beta_binomial_pmf(10, 0.3, 0.3);
  return model;
}

TEST(Estimation, EmptyLogThrows) {
  const EstimationLog empty;
  EXPECT_THROW(estimate_received_pmf(empty, kReceived), EstimationError);
  EXPECT_THROW(estimate_eack_prob(empty), EstimationError);
  EXPECT_THROW(estimate_target_pmf(empty, kSource, kTarget), EstimationError);
}

TEST(Estimation, HandCountedLog) {
  EstimationLog log;
  log.add(0, 0, 0);
  log.add(4, 5, 0);
  log.add(8, 9, 1);
  log.add(9, 10, 1);
  const auto q = estimate_received_pmf(log, kReceived);
  EXPECT_DOUBLE_EQ(q[0], 0.25);
  EXPECT_DOUBLE_EQ(q[5], 0.25);
  EXPECT_DOUBLE_EQ(q[10], 0.25);
  EXPECT_DOUBLE_EQ(q[1], 0.0);
  const auto pe = estimate_eack_prob(log);
  EXPECT_DOUBLE_EQ(pe[0], 0.5);
  EXPECT_DOUBLE_EQ(pe[1], 0.5);
  const auto c1 = estimate_conditional_importance(log, kSource, 1);
  EXPECT_DOUBLE_EQ(c1[8], 0.5);
  EXPECT_DOUBLE_EQ(c1[9], 0.5);
  EXPECT_DOUBLE_EQ(std::accumulate(c1.begin(), c1.end(), 0.0), 1.0);
}

TEST(Estimation, ConditioningOnAnAbsentOutcomeThrows) {
  EstimationLog log;
  log.add(3, 0, 0);
  EXPECT_THROW(estimate_conditional_importance(log, kSource, 1), EstimationError);
}

TEST(Estimation, ThreeLevelTargetExample) {
  // Levels {0.2, 0.5, 0.8}; v = 0.8 always acknowledged, the rest never.
  const UsefulnessLevels src(LevelKind::source, {0.2, 0.5, 0.8});
  const UsefulnessLevels tgt(LevelKind::target, {0.2, 0.5, 0.8});
  EstimationLog log;
  log.add(0, 0, 0);
  log.add(1, 0, 0);
  log.add(2, 0, 1);
  // E=1: p(v|1) = (0,0,1), tail sums (1,1,1) -> (1/3,1/3,1/3).
  // E=0: p(v|0) = (1/2,1/2,0), head sums (0,1/2,1) -> (0,1/3,2/3).
  const auto t = estimate_target_pmf(log, src, tgt);
  EXPECT_NEAR(t[0], (1.0 / 3) * (1.0 / 3), 1e-15);
  EXPECT_NEAR(t[1], (1.0 / 3) * (1.0 / 3) + (2.0 / 3) * (1.0 / 3), 1e-15);
  EXPECT_NEAR(t[2], (1.0 / 3) * (1.0 / 3) + (2.0 / 3) * (2.0 / 3), 1e-15);
}

TEST(Estimation, UniformWhenEveryOutcomeIsAcknowledged) {
  const UsefulnessLevels src(LevelKind::source, {0.2, 0.5, 0.8});
  EstimationLog log;
  log.add(2, 0, 1);
  const auto all = estimate_all(log, src, UsefulnessLevels::received(4), src);
  for (double x : all.target_pmf) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
  ASSERT_EQ(all.warnings.size(), 1u);
  EXPECT_TRUE(all.conditionals[0].empty());
}

TEST(Estimation, NumeratorsAreMonotone) {
  const auto cond = beta_binomial_pmf(10, 0.3, 0.3);
  const auto tail = target_numerators(cond, kSource, kTarget, 1);
  const auto head = target_numerators(cond, kSource, kTarget, 0);
  for (std::size_t j = 1; j < tail.size(); ++j) {
    EXPECT_LE(tail[j], tail[j - 1] + 1e-15);
    EXPECT_GE(head[j], head[j - 1] - 1e-15);
  }
  EXPECT_NEAR(tail[0], 1.0, 1e-12);
  EXPECT_NEAR(head[0], 0.0, 1e-15);
}

TEST(Estimation, BothBranchesMasslessThrows) {
  // A single level at 1.0: head sums are all zero and no slot is acknowledged.
  const UsefulnessLevels src(LevelKind::source, {1.0});
  const UsefulnessLevels tgt(LevelKind::target, {0.0, 1.0});
  EstimationLog log;
  log.add(0, 0, 0);
  EXPECT_THROW(estimate_target_pmf(log, src, tgt), EstimationError);
}

TEST(Estimation, ReceivedPmfMeetsTheDkwBound) {
  const auto model = table_model();
  const auto truth = model.true_q();
  const std::size_t m = 20000;
  // DKW at 99.9%: eps = sqrt(ln(2/0.001) / (2 m)); the pmf error is at most twice the CDF error.
  const double eps = 2.0 * std::sqrt(std::log(2.0 / 0.001) / (2.0 * m));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = estimate_received_pmf(model.sample(m, seed), kReceived);
    ASSERT_LT(testing::linf(q, truth), eps) << "seed " << seed;
  }
}

TEST(Estimation, TargetConvergesToTheExactMapping) {
  const auto model = table_model();
  const auto truth = model.true_target(kTarget);
  EXPECT_NEAR(std::accumulate(truth.begin(), truth.end(), 0.0), 1.0, 1e-12);
  const auto est = estimate_target_pmf(model.sample(400000, 3), kSource, kTarget);
  EXPECT_LT(testing::linf(est, truth), 0.01);
}

TEST(Estimation, CsvRoundTrip) {
  const auto log = table_model().sample(500, 9);
  std::stringstream buffer;
  write_log_csv(buffer, log, kSource, kReceived);
  const auto back = read_log_csv(buffer, kSource, kReceived);
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    EXPECT_EQ(back.records[k].v, log.records[k].v);
    EXPECT_EQ(back.records[k].v_hat, log.records[k].v_hat);
    EXPECT_EQ(back.records[k].eack, log.records[k].eack);
  }
}

TEST(Estimation, CsvRejectsMalformedInput) {
  std::stringstream no_header("1,0.1,0,0\n");
  EXPECT_THROW(read_log_csv(no_header, kSource, kReceived), EstimationError);
  std::stringstream off_grid("slot,v,v_hat,eack\n1,0.15,0,0\n");
  EXPECT_THROW(read_log_csv(off_grid, kSource, kReceived), EstimationError);
  std::stringstream bad_ack("slot,v,v_hat,eack\n1,0.1,0,2\n");
  EXPECT_THROW(read_log_csv(bad_ack, kSource, kReceived), EstimationError);
  std::stringstream short_row("slot,v,v_hat,eack\n1,0.1\n");
  EXPECT_THROW(read_log_csv(short_row, kSource, kReceived), EstimationError);
}

TEST(Estimation, JsonCarriesFormatAndNullBranches) {
  EstimationLog log;
  log.add(2, 3, 0);
  const auto doc = to_json(estimate_all(log, kSource, kReceived, kTarget));
  EXPECT_EQ(doc.at("format"), "goe.estimated_pmfs");
  EXPECT_TRUE(doc.at("conditional_importance").at("1").is_null());
  EXPECT_EQ(doc.at("q").size(), 11u);
}

}  // namespace
}  // namespace goe
