#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "goe/domain.hpp"
#include "goe/error.hpp"

namespace goe {
namespace {

const UsefulnessLevels kReceived = UsefulnessLevels::received();

TEST(UsefulnessLevels, DefaultSetsMatchTheTableSizes) {
  EXPECT_EQ(UsefulnessLevels::source().size(), 10u);
  EXPECT_EQ(UsefulnessLevels::received().size(), 11u);
  EXPECT_EQ(UsefulnessLevels::target().size(), 11u);
  EXPECT_DOUBLE_EQ(UsefulnessLevels::source()[0], 0.1);
  EXPECT_DOUBLE_EQ(kReceived[0], 0.0);
  EXPECT_DOUBLE_EQ(kReceived.max(), 1.0);
}

TEST(UsefulnessLevels, RejectsBadLevelSets) {
  EXPECT_THROW(UsefulnessLevels(LevelKind::source, {0.2, 0.1}), ParameterError);
  EXPECT_THROW(UsefulnessLevels(LevelKind::source, {0.1, 0.1}), ParameterError);
  EXPECT_THROW(UsefulnessLevels(LevelKind::source, {0.5, 1.5}), ParameterError);
  EXPECT_THROW(UsefulnessLevels(LevelKind::received, {0.1, 0.5}), ParameterError);
  EXPECT_THROW(UsefulnessLevels(LevelKind::target, {}), ParameterError);
  EXPECT_NO_THROW(UsefulnessLevels(LevelKind::received, {0.0, 0.5}));
}

TEST(UsefulnessLevels, IndexOfFindsLevelsAndRejectsOthers) {
  EXPECT_EQ(kReceived.index_of(0.3), 3u);
  EXPECT_EQ(kReceived.index_of(0.1 + 0.2), 3u);
  EXPECT_THROW(kReceived.index_of(0.35), DomainError);
}

TEST(BetaBinomial, SingleOutcomeIsCertain) {
  const auto pmf = beta_binomial_pmf(1, 0.7, 2.0);
  ASSERT_EQ(pmf.size(), 1u);
  EXPECT_DOUBLE_EQ(pmf[0], 1.0);
}

TEST(BetaBinomial, ReferenceShapeIsSymmetricAndUShaped) {
  const auto pmf = beta_binomial_pmf(10, 0.3, 0.3);
  EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(pmf[i], pmf[9 - i], 1e-13);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GT(pmf[i], pmf[i + 1]);
}

TEST(BetaBinomial, FirstMassMatchesMultiprecisionLogGamma) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big log_p1 = boost::math::lgamma(Big("9.3")) + boost::math::lgamma(Big("0.6")) -
                     boost::math::lgamma(Big("9.6")) - boost::math::lgamma(Big("0.3"));
  const double expected = static_cast<double>(exp(log_p1));
  EXPECT_NEAR(beta_binomial_pmf(10, 0.3, 0.3)[0], expected, 1e-10);
}

TEST(BetaBinomial, RejectsBadParameters) {
  EXPECT_THROW(beta_binomial_pmf(0, 1.0, 1.0), ParameterError);
  EXPECT_THROW(beta_binomial_pmf(5, 0.0, 1.0), ParameterError);
  EXPECT_THROW(beta_binomial_pmf(5, 1.0, -2.0), ParameterError);
}

TEST(BetaBinomial, SumsToOneOnRandomShapes) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> shape(1e-3, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<std::size_t>(1 + gen() % 50);
    const auto pmf = beta_binomial_pmf(n, shape(gen), shape(gen));
    ASSERT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
    for (double p : pmf) ASSERT_GE(p, 0.0);
  }
}

TEST(GoeEvaluate, ReferenceArithmetic) {
  const GoeParams t1 = GoeParams::reference();
  EXPECT_NEAR(goe_evaluate(0.9, 1, 1, 1, 1, t1), 0.69, 1e-12);
  EXPECT_NEAR(goe_evaluate(0.5, 5, 2, 1, 0, t1), -0.06, 1e-12);
  for (int d = 1; d <= 10; ++d) {
    for (int t = 1; t <= 5; ++t) EXPECT_NEAR(goe_evaluate(0.0, d, t, 0, 0, t1), -0.01, 1e-15);
  }
}

TEST(GoeEvaluate, GuardsAgainstZeroDenominators) {
  EXPECT_THROW(goe_evaluate(0.5, 0, 1, 0, 0, GoeParams{}), DomainError);
  EXPECT_THROW(goe_evaluate(0.5, 1, 0, 0, 0, GoeParams{}), DomainError);
}

TEST(GoeEvaluate, MonotoneInAgeLatenessAndUsefulness) {
  const GoeParams t1 = GoeParams::reference();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (std::size_t j = 0; j < kReceived.size(); ++j) {
        for (int d = 1; d <= 10; ++d) {
          for (int t = 1; t <= 5; ++t) {
            const double g = goe_evaluate(kReceived[j], d, t, a, b, t1);
            if (d < 10) EXPECT_LE(goe_evaluate(kReceived[j], d + 1, t, a, b, t1), g + 1e-15);
            if (t < 5) EXPECT_LE(goe_evaluate(kReceived[j], d, t + 1, a, b, t1), g + 1e-15);
            if (j + 1 < kReceived.size()) EXPECT_GE(goe_evaluate(kReceived[j + 1], d, t, a, b, t1), g - 1e-15);
          }
        }
      }
    }
  }
}

TEST(GoeMetric, PluggableCompositionMatchesClosedForm) {
  for (const GoeParams& p : {GoeParams::reference(), GoeParams::qaoi_preset(), GoeParams::voi_preset()}) {
    const GoeMetric m = GoeMetric::from_params(p);
    for (int d = 1; d <= 10; ++d) {
      for (int t = 1; t <= 5; ++t) {
        EXPECT_NEAR(goe_evaluate(m, 0.7, d, t, 1, 0), goe_evaluate(0.7, d, t, 1, 0, p), 1e-15);
      }
    }
  }
}

TEST(GoeMetric, CustomCompositionIsUsed) {
  GoeMetric m = GoeMetric::from_params(GoeParams::reference());
  m.g_theta = [](int) { return 1.0; };
  EXPECT_NEAR(goe_evaluate(m, 0.8, 2, 4, 0, 0), 0.4 - 0.01, 1e-12);
}

TEST(GoePresets, FreshnessAndUsefulnessForms) {
  const GoeParams q = GoeParams::qaoi_preset(10);
  EXPECT_EQ(q.theta_max, 1);
  EXPECT_DOUBLE_EQ(goe_evaluate(0.0, 1, 1, 1, 1, q), 1.0);
  EXPECT_NEAR(goe_evaluate(0.0, 6, 1, 1, 1, q), 0.5, 1e-15);
  const GoeParams v = GoeParams::voi_preset();
  EXPECT_NEAR(goe_evaluate(0.8, 7, 3, 1, 0, v), 0.8 - 0.1 - 0.01, 1e-15);
}

TEST(Effectiveness, IndicatorExamples) {
  const GoeParams t1 = GoeParams::reference();
  EXPECT_EQ(effectiveness_indicator(0.69, 1, t1), 1);
  EXPECT_EQ(effectiveness_indicator(0.69, 5, t1), 0);
  EXPECT_EQ(effectiveness_indicator(0.59, 1, t1), 0);
  GoeParams inclusive = t1;
  inclusive.window_rule = WindowRule::inclusive;
  EXPECT_EQ(effectiveness_indicator(0.69, 5, inclusive), 1);
  EXPECT_EQ(effectiveness_indicator(0.69, 6, inclusive), 0);
  EXPECT_EQ(inclusive.lateness_cap(), 6);
}

TEST(TargetUsefulness, ExhaustiveScanExamples) {
  const GoeParams t1 = GoeParams::reference();
  // Independent scan: smallest level with v/(d t) - costs >= target.
  const auto scan = [&](int d, int t, int a, int b) {
    for (std::size_t j = 0; j < kReceived.size(); ++j) {
      if (kReceived[j] / (d * t) - a * 0.1 - b * 0.1 - 0.01 >= 0.6 - 1e-12) return kReceived[j];
    }
    return 1.0;
  };
  EXPECT_DOUBLE_EQ(target_usefulness(1, 1, 1, 1, t1, kReceived), 0.9);
  EXPECT_DOUBLE_EQ(scan(1, 1, 1, 1), 0.9);
  EXPECT_DOUBLE_EQ(target_usefulness(2, 1, 1, 1, t1, kReceived), 1.0);
  EXPECT_DOUBLE_EQ(target_usefulness(1, 5, 0, 0, t1, kReceived), 1.0);
  EXPECT_DOUBLE_EQ(target_usefulness(1, 1, 0, 0, t1, kReceived), scan(1, 1, 0, 0));
  EXPECT_THROW(target_usefulness(1, 1, 0, 0, t1, UsefulnessLevels::source()), ParameterError);
}

TEST(TargetUsefulness, QualifyingTargetsAreEffective) {
  GoeParams p = GoeParams::reference();
  for (double tgt : {0.0, 0.1, 0.3, 0.6}) {
    p.goe_target = tgt;
    for (int d = 1; d <= 10; ++d) {
      for (int t = 1; t <= 5; ++t) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const double v = target_usefulness(d, t, a, b, p, kReceived);
            const double g = goe_evaluate(v, d, t, a, b, p);
            const bool qualified = p.window_admits(t) && g >= tgt - 1e-12;
            if (qualified) EXPECT_EQ(effectiveness_indicator(g, t, p), 1);
            else EXPECT_DOUBLE_EQ(v, 1.0);
          }
        }
      }
    }
  }
}

TEST(ErasureChannel, MatchesItsRate) {
  Rng rng(5, Stream::forward_channel);
  const ErasureChannel ch{0.2};
  int erased = 0;
  for (int k = 0; k < 100000; ++k) erased += ch.erased(rng) ? 1 : 0;
  EXPECT_NEAR(erased / 100000.0, 0.2, 0.005);
}

TEST(Enums, StringRoundTrips) {
  EXPECT_EQ(window_rule_from_string(to_string(WindowRule::inclusive)), WindowRule::inclusive);
  EXPECT_EQ(goe_form_from_string(to_string(GoeForm::voi)), GoeForm::voi);
  EXPECT_THROW(window_rule_from_string("loose"), ParameterError);
}

}  // namespace
}  // namespace goe
