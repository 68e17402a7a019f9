#include <benchmark/benchmark.h>

#include "goe/agents.hpp"
#include "goe/cmdp.hpp"
#include "goe/estimation.hpp"
#include "goe/simulator.hpp"

namespace {

using namespace goe;

struct ReferenceModels {
  SimConfig config;
  EstimationLog log;
  EstimatedPmfs estimates;
  CmdpModel sa;
  CmdpModel aa;

  static ReferenceModels make() {
    SimConfig c;
    Engine engine(c);
    EstimationLog log;
    run_estimation_horizon(engine, log);
    EstimatedPmfs est = fit_agents(c, log, false, false).estimates;
    const auto source = SourceDistribution::beta_binomial(c.source_levels, c.shape_a, c.shape_b);
    CmdpModel sa = build_sa_model(source, UsefulnessLevels::source(c.source_levels),
                                  target_pmf_or_uniform(est, c.target_levels),
                                  UsefulnessLevels::target(c.target_levels), c.goe, sa_model_options(c));
    CmdpModel aa = build_aa_model(est.q, UsefulnessLevels::received(c.received_levels), c.p_erasure, c.goe,
                                  aa_model_options(c));
    return {c, std::move(log), std::move(est), std::move(sa), std::move(aa)};
  }
};

const ReferenceModels& models() {
  static const ReferenceModels m = ReferenceModels::make();
  return m;
}

void BM_AaValueIteration(benchmark::State& state) {
  const CmdpModel& aa = models().aa;
  for (auto _ : state) benchmark::DoNotOptimize(value_iterate(aa, 1.0, 1e-4));
}
BENCHMARK(BM_AaValueIteration);

void BM_SolveSa(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve(models().sa));
}
BENCHMARK(BM_SolveSa);

void BM_SolveAa(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve(models().aa));
}
BENCHMARK(BM_SolveAa);

void BM_StationaryDistributionAa(benchmark::State& state) {
  const CmdpModel& aa = models().aa;
  const PolicyTable always(aa.state_count(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(stationary_distribution(aa, always));
}
BENCHMARK(BM_StationaryDistributionAa);

void BM_SimulatorSlots(benchmark::State& state) {
  SimConfig c;
  c.sa_policy = PolicyKind::markovian;
  c.aa_policy = PolicyKind::periodic;
  Engine engine(c);
  const DecisionPolicy sa_policy = agnostic_policy(c.sa_policy, c.tx_rate);
  const DecisionPolicy aa_policy = agnostic_policy(c.aa_policy, c.query_rate);
  PolicyCursor sa(sa_policy);
  PolicyCursor aa(aa_policy);
  for (auto _ : state) benchmark::DoNotOptimize(engine.step(sa, aa));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorSlots);

void BM_FullRun(benchmark::State& state) {
  SimConfig c;
  c.e_horizon = static_cast<std::uint64_t>(state.range(0));
  c.d_horizon = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(c).metrics.avg_effectiveness);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_FullRun)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_EstimateAll(benchmark::State& state) {
  const auto& m = models();
  const auto src = UsefulnessLevels::source(m.config.source_levels);
  const auto rec = UsefulnessLevels::received(m.config.received_levels);
  const auto tgt = UsefulnessLevels::target(m.config.target_levels);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_all(m.log, src, rec, tgt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.log.size()));
}
BENCHMARK(BM_EstimateAll)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
