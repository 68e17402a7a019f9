#include "goe/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "goe/error.hpp"

namespace goe {

namespace {

// Comparisons between grades are made with this slack so that values that are
// equal in exact arithmetic (0.81 - 0.21 vs 0.6) are not split by rounding.
constexpr double kGradeSlack = 1e-12;

std::vector<double> evenly_spaced(std::size_t count, bool include_zero) {
  std::vector<double> out(count);
  if (include_zero) {
    if (count == 1) return {0.0};
    for (std::size_t j = 0; j < count; ++j) out[j] = static_cast<double>(j) / static_cast<double>(count - 1);
  } else {
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(i + 1) / static_cast<double>(count);
  }
  return out;
}

}  // namespace

std::string_view to_string(LevelKind kind) {
  switch (kind) {
    case LevelKind::source: return "source";
    case LevelKind::received: return "received";
    case LevelKind::target: return "target";
  }
  return "?";
}

UsefulnessLevels::UsefulnessLevels(LevelKind kind, std::vector<double> levels)
    : kind_(kind), levels_(std::move(levels)) {
  if (levels_.empty()) throw ParameterError("usefulness levels must not be empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] >= 0.0 && levels_[i] <= 1.0))
      throw ParameterError("usefulness level outside [0, 1]: " + std::to_string(levels_[i]));
    if (i > 0 && !(levels_[i] > levels_[i - 1])) throw ParameterError("usefulness levels must be strictly ascending");
  }
  if (kind_ == LevelKind::received && levels_.front() != 0.0)
    throw ParameterError("received usefulness levels must start at 0");
}

UsefulnessLevels UsefulnessLevels::source(std::size_t count) {
  if (count == 0) throw ParameterError("source level count must be positive");
  return {LevelKind::source, evenly_spaced(count, false)};
}

UsefulnessLevels UsefulnessLevels::received(std::size_t count) {
  if (count < 2) throw ParameterError("received level count must be at least 2");
  return {LevelKind::received, evenly_spaced(count, true)};
}

UsefulnessLevels UsefulnessLevels::target(std::size_t count) {
  if (count == 0) throw ParameterError("target level count must be positive");
  return {LevelKind::target, evenly_spaced(count, true)};
}

std::size_t UsefulnessLevels::index_of(double value) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (std::abs(levels_[i] - value) <= 1e-9) return i;
  }
  throw DomainError("value " + std::to_string(value) + " is not a " + std::string(to_string(kind_)) + " level");
}

std::vector<double> beta_binomial_pmf(std::size_t levels_count, double a, double b) {
  if (levels_count < 1) throw ParameterError("beta-binomial needs at least one level");
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("beta-binomial shape parameters must be positive");

  const auto log_beta = [](double x, double y) { return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y); };
  const double n = static_cast<double>(levels_count - 1);
  const double log_norm = log_beta(a, b);

  std::vector<double> pmf(levels_count);
  for (std::size_t k = 0; k < levels_count; ++k) {
    const double kk = static_cast<double>(k);
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    pmf[k] = std::exp(log_choose + log_beta(kk + a, n - kk + b) - log_norm);
  }
  // Renormalize away the last ulps so sums hold to 1e-12 for large supports.
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (auto& p : pmf) p /= total;
  return pmf;
}

SourceDistribution SourceDistribution::beta_binomial(std::size_t levels_count, double a, double b) {
  return {beta_binomial_pmf(levels_count, a, b), a, b};
}

std::string_view to_string(WindowRule rule) { return rule == WindowRule::strict ? "strict" : "inclusive"; }

std::string_view to_string(GoeForm form) {
  switch (form) {
    case GoeForm::standard: return "standard";
    case GoeForm::qaoi: return "qaoi";
    case GoeForm::voi: return "voi";
  }
  return "?";
}

WindowRule window_rule_from_string(std::string_view name) {
  if (name == "strict") return WindowRule::strict;
  if (name == "inclusive") return WindowRule::inclusive;
  throw ParameterError("unknown window rule: " + std::string(name));
}

GoeForm goe_form_from_string(std::string_view name) {
  if (name == "standard") return GoeForm::standard;
  if (name == "qaoi") return GoeForm::qaoi;
  if (name == "voi") return GoeForm::voi;
  throw ParameterError("unknown GoE form: " + std::string(name));
}

void GoeParams::validate() const {
  if (delta_max < 1) throw ParameterError("delta_max must be >= 1");
  if (theta_max < 1) throw ParameterError("theta_max must be >= 1");
  if (cost_tx < 0.0 || cost_query < 0.0 || cost_avail < 0.0) throw ParameterError("per-slot costs must be non-negative");
}

GoeParams GoeParams::reference() { return GoeParams{}; }

GoeParams GoeParams::qaoi_preset(int delta_max) {
  GoeParams p;
  p.cost_tx = p.cost_query = p.cost_avail = 0.0;
  p.theta_max = 1;
  p.delta_max = delta_max;
  p.form = GoeForm::qaoi;
  return p;
}

GoeParams GoeParams::voi_preset() {
  GoeParams p;
  p.form = GoeForm::voi;
  return p;
}

GoeMetric GoeMetric::from_params(const GoeParams& params) {
  GoeMetric m;
  const auto costs = [params](int alpha, int beta) {
    return alpha * params.cost_tx + beta * params.cost_query + params.cost_avail;
  };
  switch (params.form) {
    case GoeForm::standard:
      m.g_delta = [](double v_hat, int delta) { return v_hat / delta; };
      m.g_theta = [](int theta) { return 1.0 / theta; };
      m.g_cost = costs;
      break;
    case GoeForm::qaoi: {
      const double dmax = params.delta_max;
      m.g_delta = [dmax](double, int delta) { return 1.0 - (delta - 1) / dmax; };
      m.g_theta = [](int) { return 1.0; };
      m.g_cost = [](int, int) { return 0.0; };
      break;
    }
    case GoeForm::voi:
      m.g_delta = [](double v_hat, int) { return v_hat; };
      m.g_theta = [](int) { return 1.0; };
      m.g_cost = costs;
      break;
  }
  m.combine = [](double freshness, double timeliness, double cost) { return freshness * timeliness - cost; };
  return m;
}

double goe_evaluate(const GoeMetric& metric, double v_hat, int delta, int theta, int alpha, int beta) {
  if (delta < 1 || theta < 1) throw DomainError("AoI and lateness must be >= 1");
  return metric.combine(metric.g_delta(v_hat, delta), metric.g_theta(theta), metric.g_cost(alpha, beta));
}

double goe_evaluate(double v_hat, int delta, int theta, int alpha, int beta, const GoeParams& params) {
  if (delta < 1 || theta < 1) throw DomainError("AoI and lateness must be >= 1");
  const double costs = alpha * params.cost_tx + beta * params.cost_query + params.cost_avail;
  switch (params.form) {
    case GoeForm::standard:
      return v_hat / (static_cast<double>(delta) * theta) - costs;
    case GoeForm::qaoi:
      return 1.0 - static_cast<double>(delta - 1) / params.delta_max;
    case GoeForm::voi:
      return v_hat - costs;
  }
  return 0.0;
}

int effectiveness_indicator(double goe, int theta, const GoeParams& params) {
  return (goe >= params.goe_target - kGradeSlack && params.window_admits(theta)) ? 1 : 0;
}

std::size_t target_usefulness_index(int delta, int theta, int alpha, int beta, const GoeParams& params,
                                    const UsefulnessLevels& received_levels) {
  if (received_levels.kind() != LevelKind::received) throw ParameterError("target usefulness needs received levels");
  const std::size_t fallback = received_levels.size() - 1;
  if (!params.window_admits(theta)) return fallback;
  for (std::size_t j = 0; j < received_levels.size(); ++j) {
    if (goe_evaluate(received_levels[j], delta, theta, alpha, beta, params) >= params.goe_target - kGradeSlack) return j;
  }
  return fallback;
}

double target_usefulness(int delta, int theta, int alpha, int beta, const GoeParams& params,
                         const UsefulnessLevels& received_levels) {
  return received_levels[target_usefulness_index(delta, theta, alpha, beta, params, received_levels)];
}

}  // namespace goe
