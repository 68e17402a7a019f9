#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goe/rng.hpp"

namespace goe {

enum class LevelKind { source, received, target };

std::string_view to_string(LevelKind kind);

// Ordered discrete usefulness values on [0, 1].
//
// source:   v in {nu_1 < ... < nu_|V|}, the importance rank of an observation.
// received: v_hat in {0} u {nu_hat_j}, what the endpoint sees; index 0 is the
//           "erased or useless" level.
// target:   the SA-side mapped target usefulness levels.
class UsefulnessLevels {
 public:
  UsefulnessLevels(LevelKind kind, std::vector<double> levels);

  // Evenly spaced defaults: source uses 1/n..1, received and target use 0..1.
  static UsefulnessLevels source(std::size_t count = 10);
  static UsefulnessLevels received(std::size_t count = 11);
  static UsefulnessLevels target(std::size_t count = 11);

  LevelKind kind() const { return kind_; }
  std::size_t size() const { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }
  std::span<const double> values() const { return levels_; }
  double max() const { return levels_.back(); }

  // Index of the level equal to value (within 1e-9); throws DomainError.
  std::size_t index_of(double value) const;

 private:
  LevelKind kind_;
  std::vector<double> levels_;
};

// p_nu over the source levels.
struct SourceDistribution {
  std::vector<double> pmf;
  double shape_a = 0.3;
  double shape_b = 0.3;

  static SourceDistribution beta_binomial(std::size_t levels_count, double a, double b);

  std::size_t sample(Rng& rng) const { return rng.categorical(pmf); }
};

// Packet erasure channel: each use is one Bernoulli(erasure_prob) draw.
struct ErasureChannel {
  double erasure_prob = 0.0;
  Stream stream = Stream::forward_channel;

  bool erased(Rng& rng) const { return rng.bernoulli(erasure_prob); }
};

// strict: effective only while theta < theta_max.
// inclusive: effective while theta <= theta_max; lateness then runs to theta_max + 1.
enum class WindowRule { strict, inclusive };

// standard is the deployed metric v_hat/(delta*theta) - costs; qaoi and voi are
// the two reduced forms (freshness only, usefulness only).
enum class GoeForm { standard, qaoi, voi };

std::string_view to_string(WindowRule rule);
std::string_view to_string(GoeForm form);
WindowRule window_rule_from_string(std::string_view name);
GoeForm goe_form_from_string(std::string_view name);

struct GoeParams {
  double cost_tx = 0.1;      // C1, charged when the SA transmits
  double cost_query = 0.1;   // C2, charged when the AA raises a query
  double cost_avail = 0.01;  // C3, actuation availability, every slot
  double goe_target = 0.6;
  int delta_max = 10;
  int theta_max = 5;
  WindowRule window_rule = WindowRule::strict;
  GoeForm form = GoeForm::standard;

  // Largest lateness value tracked in state.
  int lateness_cap() const { return window_rule == WindowRule::inclusive ? theta_max + 1 : theta_max; }
  bool window_admits(int theta) const {
    return window_rule == WindowRule::inclusive ? theta <= theta_max : theta < theta_max;
  }

  void validate() const;

  static GoeParams reference();
  // Freshness-only grade: theta_max = 1, costs ignored, linear age penalty.
  static GoeParams qaoi_preset(int delta_max = 10);
  // Usefulness-only grade: age and lateness factors dropped.
  static GoeParams voi_preset();
};

// The composition f_g(g_delta(v_hat, delta), g_theta(theta); g_c(alpha, beta)).
struct GoeMetric {
  std::function<double(double v_hat, int delta)> g_delta;
  std::function<double(int theta)> g_theta;
  std::function<double(int alpha, int beta)> g_cost;
  std::function<double(double freshness, double timeliness, double cost)> combine;

  static GoeMetric from_params(const GoeParams& params);
};

// beta-binomial pmf over levels_count outcomes, via log-gamma.
std::vector<double> beta_binomial_pmf(std::size_t levels_count, double a, double b);

double goe_evaluate(double v_hat, int delta, int theta, int alpha, int beta, const GoeParams& params);
double goe_evaluate(const GoeMetric& metric, double v_hat, int delta, int theta, int alpha, int beta);

int effectiveness_indicator(double goe, int theta, const GoeParams& params);

// Smallest received level that makes the slot effective at (delta, theta), or
// the largest level when none qualifies or the window is closed.
std::size_t target_usefulness_index(int delta, int theta, int alpha, int beta, const GoeParams& params,
                                    const UsefulnessLevels& received_levels);
double target_usefulness(int delta, int theta, int alpha, int beta, const GoeParams& params,
                         const UsefulnessLevels& received_levels);

}  // namespace goe
