#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbmkit/generators.hpp"
#include "sbmkit/graph.hpp"
#include "sbmkit/types.hpp"

namespace sbmkit {

// Signal strength of the two-community pair (a, b): (a - b)^2 / (a + b).
double tau_squared(double a, double b);

// Expected in-label degree contribution gamma * a + (1 - gamma) * b.
double a_bar_gamma(double a, double b, double gamma);

// Balanced labeling that matches the planted classes (first m nodes = class
// 1) on exactly gamma * m nodes inside each community, the matching sets
// drawn uniformly. gamma * m must be an integer.
Labeling sample_gamma_labeling(std::int32_t m, double gamma, std::uint64_t seed);

enum class TheoryModel { kDirected, kCoupled };

struct OneStepOptions {
  std::optional<double> gamma;  // closed-form rates when present, sign test otherwise
  TheoryModel model = TheoryModel::kDirected;
};

// Single classification pass of the two-community rule: score each node by
// log pi_k + sum_l b_il log theta_kl and take the argmax, ties going to
// class 2. With gamma supplied, theta comes in closed form from the balanced
// confusion of the labeling and the plug-in pair (a_hat, b_hat); without it
// the rule degenerates to the neighbor-count sign test b_i1 - b_i2 > 0.
Labeling one_step_cpl(const SparseGraph& g, const Labeling& e, double a_hat, double b_hat,
                      const OneStepOptions& opts = {});

// Whether some eps in (0, 1) satisfies 2 (1 + eps) a_bar <= eps (1 - 2g)(a - b),
// evaluated in the canonical orientation g = min(gamma, 1 - gamma). Requires
// a > b.
bool sparse_regime_feasible(double a, double b, double gamma);

struct TheoryConfig {
  std::int32_t m = 1000;
  double gamma = 0.3;
  double ratio = 4.0;  // a / b, must exceed 1
  std::vector<double> tau2_grid;
  int seeds = 20;
  std::uint64_t seed = 0;
  bool self_loops = true;
  TheoryModel model = TheoryModel::kDirected;
  double a_hat = 0.0;  // 0 = plug the true a
  double b_hat = 0.0;

  void validate() const;
  // grid cell -> (a, b) with a / b = ratio and tau_squared(a, b) = tau2
  std::pair<double, double> rates_for(double tau2) const;
};

struct SweepRecord {
  TheoryModel model;
  std::int32_t n;
  double gamma, a, b, tau2, a_bar;
  std::uint64_t seed;
  double mismatch;
  bool feasible;  // sparse_regime_feasible for the cell
};

struct SweepSummary {
  double tau2;
  double median_mismatch;
  double iqr;
  bool feasible;
};

// One record per (tau2, seed): draw the directed pair model, couple it when
// the coupled variant is selected, draw the gamma labeling, run the one-step
// rule, and score the mismatch against the planted classes.
std::vector<SweepRecord> theorem_sweep(const TheoryConfig& cfg);
std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRecord>& records);

}  // namespace sbmkit
