#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmkit/graph.hpp"
#include "sbmkit/types.hpp"

namespace sbmkit {

// Poisson-mixture block parameters. lambda(l, k) is the expected number of
// neighbors in block k for a node of class l; theta holds the row-normalized
// rates used by the conditional variant.
struct BlockParams {
  Vector pi;
  Matrix p;       // k x k edge probabilities
  Matrix lambda;  // k x k rates, lambda(l, k) = n * pi_k * p(k, l)
  Matrix theta;   // lambda rows normalized to sum 1
};

enum class Method { kUpl, kCpl };

struct FitConfig {
  int t_outer = 20;
  double inner_tol = 1e-6;    // max relative parameter change
  int inner_max = 200;
  double soft_threshold = 1e-3;
  double rate_floor = 1e-10;  // added to rates inside logs
};

struct FitResult {
  Labeling labels;
  SoftAssignment soft;
  BlockParams params;
  std::vector<std::vector<double>> loglik_trace;  // one series per outer round
  int outer_rounds = 0;
  bool converged = false;  // outer labeling reached a fixed point
  std::vector<std::string> diagnostics;
};

// Moment-matched starting point from a hard labeling: pi from class
// fractions, p from block edge densities, lambda(l, k) = n * pi_k * p(k, l).
// Every class must be nonempty.
BlockParams init_params(const SparseGraph& g, const Labeling& e);

// E-steps return responsibilities over classes given block neighbor counts b.
// The joint variant models b_i as independent Poissons with means lambda(l, .),
// the conditional variant as a multinomial over theta(l, .) given the degree.
SoftAssignment upl_e_step(const IntMatrix& b, const BlockParams& params, double rate_floor = 1e-10);
SoftAssignment cpl_e_step(const IntMatrix& b, const BlockParams& params, double rate_floor = 1e-10);

struct MStep {
  Vector pi;
  Matrix rates;     // lambda for the joint variant, theta for the conditional
  bool degenerate = false;  // some class received (almost) no responsibility
};
MStep upl_m_step(const IntMatrix& b, const SoftAssignment& soft);
MStep cpl_m_step(const IntMatrix& b, const SoftAssignment& soft);

double upl_loglik(const IntMatrix& b, const BlockParams& params, double rate_floor = 1e-10);
double cpl_loglik(const IntMatrix& b, const BlockParams& params, double rate_floor = 1e-10);

// Full alternation: compress the graph against the current labeling, run EM
// to convergence, relabel by responsibility argmax (ties to the lowest
// index), refresh p from the soft memberships, and repeat up to t_outer
// rounds with early exit once the labeling is stable. Classes that empty out
// are re-seeded with the least confident nodes (noted in diagnostics).
FitResult fit(const SparseGraph& g, const Labeling& init, Method method,
              const FitConfig& cfg = {});

}  // namespace sbmkit
