#pragma once

#include <cstdint>
#include <vector>

#include "sbmkit/graph.hpp"
#include "sbmkit/types.hpp"

namespace sbmkit {

// Planted-partition generator with optional degree heterogeneity. Nodes draw
// labels i.i.d. from pi, degree multipliers theta_i are theta_low with
// probability rho and 1 otherwise, and each unordered pair (i, j) links with
// probability theta_i * theta_j * P[c_i][c_j].
struct SbmConfig {
  std::int32_t n = 0;
  int k = 0;
  std::vector<double> pi;  // empty = uniform
  double beta = 0.0;       // out-in ratio, [0, 1)
  std::vector<double> w;   // relative within-class weights, empty = all ones
  double lambda = 0.0;     // target expected average degree
  double rho = 0.0;        // fraction of low-degree nodes, [0, 1)
  double theta_low = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> pi_or_uniform() const;
  std::vector<double> w_or_ones() const;
};

struct EdgeProb {
  Matrix p;        // k x k link probabilities (before theta scaling)
  double e_theta;  // E[theta] = rho * theta_low + (1 - rho)
};

// Builds the k x k probability matrix: base pattern diag(w) when beta = 0,
// otherwise diag = w / beta with unit off-diagonals, scaled so the expected
// average degree is lambda. Throws ConfigError when any attainable edge
// probability theta_i * theta_j * P exceeds 1.
EdgeProb build_edge_prob(const SbmConfig& cfg);

struct DcsbmSample {
  SparseGraph graph;
  Labeling truth;
  std::vector<double> theta;
};

enum class PairSampler {
  kAuto,   // dense scan up to n = 1e5, stratified skip sampler above
  kDense,  // Bernoulli draw per pair, row-major i < j
  kSparse, // geometric skipping within constant-probability strata
};

// RNG stream order under a seed: labels (counter = node), then theta
// (counter = node), then the pair scan. The two samplers agree in
// distribution, not bitwise; each is individually deterministic per seed.
DcsbmSample sample_dcsbm(const SbmConfig& cfg, PairSampler sampler = PairSampler::kAuto);

// Two-community directed model: n = 2m nodes, first m in class 1; every
// ordered pair (i, j) — self-loops included when self_loops — draws an arc
// with probability a/m within classes and b/m across.
struct DirectedPairConfig {
  std::int32_t m = 0;
  double a = 0.0;
  double b = 0.0;
  bool self_loops = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DirectedSample {
  SparseGraph graph;
  Labeling truth;
};

DirectedSample sample_directed(const DirectedPairConfig& cfg);

// Symmetrization that keeps an edge i-j iff either arc is present; self-loops
// are discarded. Marginal edge probabilities follow 2*pt - pt^2 entrywise,
// see coupled_edge_prob.
SparseGraph couple_to_undirected(const SparseGraph& gd);
Matrix coupled_edge_prob(const Matrix& pt);

}  // namespace sbmkit
