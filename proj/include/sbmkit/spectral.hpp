#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbmkit/graph.hpp"
#include "sbmkit/types.hpp"

namespace sbmkit {

struct SpectralConfig {
  int k = 2;                 // clusters for the downstream k-means
  int r = 0;                 // embedding dimension; 0 means k - 1 (at least 1)
  bool perturb = true;       // add the constant rank-one smoothing term
  double alpha_over_p = 0.25;
  double lambda_hat = 0.0;   // perturbation scale; 0 means observed mean degree
  int eig_iters = 0;         // matvec sweep budget; 0 means 10*sqrt(n) + 200
  double eig_tol = 1e-8;
  int kmeans_restarts = 10;
  std::uint64_t seed = 0;
};

// y = A x + c * sum(x) * 1, i.e. the adjacency plus a constant matrix c*J
// applied without ever forming J.
std::vector<double> perturbed_matvec(const SparseGraph& g, std::span<const double> x, double c);

// Rows embed nodes into the leading eigenvectors of the symmetric normalized
// adjacency D^-1/2 (A + cJ) D^-1/2 with c = alpha_over_p * lambda_hat / n
// (c = 0 when perturb is off; zero-degree rows stay zero). Of the r + 1
// eigenpairs of largest modulus the one of largest algebraic value is
// dropped and the remaining r, ordered by modulus, form the columns.
// Throws EigNotConverged when residuals miss eig_tol within the sweep budget.
Matrix spectral_embed(const SparseGraph& g, const SpectralConfig& cfg);

// spectral_embed followed by k-means on the rows.
Labeling spectral_cluster(const SparseGraph& g, const SpectralConfig& cfg);

// k-means on per-node (degree, two-path count) features, each coordinate
// standardized to unit variance. Cheap fallback initializer: only informative
// when the classes separate by degree. Sets *warning when fewer than k
// distinct feature rows exist (labels are still returned).
Labeling degree_cluster(const SparseGraph& g, int k, std::uint64_t seed,
                        std::string* warning = nullptr);

}  // namespace sbmkit
