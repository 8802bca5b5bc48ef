#pragma once

// Brute-force reference implementations the fast library code is checked
// against. Everything here works on dense n x n matrices and enumerations,
// deliberately sharing no code with the library.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "sbmkit/graph.hpp"
#include "sbmkit/types.hpp"

namespace testutil {

using sbmkit::Labeling;
using sbmkit::SparseGraph;
using Dense = std::vector<std::vector<int>>;

inline SparseGraph graph_from(int n, const std::vector<std::pair<int, int>>& edges,
                              bool directed = false) {
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  for (auto [u, v] : edges) e.emplace_back(u, v);
  return directed ? sbmkit::build_directed(n, std::move(e))
                  : sbmkit::build_undirected(n, std::move(e));
}

inline Dense dense_of(const SparseGraph& g) {
  Dense a(g.n, std::vector<int>(g.n, 0));
  for (std::int32_t i = 0; i < g.n; ++i)
    for (auto j : g.neighbors_of(i)) a[i][j] = 1;
  return a;
}

inline Labeling make_labels(std::vector<std::int32_t> labels, int k) {
  Labeling l;
  l.labels = std::move(labels);
  l.k = k;
  return l;
}

inline SparseGraph random_graph(int n, double p, std::mt19937& rng, bool directed = false) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = directed ? 0 : i + 1; j < n; ++j)
      if ((directed || i < j) && coin(rng)) e.emplace_back(i, j);
  return graph_from(n, e, directed);
}

inline Labeling random_labeling(int n, int k, std::mt19937& rng) {
  Labeling l;
  l.k = k;
  l.labels.resize(n);
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (auto& x : l.labels) x = pick(rng);
  return l;
}

// every class nonempty (for ops that reject empty classes)
inline Labeling random_full_labeling(int n, int k, std::mt19937& rng) {
  Labeling l = random_labeling(n, k, rng);
  for (int c = 0; c < k; ++c) l.labels[c % n] = c;
  return l;
}

inline std::vector<std::vector<std::int64_t>> oracle_block_sums(const Dense& a,
                                                                const Labeling& e) {
  int n = static_cast<int>(a.size());
  std::vector<std::vector<std::int64_t>> b(n, std::vector<std::int64_t>(e.k, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a[i][j]) b[i][e.labels[j]]++;
  return b;
}

inline std::vector<std::int64_t> oracle_two_paths(const Dense& a) {
  int n = static_cast<int>(a.size());
  std::vector<std::int64_t> out(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::int64_t aij2 = 0;
      for (int k = 0; k < n; ++k) aij2 += a[i][k] * a[k][j];
      out[i] += aij2;
    }
  return out;
}

struct OracleBlockCounts {
  std::vector<std::vector<std::int64_t>> edges, npairs;
};

inline OracleBlockCounts oracle_block_edge_counts(const Dense& a, const Labeling& e) {
  int n = static_cast<int>(a.size());
  int k = e.k;
  OracleBlockCounts out;
  out.edges.assign(k, std::vector<std::int64_t>(k, 0));
  out.npairs.assign(k, std::vector<std::int64_t>(k, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.edges[e.labels[i]][e.labels[j]] += a[i][j];
      out.npairs[e.labels[i]][e.labels[j]]++;
    }
  return out;
}

inline std::vector<std::vector<double>> oracle_confusion(const Labeling& e, const Labeling& c) {
  std::vector<std::vector<double>> r(e.k, std::vector<double>(c.k, 0.0));
  for (std::size_t i = 0; i < e.labels.size(); ++i)
    r[e.labels[i]][c.labels[i]] += 1.0 / static_cast<double>(e.labels.size());
  return r;
}

inline double oracle_mismatch(const Labeling& pred, const Labeling& truth) {
  int k = pred.k;
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1.0;
  int n = static_cast<int>(pred.labels.size());
  do {
    int wrong = 0;
    for (int i = 0; i < n; ++i) wrong += perm[pred.labels[i]] != truth.labels[i];
    best = std::min(best, static_cast<double>(wrong) / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return 0.5 * (v[v.size() / 2] + v[(v.size() - 1) / 2]);
}

}  // namespace testutil
