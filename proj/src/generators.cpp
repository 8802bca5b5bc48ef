#include "sbmkit/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbmkit/rng.hpp"

namespace sbmkit {

namespace {

constexpr std::int32_t kDensePairLimit = 100000;  // above this the skip sampler kicks in

void check_prob_vector(const std::vector<double>& pi, int k) {
  if (static_cast<int>(pi.size()) != k) throw ConfigError("pi must have one entry per class");
  double sum = 0.0;
  for (double p : pi) {
    if (p <= 0.0) throw ConfigError("pi entries must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ConfigError("pi must sum to 1");
}

}  // namespace

void SbmConfig::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!pi.empty()) check_prob_vector(pi, k);
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("beta must lie in [0, 1)");
  if (!w.empty()) {
    if (static_cast<int>(w.size()) != k) throw ConfigError("w must have one entry per class");
    for (double x : w)
      if (x <= 0.0) throw ConfigError("w entries must be positive");
  }
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");
  if (rho < 0.0 || rho >= 1.0) throw ConfigError("rho must lie in [0, 1)");
  if (theta_low <= 0.0 || theta_low > 1.0) throw ConfigError("theta_low must lie in (0, 1]");
}

std::vector<double> SbmConfig::pi_or_uniform() const {
  if (!pi.empty()) return pi;
  return std::vector<double>(k, 1.0 / k);
}

std::vector<double> SbmConfig::w_or_ones() const {
  if (!w.empty()) return w;
  return std::vector<double>(k, 1.0);
}

EdgeProb build_edge_prob(const SbmConfig& cfg) {
  cfg.validate();
  if (cfg.n < 2) throw ConfigError("edge probabilities need n >= 2");
  auto pi = cfg.pi_or_uniform();
  auto w = cfg.w_or_ones();
  Matrix p0 = Matrix::Constant(cfg.k, cfg.k, cfg.beta == 0.0 ? 0.0 : 1.0);
  for (int a = 0; a < cfg.k; ++a) p0(a, a) = cfg.beta == 0.0 ? w[a] : w[a] / cfg.beta;

  double quad = 0.0;
  for (int a = 0; a < cfg.k; ++a)
    for (int b = 0; b < cfg.k; ++b) quad += pi[a] * p0(a, b) * pi[b];
  double e_theta = cfg.rho * cfg.theta_low + (1.0 - cfg.rho);
  Matrix p = cfg.lambda * p0 / ((cfg.n - 1) * quad * e_theta * e_theta);

  for (int a = 0; a < cfg.k; ++a)
    for (int b = 0; b < cfg.k; ++b)
      if (p(a, b) > 1.0)
        throw ConfigError("infeasible config: edge probability P(" + std::to_string(a + 1) + "," +
                          std::to_string(b + 1) + ") = " + std::to_string(p(a, b)) + " exceeds 1");
  return {p, e_theta};
}

namespace {

std::vector<std::int32_t> draw_labels(const SbmConfig& cfg) {
  auto pi = cfg.pi_or_uniform();
  std::vector<std::int32_t> labels(cfg.n);
  std::uint64_t key = rng::stream_key(cfg.seed, rng::kTagLabels);
  for (std::int32_t i = 0; i < cfg.n; ++i) {
    double u = rng::unit(rng::at(key, i));
    double acc = 0.0;
    std::int32_t c = cfg.k - 1;
    for (int a = 0; a < cfg.k; ++a) {
      acc += pi[a];
      if (u < acc) {
        c = a;
        break;
      }
    }
    labels[i] = c;
  }
  return labels;
}

std::vector<double> draw_theta(const SbmConfig& cfg) {
  std::vector<double> theta(cfg.n, 1.0);
  if (cfg.rho == 0.0) return theta;
  std::uint64_t key = rng::stream_key(cfg.seed, rng::kTagTheta);
  for (std::int32_t i = 0; i < cfg.n; ++i)
    if (rng::unit(rng::at(key, i)) < cfg.rho) theta[i] = cfg.theta_low;
  return theta;
}

void scan_pairs_dense(const SbmConfig& cfg, const Matrix& p, const std::vector<std::int32_t>& c,
                      const std::vector<double>& theta,
                      std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  std::uint64_t key = rng::stream_key(cfg.seed, rng::kTagPairs);
  const std::uint64_t n = static_cast<std::uint64_t>(cfg.n);
  for (std::int32_t i = 0; i < cfg.n; ++i) {
    for (std::int32_t j = i + 1; j < cfg.n; ++j) {
      double pij = theta[i] * theta[j] * p(c[i], c[j]);
      if (pij <= 0.0) continue;
      if (rng::unit(rng::at(key, i * n + j)) < pij) edges.push_back({i, j});
    }
  }
}

// Nodes are grouped by (label, theta level); the link probability is constant
// inside each group pair, so edges are located by geometric skipping over the
// linearized pair index.
void scan_pairs_sparse(const SbmConfig& cfg, const Matrix& p, const std::vector<std::int32_t>& c,
                       const std::vector<double>& theta,
                       std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  const int levels = cfg.rho == 0.0 ? 1 : 2;
  const int nstrata = cfg.k * levels;
  std::vector<std::vector<std::int32_t>> members(nstrata);
  for (std::int32_t i = 0; i < cfg.n; ++i) {
    int level = (levels == 2 && theta[i] != 1.0) ? 1 : 0;
    members[c[i] * levels + level].push_back(i);
  }
  auto theta_of = [&](int s) { return s % levels == 1 ? cfg.theta_low : 1.0; };
  auto class_of = [&](int s) { return s / levels; };

  std::uint64_t base = rng::stream_key(cfg.seed, rng::kTagPairsSparse);
  for (int s = 0; s < nstrata; ++s) {
    for (int t = s; t < nstrata; ++t) {
      const auto& ms = members[s];
      const auto& mt = members[t];
      if (ms.empty() || mt.empty()) continue;
      double pij = theta_of(s) * theta_of(t) * p(class_of(s), class_of(t));
      if (pij <= 0.0) continue;
      const std::int64_t ssz = static_cast<std::int64_t>(ms.size());
      const std::int64_t tsz = static_cast<std::int64_t>(mt.size());
      const std::int64_t total = s == t ? ssz * (ssz - 1) / 2 : ssz * tsz;
      auto emit = [&](std::int64_t idx) {
        if (s != t) {
          edges.push_back({ms[idx / tsz], mt[idx % tsz]});
          return;
        }
        // row-major index over pairs u < v within one stratum
        double fs = static_cast<double>(ssz);
        auto u = static_cast<std::int64_t>(fs - 0.5 - std::sqrt((fs - 0.5) * (fs - 0.5) - 2.0 * idx));
        auto row_start = [&](std::int64_t r) { return r * ssz - r * (r + 1) / 2; };
        while (u > 0 && row_start(u) > idx) --u;
        while (row_start(u + 1) <= idx) ++u;
        std::int64_t v = u + 1 + (idx - row_start(u));
        edges.push_back({ms[u], ms[v]});
      };
      std::uint64_t key = rng::sub_key(base, s, t);
      if (pij >= 1.0) {
        for (std::int64_t idx = 0; idx < total; ++idx) emit(idx);
        continue;
      }
      const double log1mp = std::log1p(-pij);
      std::int64_t idx = -1;
      std::uint64_t counter = 0;
      while (true) {
        double u = rng::unit(rng::at(key, counter++));
        idx += 1 + static_cast<std::int64_t>(std::log1p(-u) / log1mp);
        if (idx >= total || idx < 0) break;  // idx < 0 guards overflow on huge skips
        emit(idx);
      }
    }
  }
}

}  // namespace

DcsbmSample sample_dcsbm(const SbmConfig& cfg, PairSampler sampler) {
  EdgeProb ep = build_edge_prob(cfg);
  DcsbmSample out;
  out.truth.labels = draw_labels(cfg);
  out.truth.k = cfg.k;
  out.theta = draw_theta(cfg);

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(static_cast<std::size_t>(cfg.lambda * cfg.n / 2 * 1.2) + 64);
  bool dense = sampler == PairSampler::kDense ||
               (sampler == PairSampler::kAuto && cfg.n <= kDensePairLimit);
  if (dense)
    scan_pairs_dense(cfg, ep.p, out.truth.labels, out.theta, edges);
  else
    scan_pairs_sparse(cfg, ep.p, out.truth.labels, out.theta, edges);
  out.graph = build_undirected(cfg.n, std::move(edges));
  return out;
}

void DirectedPairConfig::validate() const {
  if (m < 1) throw ConfigError("m must be at least 1");
  if (a < 0.0 || b < 0.0) throw ConfigError("a and b must be nonnegative");
  if (a > m || b > m)
    throw ConfigError("infeasible rate: a/m and b/m must not exceed 1 (m=" + std::to_string(m) +
                      ", a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

DirectedSample sample_directed(const DirectedPairConfig& cfg) {
  cfg.validate();
  const std::int32_t n = 2 * cfg.m;
  const double pa = cfg.a / cfg.m;
  const double pb = cfg.b / cfg.m;

  DirectedSample out;
  out.truth.k = 2;
  out.truth.labels.assign(n, 0);
  for (std::int32_t i = cfg.m; i < n; ++i) out.truth.labels[i] = 1;

  std::vector<std::pair<std::int32_t, std::int32_t>> arcs;
  arcs.reserve(static_cast<std::size_t>((cfg.a + cfg.b) * n * 1.2) + 64);
  std::uint64_t key = rng::stream_key(cfg.seed, rng::kTagPairs);
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  for (std::int32_t i = 0; i < n; ++i) {
    bool ci = i >= cfg.m;
    for (std::int32_t j = 0; j < n; ++j) {
      if (i == j && !cfg.self_loops) continue;
      double p = (ci == (j >= cfg.m)) ? pa : pb;
      if (p <= 0.0) continue;
      if (rng::unit(rng::at(key, i * un + j)) < p) arcs.push_back({i, j});
    }
  }
  out.graph = build_directed(n, std::move(arcs));
  return out;
}

SparseGraph couple_to_undirected(const SparseGraph& gd) {
  if (!gd.directed) throw ConfigError("couple_to_undirected expects a directed graph");
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(gd.neighbors.size());
  for (std::int32_t i = 0; i < gd.n; ++i)
    for (auto j : gd.neighbors_of(i))
      if (i != j) edges.push_back({std::min(i, j), std::max(i, j)});
  return build_undirected(gd.n, std::move(edges));
}

Matrix coupled_edge_prob(const Matrix& pt) {
  return 2.0 * pt - pt.cwiseProduct(pt);
}

}  // namespace sbmkit
