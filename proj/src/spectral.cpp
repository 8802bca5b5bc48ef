#include "sbmkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "sbmkit/kmeans.hpp"
#include "sbmkit/rng.hpp"

namespace sbmkit {

std::vector<double> perturbed_matvec(const SparseGraph& g, std::span<const double> x, double c) {
  if (static_cast<std::int64_t>(x.size()) != g.n) throw ConfigError("vector length must equal n");
  std::vector<double> y(g.n, 0.0);
  for (std::int32_t i = 0; i < g.n; ++i) {
    double acc = 0.0;
    for (auto j : g.neighbors_of(i)) acc += x[j];
    y[i] = acc;
  }
  if (c != 0.0) {
    double s = std::accumulate(x.begin(), x.end(), 0.0);
    for (auto& v : y) v += c * s;
  }
  return y;
}

namespace {

// L X for the normalized operator, column by column
void apply_op(const SparseGraph& g, const Vector& dinv, double c, const Matrix& x, Matrix& out,
              Vector& scratch) {
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    scratch = dinv.cwiseProduct(x.col(col));
    double total = c != 0.0 ? c * scratch.sum() : 0.0;
    for (std::int32_t i = 0; i < g.n; ++i) {
      double acc = total;
      for (auto j : g.neighbors_of(i)) acc += scratch[j];
      out(i, col) = dinv[i] * acc;
    }
  }
}

Matrix thin_orth(const Matrix& x) {
  Eigen::HouseholderQR<Matrix> qr(x);
  return qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
}

struct RitzState {
  Matrix vectors;            // n x s, orthonormal Ritz vectors
  Matrix images;             // L * vectors
  Vector values;             // Ritz values
  std::vector<int> by_modulus;  // column order, |value| descending
  Vector residuals;          // per Ritz pair
};

RitzState rayleigh_ritz(const Matrix& q, const Matrix& z) {
  Matrix g = q.transpose() * z;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  RitzState st;
  st.vectors = q * es.eigenvectors();
  st.images = z * es.eigenvectors();
  st.values = es.eigenvalues();
  st.by_modulus.resize(st.values.size());
  std::iota(st.by_modulus.begin(), st.by_modulus.end(), 0);
  std::sort(st.by_modulus.begin(), st.by_modulus.end(), [&](int a, int b) {
    return std::abs(st.values[a]) > std::abs(st.values[b]);
  });
  st.residuals.resize(st.values.size());
  for (Eigen::Index j = 0; j < st.values.size(); ++j)
    st.residuals[j] = (st.images.col(j) - st.values[j] * st.vectors.col(j)).norm();
  return st;
}

constexpr int kChebDegree = 8;

// p(L) V where p is the degree-d Chebyshev polynomial scaled to damp
// [-a0, a0]; columns are renormalized afterwards. Costs d - 1 block matvecs
// on top of the supplied images = L V.
Matrix cheb_filter(const SparseGraph& g, const Vector& dinv, double c, const Matrix& v,
                   const Matrix& images, double a0, Vector& scratch, int& sweeps) {
  Matrix tprev = v;
  Matrix tcur = images / a0;
  Matrix tnext(v.rows(), v.cols());
  for (int d = 2; d <= kChebDegree; ++d) {
    apply_op(g, dinv, c, tcur, tnext, scratch);
    sweeps++;
    tnext = (2.0 / a0) * tnext - tprev;
    tprev.swap(tcur);
    tcur.swap(tnext);
  }
  for (Eigen::Index col = 0; col < tcur.cols(); ++col) {
    double norm = tcur.col(col).norm();
    if (norm > 0.0) tcur.col(col) /= norm;
  }
  return tcur;
}

}  // namespace

Matrix spectral_embed(const SparseGraph& g, const SpectralConfig& cfg) {
  if (g.directed) throw ConfigError("spectral_embed expects an undirected graph");
  const std::int32_t n = g.n;
  const int r = cfg.r > 0 ? cfg.r : std::max(1, cfg.k - 1);
  const int q = r + 1;
  if (q > n) throw ConfigError("embedding needs r + 1 <= n");
  if (cfg.eig_tol <= 0.0) throw ConfigError("eig_tol must be positive");

  double mean_degree = n > 0 ? 2.0 * static_cast<double>(g.edge_count) / n : 0.0;
  double lam = cfg.lambda_hat > 0.0 ? cfg.lambda_hat : mean_degree;
  double c = cfg.perturb ? cfg.alpha_over_p * lam / n : 0.0;

  Vector dinv(n);
  for (std::int32_t i = 0; i < n; ++i) {
    double dt = g.degree(i) + c * n;
    dinv[i] = dt > 0.0 ? 1.0 / std::sqrt(dt) : 0.0;
  }

  const int s = std::min<int>(n, q + 8);
  const int max_sweeps = cfg.eig_iters > 0
                             ? cfg.eig_iters
                             : static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 200;

  Matrix basis(n, s);
  {
    rng::Stream st(cfg.seed, rng::kTagEig);
    for (std::int32_t i = 0; i < n; ++i)
      for (int j = 0; j < s; ++j) basis(i, j) = 2.0 * st.next_double() - 1.0;
  }
  basis = thin_orth(basis);

  Vector scratch(n);
  Matrix images(n, s);
  int sweeps = 0;
  double best_resid = std::numeric_limits<double>::max();
  apply_op(g, dinv, c, basis, images, scratch);
  sweeps++;

  int round = 0;
  while (true) {
    RitzState st = rayleigh_ritz(basis, images);
    round++;
    double worst = 0.0;
    for (int j = 0; j < q; ++j) worst = std::max(worst, st.residuals[st.by_modulus[j]]);
    best_resid = std::min(best_resid, worst);
    if (worst <= cfg.eig_tol) {
      // drop the largest algebraic value among the leading q, keep r by
      // modulus; a degenerate top (disconnected graphs) is broken toward the
      // most constant-like vector, the Perron direction of some component
      int drop = st.by_modulus[0];
      for (int j = 1; j < q; ++j)
        if (st.values[st.by_modulus[j]] > st.values[drop]) drop = st.by_modulus[j];
      double vmax = st.values[drop];
      double tie = 1e-9 * std::max(1.0, std::abs(vmax));
      double best_mass = -1.0;
      for (int j = 0; j < q; ++j) {
        int idx = st.by_modulus[j];
        if (st.values[idx] < vmax - tie) continue;
        double mass = std::abs(st.vectors.col(idx).sum());
        if (mass > best_mass) {
          best_mass = mass;
          drop = idx;
        }
      }
      Matrix embedding(n, r);
      int col = 0;
      for (int j = 0; j < q && col < r; ++j) {
        int idx = st.by_modulus[j];
        if (idx == drop) continue;
        embedding.col(col++) = st.vectors.col(idx);
      }
      if (c == 0.0) {
        // the operator's isolated rows are identically zero; scrub the
        // start-vector leakage so those embedding rows are zero exactly
        for (std::int32_t i = 0; i < n; ++i)
          if (dinv[i] == 0.0) embedding.row(i).setZero();
      }
      return embedding;
    }
    if (sweeps >= max_sweeps) throw EigNotConverged(best_resid, sweeps);

    double wanted = std::abs(st.values[st.by_modulus[q - 1]]);
    double unwanted = s > q ? std::abs(st.values[st.by_modulus[q]]) : 0.0;
    bool filter = round > 2 && unwanted < 0.995 * wanted && wanted > 1e-6 &&
                  sweeps + kChebDegree <= max_sweeps;
    if (filter) {
      // damp below a0, keep a0 strictly under the smallest wanted modulus so
      // clustered spectra (tight unwanted/wanted ratios) still make progress
      double a0 = std::max(0.05 * wanted, std::min(1.02 * unwanted, 0.99 * wanted));
      basis = thin_orth(cheb_filter(g, dinv, c, st.vectors, st.images, a0, scratch, sweeps));
    } else {
      basis = thin_orth(st.images);  // plain power step, images already hold L V
    }
    apply_op(g, dinv, c, basis, images, scratch);
    sweeps++;
  }
}

Labeling spectral_cluster(const SparseGraph& g, const SpectralConfig& cfg) {
  Matrix embedding = spectral_embed(g, cfg);
  RowMatrix points = embedding;
  auto res = kmeans(points, cfg.k, cfg.kmeans_restarts, rng::sub_key(cfg.seed, rng::kTagKmeans));
  return res.labels;
}

Labeling degree_cluster(const SparseGraph& g, int k, std::uint64_t seed, std::string* warning) {
  auto d = degrees(g);
  auto d2 = two_path_counts(g);
  RowMatrix feats(g.n, 2);
  for (std::int32_t i = 0; i < g.n; ++i) {
    feats(i, 0) = static_cast<double>(d[i]);
    feats(i, 1) = static_cast<double>(d2[i]);
  }
  for (int col = 0; col < 2; ++col) {
    double mean = feats.col(col).mean();
    double var = (feats.col(col).array() - mean).square().mean();
    double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    feats.col(col) = (feats.col(col).array() - mean) / sd;
  }
  if (warning) {
    std::vector<std::pair<double, double>> rows(g.n);
    for (std::int32_t i = 0; i < g.n; ++i) rows[i] = {feats(i, 0), feats(i, 1)};
    std::sort(rows.begin(), rows.end());
    auto distinct = std::unique(rows.begin(), rows.end()) - rows.begin();
    if (distinct < k)
      *warning = "degenerate clustering: only " + std::to_string(distinct) +
                 " distinct degree profiles for k = " + std::to_string(k);
  }
  return kmeans(feats, k, 10, seed).labels;
}

}  // namespace sbmkit
