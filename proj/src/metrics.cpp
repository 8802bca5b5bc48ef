#include "sbmkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace sbmkit {

Matrix confusion(const Labeling& e, const Labeling& c) {
  if (e.n() != c.n()) throw ConfigError("labelings differ in length");
  if (e.n() == 0) throw ConfigError("labelings are empty");
  e.validate();
  c.validate();
  Matrix r = Matrix::Zero(e.k, c.k);
  for (std::int64_t i = 0; i < e.n(); ++i) r(e.labels[i], c.labels[i]) += 1.0;
  return r / static_cast<double>(e.n());
}

double nmi(const Labeling& e, const Labeling& c) {
  Matrix r = confusion(e, c);
  Vector row = r.rowwise().sum();
  Vector col = r.colwise().sum();
  double mi = 0.0, joint = 0.0;
  for (Eigen::Index a = 0; a < r.rows(); ++a) {
    for (Eigen::Index b = 0; b < r.cols(); ++b) {
      double p = r(a, b);
      if (p <= 0.0) continue;
      mi += p * std::log(p / (row(a) * col(b)));
      joint -= p * std::log(p);
    }
  }
  if (joint <= 1e-15) return 1.0;  // single cell: both labelings constant
  double v = mi / joint;
  return std::clamp(v, 0.0, 1.0);
}

namespace {

// max-weight perfect matching on a k x k score matrix (classic O(k^3)
// potential/augmenting-path scheme, run on negated scores)
std::int64_t max_assignment(const CountMatrix& score) {
  const int k = static_cast<int>(score.rows());
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(k + 1, 0), v(k + 1, 0);
  std::vector<int> p(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(k + 1, inf);
    std::vector<char> used(k + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      std::int64_t delta = inf;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        std::int64_t cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::int64_t total = 0;
  for (int j = 1; j <= k; ++j) total += score(p[j] - 1, j - 1);
  return total;
}

}  // namespace

double mismatch_ratio(const Labeling& pred, const Labeling& truth) {
  if (pred.n() != truth.n()) throw ConfigError("labelings differ in length");
  if (pred.k != truth.k) throw ConfigError("labelings differ in class count");
  if (pred.n() == 0) throw ConfigError("labelings are empty");
  pred.validate();
  truth.validate();
  const int k = pred.k;
  const std::int64_t n = pred.n();
  CountMatrix agree = CountMatrix::Zero(k, k);
  for (std::int64_t i = 0; i < n; ++i) agree(pred.labels[i], truth.labels[i])++;

  std::int64_t best;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    best = 0;
    do {
      std::int64_t hits = 0;
      for (int a = 0; a < k; ++a) hits += agree(a, perm[a]);
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = max_assignment(agree);
  }
  return static_cast<double>(n - best) / static_cast<double>(n);
}

}  // namespace sbmkit
