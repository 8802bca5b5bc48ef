#include "sbmkit/kmeans.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "sbmkit/rng.hpp"

namespace sbmkit {

namespace {

constexpr int kMaxLloydIters = 100;

double sq_dist(const RowMatrix& pts, Eigen::Index i, const Matrix& centers, int c) {
  return (pts.row(i).transpose() - centers.col(c)).squaredNorm();
}

Matrix seed_centers(const RowMatrix& pts, int k, rng::Stream& st) {
  const Eigen::Index n = pts.rows();
  Matrix centers(pts.cols(), k);
  std::int64_t first = static_cast<std::int64_t>(st.next_below(n));
  centers.col(0) = pts.row(first).transpose();
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (int cc = 0; cc < c; ++cc) best = std::min(best, sq_dist(pts, i, centers, cc));
      d2[i] = best;
      total += best;
    }
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(st.next_below(n));  // all points already covered
    } else {
      double target = st.next_double() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (target < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.col(c) = pts.row(pick).transpose();
  }
  return centers;
}

KmeansResult run_once(const RowMatrix& pts, int k, rng::Stream st) {
  const Eigen::Index n = pts.rows();
  Matrix centers = seed_centers(pts, k, st);
  std::vector<std::int32_t> assign(n, -1);
  KmeansResult res;
  for (int iter = 0; iter < kMaxLloydIters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(pts, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(pts, i, centers, c);
        if (d < bd) {  // strict: ties keep the lowest index
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(pts.cols(), k);
    std::vector<std::int64_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assign[i]) += pts.row(i).transpose();
      counts[assign[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[c]);
        continue;
      }
      // relocate the empty cluster to the worst-fit point
      Eigen::Index far = 0;
      double fd = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double d = sq_dist(pts, i, centers, assign[i]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      centers.col(c) = pts.row(far).transpose();
      changed = true;
    }
    if (!changed) break;
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) res.inertia += sq_dist(pts, i, centers, assign[i]);
  res.labels.labels.assign(assign.begin(), assign.end());
  res.labels.k = k;
  return res;
}

}  // namespace

KmeansResult kmeans(const RowMatrix& points, int k, int restarts, std::uint64_t seed) {
  if (k < 1) throw ConfigError("kmeans needs k >= 1");
  if (points.rows() < k)
    throw ConfigError("kmeans needs at least k points (" + std::to_string(points.rows()) + " < " +
                      std::to_string(k) + ")");
  if (restarts < 1) restarts = 1;
  std::uint64_t base = rng::stream_key(seed, rng::kTagKmeans);
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::max();
  for (int r = 0; r < restarts; ++r) {
    KmeansResult cur = run_once(points, k, rng::Stream(rng::sub_key(base, r)));
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

}  // namespace sbmkit
