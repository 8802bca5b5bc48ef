#include "sbmkit/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sbmkit {

namespace {

Matrix row_normalized(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index l = 0; l < m.rows(); ++l) {
    double s = m.row(l).sum();
    if (s > 0.0)
      out.row(l) /= s;
    else
      out.row(l).setConstant(1.0 / m.cols());
  }
  return out;
}

// log responsibilities share one kernel: score(i, l) = logpi_l + shift_l +
// sum_m b_im * lograte(l, m). Returns the normalized soft assignment and
// accumulates sum_i logsumexp_l score(i, l).
SoftAssignment scores_to_soft(const IntMatrix& b, const Vector& logpi, const Vector& shift,
                              const Matrix& lograte, double* loglik) {
  const Eigen::Index n = b.rows();
  const int k = static_cast<int>(lograte.rows());
  SoftAssignment soft(n, k);
  double total = 0.0;
  std::vector<double> score(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < k; ++l) {
      double s = logpi[l] + shift[l];
      for (int m = 0; m < k; ++m) s += b(i, m) * lograte(l, m);
      score[l] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (int l = 0; l < k; ++l) {
      double v = std::exp(score[l] - mx);
      soft(i, l) = v;
      z += v;
    }
    soft.row(i) /= z;
    total += mx + std::log(z);
  }
  if (loglik) *loglik = total;
  return soft;
}

void check_params(const IntMatrix& b, const BlockParams& params, const Matrix& rates) {
  if (params.pi.size() != rates.rows() || rates.rows() != rates.cols())
    throw ConfigError("inconsistent parameter shapes");
  if (b.cols() != rates.cols()) throw ConfigError("block sums do not match parameter order");
}

SoftAssignment upl_soft(const IntMatrix& b, const BlockParams& params, double floor,
                        double* loglik) {
  check_params(b, params, params.lambda);
  // the floor guards rate logs only; a zero prior legitimately sends a class
  // to -inf, which the row-max softmax absorbs
  Vector logpi = params.pi.array().log();
  Vector shift = -params.lambda.rowwise().sum();
  Matrix lograte = (params.lambda.array() + floor).log();
  return scores_to_soft(b, logpi, shift, lograte, loglik);
}

SoftAssignment cpl_soft(const IntMatrix& b, const BlockParams& params, double floor,
                        double* loglik) {
  check_params(b, params, params.theta);
  Vector logpi = params.pi.array().log();
  Vector shift = Vector::Zero(params.pi.size());
  Matrix lograte = (params.theta.array() + floor).log();
  return scores_to_soft(b, logpi, shift, lograte, loglik);
}

// responsibility-weighted block sums, fixed node order
Matrix weighted_sums(const IntMatrix& b, const SoftAssignment& soft) {
  const Eigen::Index n = b.rows();
  const int k = static_cast<int>(soft.cols());
  Matrix wb = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int l = 0; l < k; ++l) {
      double w = soft(i, l);
      if (w == 0.0) continue;
      for (int m = 0; m < k; ++m) wb(l, m) += w * b(i, m);
    }
  return wb;
}

}  // namespace

BlockParams init_params(const SparseGraph& g, const Labeling& e) {
  if (e.n() != g.n) throw ConfigError("labeling length does not match graph");
  auto counts = e.class_counts();
  for (int l = 0; l < e.k; ++l)
    if (counts[l] == 0)
      throw ConfigError("class " + std::to_string(l + 1) +
                        " is empty; re-initialize with a labeling covering every class");
  const int k = e.k;
  const double n = static_cast<double>(g.n);
  BlockParams params;
  params.pi.resize(k);
  for (int l = 0; l < k; ++l) params.pi[l] = counts[l] / n;

  BlockCounts bc = block_edge_counts(g, e);
  params.p = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b2 = 0; b2 < k; ++b2)
      if (bc.npairs(a, b2) > 0)
        params.p(a, b2) = static_cast<double>(bc.edges(a, b2)) / bc.npairs(a, b2);

  params.lambda.resize(k, k);
  for (int l = 0; l < k; ++l)
    for (int b2 = 0; b2 < k; ++b2) params.lambda(l, b2) = n * params.pi[b2] * params.p(b2, l);
  params.theta = row_normalized(params.lambda);
  return params;
}

SoftAssignment upl_e_step(const IntMatrix& b, const BlockParams& params, double rate_floor) {
  return upl_soft(b, params, rate_floor, nullptr);
}

SoftAssignment cpl_e_step(const IntMatrix& b, const BlockParams& params, double rate_floor) {
  return cpl_soft(b, params, rate_floor, nullptr);
}

double upl_loglik(const IntMatrix& b, const BlockParams& params, double rate_floor) {
  double ll = 0.0;
  upl_soft(b, params, rate_floor, &ll);
  return ll;
}

double cpl_loglik(const IntMatrix& b, const BlockParams& params, double rate_floor) {
  double ll = 0.0;
  cpl_soft(b, params, rate_floor, &ll);
  return ll;
}

MStep upl_m_step(const IntMatrix& b, const SoftAssignment& soft) {
  if (b.rows() != soft.rows()) throw ConfigError("block sums and soft assignment disagree");
  const int k = static_cast<int>(soft.cols());
  const double n = static_cast<double>(b.rows());
  MStep step;
  Vector colsum = soft.colwise().sum();
  step.pi = colsum / n;
  Matrix wb = weighted_sums(b, soft);
  step.rates = Matrix::Zero(k, k);
  for (int l = 0; l < k; ++l) {
    if (colsum[l] > 0.0)
      step.rates.row(l) = wb.row(l) / colsum[l];
    else
      step.degenerate = true;
  }
  return step;
}

MStep cpl_m_step(const IntMatrix& b, const SoftAssignment& soft) {
  if (b.rows() != soft.rows()) throw ConfigError("block sums and soft assignment disagree");
  const int k = static_cast<int>(soft.cols());
  const double n = static_cast<double>(b.rows());
  MStep step;
  Vector colsum = soft.colwise().sum();
  step.pi = colsum / n;
  Matrix wb = weighted_sums(b, soft);
  step.rates = Matrix::Zero(k, k);
  for (int l = 0; l < k; ++l) {
    double denom = wb.row(l).sum();  // sum_i soft_il * d_i since rows of b sum to d_i
    if (denom > 0.0)
      step.rates.row(l) = wb.row(l) / denom;
    else {
      step.rates.row(l).setConstant(1.0 / k);
      step.degenerate = true;
    }
  }
  return step;
}

namespace {

double rel_change(const Vector& a, const Vector& b) {
  double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

double rel_change(const Matrix& a, const Matrix& b) {
  double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

// Soft-membership edge density refresh: p(l, k) = sum over ordered adjacent
// pairs of thresholded responsibilities, divided by the ordered pair count of
// the hard labeling. Rates follow from p and the hard class fractions.
void refresh_params(const SparseGraph& g, const SoftAssignment& soft, const Labeling& e,
                    double soft_threshold, BlockParams* params) {
  const int k = e.k;
  const double n = static_cast<double>(g.n);
  SoftAssignment trimmed = soft;
  for (Eigen::Index i = 0; i < trimmed.rows(); ++i) {
    for (int l = 0; l < k; ++l)
      if (trimmed(i, l) < soft_threshold) trimmed(i, l) = 0.0;
    double s = trimmed.row(i).sum();
    if (s > 0.0) {
      trimmed.row(i) /= s;
    } else {
      int best;
      soft.row(i).maxCoeff(&best);
      trimmed(i, best) = 1.0;
    }
  }

  Matrix mass = Matrix::Zero(k, k);
  for (std::int32_t i = 0; i < g.n; ++i) {
    for (auto j : g.neighbors_of(i)) {
      if (i == j) continue;
      for (int l = 0; l < k; ++l) {
        double w = trimmed(i, l);
        if (w == 0.0) continue;
        for (int m = 0; m < k; ++m) mass(l, m) += w * trimmed(j, m);
      }
    }
  }
  auto counts = e.class_counts();
  params->p = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      std::int64_t pairs = (a == b) ? counts[a] * (counts[a] - 1) : counts[a] * counts[b];
      if (pairs > 0) params->p(a, b) = mass(a, b) / pairs;
    }
  params->lambda.resize(k, k);
  for (int l = 0; l < k; ++l)
    for (int b = 0; b < k; ++b) params->lambda(l, b) = n * (counts[b] / n) * params->p(b, l);
  params->theta = row_normalized(params->lambda);
}

}  // namespace

FitResult fit(const SparseGraph& g, const Labeling& init, Method method, const FitConfig& cfg) {
  if (cfg.t_outer < 1 || cfg.inner_max < 1) throw ConfigError("iteration budgets must be positive");
  if (cfg.inner_tol < 0.0 || cfg.rate_floor <= 0.0)
    throw ConfigError("tolerances must be positive");
  const int k = init.k;
  const std::int32_t n = g.n;

  FitResult res;
  res.params = init_params(g, init);
  Labeling e = init;

  for (int round = 1; round <= cfg.t_outer; ++round) {
    IntMatrix b = block_sums(g, e);
    std::vector<double> trace;
    for (int it = 0; it < cfg.inner_max; ++it) {
      double ll = 0.0;
      SoftAssignment soft = method == Method::kUpl ? upl_e_step(b, res.params, cfg.rate_floor)
                                                   : cpl_e_step(b, res.params, cfg.rate_floor);
      MStep step = method == Method::kUpl ? upl_m_step(b, soft) : cpl_m_step(b, soft);
      if (step.degenerate)
        res.diagnostics.push_back("round " + std::to_string(round) + ": inner EM starved a class");
      double delta = rel_change(step.pi, res.params.pi);
      if (method == Method::kUpl) {
        delta = std::max(delta, rel_change(step.rates, res.params.lambda));
        for (int l = 0; l < k; ++l)
          if (soft.col(l).sum() > 0.0) res.params.lambda.row(l) = step.rates.row(l);
        res.params.theta = row_normalized(res.params.lambda);
        res.params.pi = step.pi;
        ll = upl_loglik(b, res.params, cfg.rate_floor);
      } else {
        delta = std::max(delta, rel_change(step.rates, res.params.theta));
        res.params.theta = step.rates;
        res.params.pi = step.pi;
        ll = cpl_loglik(b, res.params, cfg.rate_floor);
      }
      trace.push_back(ll);
      res.soft = std::move(soft);
      if (delta < cfg.inner_tol) break;
    }
    res.loglik_trace.push_back(std::move(trace));

    Labeling next;
    next.k = k;
    next.labels.resize(n);
    for (std::int32_t i = 0; i < n; ++i) {
      int best = 0;
      for (int l = 1; l < k; ++l)
        if (res.soft(i, l) > res.soft(i, best)) best = l;
      next.labels[i] = best;
    }

    bool reseeded = false;
    {
      std::vector<std::int64_t> counts(k, 0);
      for (auto l : next.labels) counts[l]++;
      std::vector<std::int32_t> order;
      for (int cls = 0; cls < k; ++cls) {
        if (counts[cls] > 0) continue;
        if (order.empty()) {
          order.resize(n);
          std::iota(order.begin(), order.end(), 0);
          std::stable_sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
            return res.soft.row(x).maxCoeff() < res.soft.row(y).maxCoeff();
          });
        }
        std::int64_t want = std::max<std::int64_t>(1, n / (50 * k));
        std::int64_t moved = 0;
        for (auto i : order) {
          if (moved >= want) break;
          if (counts[next.labels[i]] <= 1) continue;  // do not empty another class
          counts[next.labels[i]]--;
          next.labels[i] = cls;
          counts[cls]++;
          moved++;
        }
        res.diagnostics.push_back("round " + std::to_string(round) + ": class " +
                                  std::to_string(cls + 1) + " emptied, reseeded " +
                                  std::to_string(moved) + " low-confidence nodes");
        reseeded = true;
      }
    }

    bool changed = reseeded || next.labels != e.labels;
    e = std::move(next);
    refresh_params(g, res.soft, e, cfg.soft_threshold, &res.params);
    res.outer_rounds = round;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  res.labels = std::move(e);
  return res;
}

}  // namespace sbmkit
