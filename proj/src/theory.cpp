#include "sbmkit/theory.hpp"

#include <algorithm>
#include <cmath>

#include "sbmkit/metrics.hpp"
#include "sbmkit/rng.hpp"

namespace sbmkit {

double tau_squared(double a, double b) {
  if (a < 0.0 || b < 0.0) throw ConfigError("rates must be nonnegative");
  if (a + b <= 0.0) throw ConfigError("tau^2 undefined for a + b = 0");
  return (a - b) * (a - b) / (a + b);
}

double a_bar_gamma(double a, double b, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  return gamma * a + (1.0 - gamma) * b;
}

Labeling sample_gamma_labeling(std::int32_t m, double gamma, std::uint64_t seed) {
  if (m < 1) throw ConfigError("m must be at least 1");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  double gm = gamma * m;
  auto matches = static_cast<std::int32_t>(std::llround(gm));
  if (std::abs(gm - matches) > 1e-9)
    throw ConfigError("gamma * m must be an integer (got " + std::to_string(gm) + ")");

  Labeling e;
  e.k = 2;
  e.labels.assign(2 * static_cast<std::size_t>(m), 0);
  rng::Stream st(seed, rng::kTagGammaLabel);
  // uniform matches-subset per community via partial Fisher-Yates
  std::vector<std::int32_t> idx(m);
  for (std::int32_t community = 0; community < 2; ++community) {
    for (std::int32_t i = 0; i < m; ++i) idx[i] = i;
    for (std::int32_t i = 0; i < matches; ++i) {
      auto j = i + static_cast<std::int32_t>(st.next_below(m - i));
      std::swap(idx[i], idx[j]);
    }
    // community 0: matches keep label 0, rest flip; community 1: mirrored
    for (std::int32_t i = 0; i < m; ++i) {
      bool match = i < matches;
      std::int32_t node = community * m + idx[i];
      std::int32_t truth = community;
      e.labels[node] = match ? truth : 1 - truth;
    }
  }
  return e;
}

namespace {

Matrix closed_form_theta(double a_hat, double b_hat, double gamma, std::int32_t m,
                         TheoryModel model) {
  Matrix pt(2, 2);
  pt << a_hat, b_hat, b_hat, a_hat;
  pt /= static_cast<double>(m);
  Matrix p = model == TheoryModel::kDirected ? pt : coupled_edge_prob(pt);
  Matrix r(2, 2);
  r << gamma, 1.0 - gamma, 1.0 - gamma, gamma;
  r *= 0.5;
  double n = 2.0 * m;
  Matrix lambda = (n * r * p).transpose();
  Matrix theta(2, 2);
  for (int l = 0; l < 2; ++l) {
    double s = lambda.row(l).sum();
    if (s <= 0.0) throw ConfigError("degenerate rates: a_hat + b_hat must be positive");
    theta.row(l) = lambda.row(l) / s;
  }
  return theta;
}

}  // namespace

Labeling one_step_cpl(const SparseGraph& g, const Labeling& e, double a_hat, double b_hat,
                      const OneStepOptions& opts) {
  if (g.n % 2 != 0) throw ConfigError("the two-community rule needs an even node count");
  if (e.k != 2 || e.n() != g.n) throw ConfigError("labeling must be a 2-class labeling of g");
  e.validate();
  auto counts = e.class_counts();
  if (counts[0] != counts[1]) throw ConfigError("labeling must be balanced");
  if (a_hat < 0.0 || b_hat < 0.0) throw ConfigError("plug-in rates must be nonnegative");
  if (a_hat == b_hat) throw ConfigError("plug-in rates must differ");

  IntMatrix b = block_sums(g, e);
  Labeling out;
  out.k = 2;
  out.labels.resize(g.n);

  if (opts.gamma.has_value()) {
    double gamma = *opts.gamma;
    if (gamma <= 0.0 || gamma >= 1.0 || gamma == 0.5)
      throw ConfigError("gamma must lie in (0, 1) and differ from 1/2");
    Matrix theta = closed_form_theta(a_hat, b_hat, gamma, g.n / 2, opts.model);
    Matrix logtheta = theta.array().log();
    for (std::int32_t i = 0; i < g.n; ++i) {
      // equal priors: log pi drops out of the comparison
      double s0 = b(i, 0) * logtheta(0, 0) + b(i, 1) * logtheta(0, 1);
      double s1 = b(i, 0) * logtheta(1, 0) + b(i, 1) * logtheta(1, 1);
      out.labels[i] = s0 > s1 ? 0 : 1;  // ties resolve to class 2
    }
  } else {
    for (std::int32_t i = 0; i < g.n; ++i)
      out.labels[i] = b(i, 0) > b(i, 1) ? 0 : 1;  // neighborhood majority vote
  }
  return out;
}

bool sparse_regime_feasible(double a, double b, double gamma) {
  if (a <= b) return false;
  double g = std::min(gamma, 1.0 - gamma);
  if (g <= 0.0 || g >= 0.5) return false;
  return (1.0 - 2.0 * g) * (a - b) > 4.0 * a_bar_gamma(a, b, g);
}

void TheoryConfig::validate() const {
  if (m < 1) throw ConfigError("m must be at least 1");
  if (gamma <= 0.0 || gamma >= 1.0 || gamma == 0.5)
    throw ConfigError("gamma must lie in (0, 1) and differ from 1/2");
  if (ratio <= 1.0) throw ConfigError("ratio a/b must exceed 1");
  if (tau2_grid.empty()) throw ConfigError("tau^2 grid is empty");
  for (double t : tau2_grid)
    if (t <= 0.0) throw ConfigError("tau^2 grid entries must be positive");
  if (seeds < 1) throw ConfigError("seed count must be at least 1");
}

std::pair<double, double> TheoryConfig::rates_for(double tau2) const {
  // tau2 = b (ratio - 1)^2 / (ratio + 1)
  double b = tau2 * (ratio + 1.0) / ((ratio - 1.0) * (ratio - 1.0));
  return {ratio * b, b};
}

std::vector<SweepRecord> theorem_sweep(const TheoryConfig& cfg) {
  cfg.validate();
  std::vector<SweepRecord> records;
  records.reserve(cfg.tau2_grid.size() * cfg.seeds);
  std::uint64_t base = rng::stream_key(cfg.seed, rng::kTagSweep);
  for (std::size_t ti = 0; ti < cfg.tau2_grid.size(); ++ti) {
    double tau2 = cfg.tau2_grid[ti];
    auto [a, b] = cfg.rates_for(tau2);
    double a_hat = cfg.a_hat > 0.0 ? cfg.a_hat : a;
    double b_hat = cfg.b_hat > 0.0 ? cfg.b_hat : b;
    bool feasible = sparse_regime_feasible(a, b, cfg.gamma);
    for (int s = 0; s < cfg.seeds; ++s) {
      std::uint64_t cell_seed = rng::sub_key(base, ti, static_cast<std::uint64_t>(s));
      DirectedPairConfig dcfg{cfg.m, a, b, cfg.self_loops, cell_seed};
      DirectedSample sample = sample_directed(dcfg);
      SparseGraph coupled;
      const SparseGraph* g = &sample.graph;
      if (cfg.model == TheoryModel::kCoupled) {
        coupled = couple_to_undirected(sample.graph);
        g = &coupled;
      }
      Labeling e = sample_gamma_labeling(cfg.m, cfg.gamma, cell_seed);
      OneStepOptions opts{cfg.gamma, cfg.model};
      Labeling pred = one_step_cpl(*g, e, a_hat, b_hat, opts);
      double mis = mismatch_ratio(pred, sample.truth);
      records.push_back({cfg.model, 2 * cfg.m, cfg.gamma, a, b, tau2, a_bar_gamma(a, b, cfg.gamma),
                         cell_seed, mis, feasible});
    }
  }
  return records;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRecord>& records) {
  std::vector<SweepSummary> out;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    std::vector<double> vals;
    while (j < records.size() && records[j].tau2 == records[i].tau2)
      vals.push_back(records[j++].mismatch);
    std::sort(vals.begin(), vals.end());
    auto quantile = [&](double q) {
      double pos = q * (vals.size() - 1);
      std::size_t lo = static_cast<std::size_t>(pos);
      std::size_t hi = std::min(lo + 1, vals.size() - 1);
      return vals[lo] + (pos - lo) * (vals[hi] - vals[lo]);
    };
    out.push_back({records[i].tau2, quantile(0.5), quantile(0.75) - quantile(0.25),
                   records[i].feasible});
    i = j;
  }
  return out;
}

}  // namespace sbmkit
