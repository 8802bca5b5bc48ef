#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sbmkit/generators.hpp"
#include "sbmkit/metrics.hpp"
#include "sbmkit/theory.hpp"

using namespace sbmkit;
using namespace testutil;

namespace {

Labeling flip2(const Labeling& e) {
  Labeling out = e;
  for (auto& l : out.labels) l = 1 - l;
  return out;
}

// the majority-vote baseline: class 1 iff strictly more out-neighbors carry
// label 1 than label 2, ties to class 2
Labeling sign_vote(const SparseGraph& g, const Labeling& e) {
  Labeling out;
  out.k = 2;
  out.labels.resize(g.n);
  for (std::int32_t i = 0; i < g.n; ++i) {
    int diff = 0;
    for (auto j : g.neighbors_of(i)) diff += e.labels[j] == 0 ? 1 : -1;
    out.labels[i] = diff > 0 ? 0 : 1;
  }
  return out;
}

bool feasible_by_search(double a, double b, double gamma) {
  if (a <= b) return false;
  double g = std::min(gamma, 1.0 - gamma);
  double abar = a_bar_gamma(a, b, g);
  for (double eps = 1e-4; eps < 1.0; eps += 1e-4)
    if (2.0 * (1.0 + eps) * abar <= eps * (1.0 - 2.0 * g) * (a - b)) return true;
  return false;
}

}  // namespace

TEST_CASE("signal strength arithmetic") {
  CHECK(tau_squared(5.0, 1.0) == doctest::Approx(16.0 / 6.0).epsilon(1e-12));
  CHECK(tau_squared(2.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  // first-degree homogeneity
  CHECK(tau_squared(15.0, 3.0) == doctest::Approx(3.0 * tau_squared(5.0, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(tau_squared(0.0, 0.0), ConfigError);

  CHECK(a_bar_gamma(5.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a_bar_gamma(5.0, 1.0, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(a_bar_gamma(5.0, 1.0, 0.25) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("overlap labelings match the planted classes on exactly gamma*m nodes") {
  SUBCASE("counts and balance") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      auto e = sample_gamma_labeling(10, 0.3, seed);
      REQUIRE(e.labels.size() == 20);
      CHECK(e.k == 2);
      int match1 = 0, match2 = 0, zeros = 0;
      for (int i = 0; i < 10; ++i) match1 += e.labels[i] == 0;
      for (int i = 10; i < 20; ++i) match2 += e.labels[i] == 1;
      for (auto l : e.labels) zeros += l == 0;
      CHECK(match1 == 3);
      CHECK(match2 == 3);
      CHECK(zeros == 10);
    }
  }
  SUBCASE("every labeling of the small family appears") {
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 800; ++seed) {
      auto e = sample_gamma_labeling(4, 0.25, seed);
      std::string key;
      for (auto l : e.labels) key += char('0' + l);
      seen.insert(key);
    }
    CHECK(seen.size() == 16);  // C(4,1)^2 choices
  }
  SUBCASE("full overlap reproduces the planted labels") {
    auto e = sample_gamma_labeling(6, 1.0, 3);
    for (int i = 0; i < 6; ++i) CHECK(e.labels[i] == 0);
    for (int i = 6; i < 12; ++i) CHECK(e.labels[i] == 1);
  }
  SUBCASE("fractional match counts are rejected") {
    CHECK_THROWS_AS(sample_gamma_labeling(10, 0.33, 0), ConfigError);
  }
}

TEST_CASE("one-step rule on a hand-built digraph") {
  // arcs: 0->1, 0->2, 1->2, 2->3, 3->0; e = (1,2,1,2) in one-based classes
  auto g = graph_from(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 0}}, true);
  auto e = make_labels({0, 1, 0, 1}, 2);
  // neighbor label counts: node0 (1,1) tie; node1 (1,0); node2 (0,1); node3 (1,0)

  SUBCASE("overlap above one half follows the vote, ties to class 2") {
    OneStepOptions opts;
    opts.gamma = 0.75;
    auto out = one_step_cpl(g, e, 3.0, 1.0, opts);
    CHECK(out.labels == std::vector<std::int32_t>{1, 0, 1, 0});
  }
  SUBCASE("overlap below one half flips the vote, ties still to class 2") {
    OneStepOptions opts;
    opts.gamma = 0.25;
    auto out = one_step_cpl(g, e, 3.0, 1.0, opts);
    CHECK(out.labels == std::vector<std::int32_t>{1, 1, 0, 1});
  }
  SUBCASE("without gamma the rule is the bare sign test") {
    auto out = one_step_cpl(g, e, 3.0, 1.0);
    CHECK(out.labels == sign_vote(g, e).labels);
  }
}

TEST_CASE("one-step rule validates its inputs") {
  auto g = graph_from(4, {{0, 1}}, true);
  auto unbalanced = make_labels({0, 0, 0, 1}, 2);
  CHECK_THROWS_AS(one_step_cpl(g, unbalanced, 3.0, 1.0), ConfigError);

  auto g_odd = graph_from(3, {{0, 1}}, true);
  auto e_odd = make_labels({0, 1, 0}, 2);
  CHECK_THROWS_AS(one_step_cpl(g_odd, e_odd, 3.0, 1.0), ConfigError);

  auto e = make_labels({0, 1, 0, 1}, 2);
  OneStepOptions opts;
  opts.gamma = 0.75;
  CHECK_THROWS_AS(one_step_cpl(g, e, 2.0, 2.0, opts), ConfigError);
}

TEST_CASE("the gamma rule reduces to the sign test and ignores plug-in magnitudes") {
  int checked_ties = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    DirectedPairConfig gen;
    gen.m = 12 + 4 * (int(seed) % 5);  // multiples of 4 keep 0.75 * m integral
    gen.a = 4.0;
    gen.b = 1.5;
    gen.seed = 7000 + seed;
    auto sample = sample_directed(gen);
    auto e = sample_gamma_labeling(gen.m, 0.75, seed);
    auto vote = sign_vote(sample.graph, e);
    for (std::int32_t i = 0; i < sample.graph.n; ++i) {
      int diff = 0;
      for (auto j : sample.graph.neighbors_of(i)) diff += e.labels[j] == 0 ? 1 : -1;
      checked_ties += diff == 0;
    }

    for (double gamma : {0.6, 0.75, 0.9}) {
      OneStepOptions opts;
      opts.gamma = gamma;
      for (auto [ah, bh] : std::vector<std::pair<double, double>>{
               {3.0, 1.0}, {100.0, 1.0}, {1.0001, 1.0}, {7.0, 2.0}}) {
        auto out = one_step_cpl(sample.graph, e, ah, bh, opts);
        CHECK(out.labels == vote.labels);
      }
    }

    // below one half every decision flips except ties, which stay class 2
    OneStepOptions low;
    low.gamma = 0.3;
    auto flipped = one_step_cpl(sample.graph, e, 3.0, 1.0, low);
    for (std::int32_t i = 0; i < sample.graph.n; ++i) {
      int diff = 0;
      for (auto j : sample.graph.neighbors_of(i)) diff += e.labels[j] == 0 ? 1 : -1;
      if (diff == 0)
        CHECK(flipped.labels[i] == 1);
      else
        CHECK(flipped.labels[i] == (diff < 0 ? 0 : 1));
    }
  }
  CHECK(checked_ties > 0);  // the tie branch was actually exercised
}

TEST_CASE("coupled variant also reduces to the sign test on the coupled graph") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    DirectedPairConfig gen;
    gen.m = 15;
    gen.a = 5.0;
    gen.b = 1.0;
    gen.seed = 7100 + seed;
    auto directed = sample_directed(gen);
    auto coupled = couple_to_undirected(directed.graph);
    auto e = sample_gamma_labeling(gen.m, 0.6, seed);

    OneStepOptions opts;
    opts.gamma = 0.6;
    opts.model = TheoryModel::kCoupled;
    auto out = one_step_cpl(coupled, e, 5.0, 1.0, opts);
    CHECK(out.labels == sign_vote(coupled, e).labels);

    OneStepOptions other = opts;
    other.gamma = 0.8;
    auto out2 = one_step_cpl(coupled, e, 9.0, 2.0, other);
    CHECK(out2.labels == out.labels);
  }
}

TEST_CASE("mirroring gamma and the labeling together leaves the estimate unchanged") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    DirectedPairConfig gen;
    gen.m = 16;
    gen.a = 4.0;
    gen.b = 1.0;
    gen.seed = 7200 + seed;
    auto sample = sample_directed(gen);
    auto e = sample_gamma_labeling(gen.m, 0.75, seed);

    OneStepOptions hi, lo;
    hi.gamma = 0.75;
    lo.gamma = 0.25;
    auto a = one_step_cpl(sample.graph, e, 3.0, 1.0, hi);
    auto b = one_step_cpl(sample.graph, flip2(e), 3.0, 1.0, lo);
    CHECK(a.labels == b.labels);
  }
}

TEST_CASE("sparse-regime feasibility matches a brute-force epsilon search") {
  SUBCASE("known cells") {
    // ratio 4, gamma 0.3: needed margin (1-2g)(a-b) = 1.2b never reaches 4*abar = 7.6b
    CHECK_FALSE(sparse_regime_feasible(4.0, 1.0, 0.3));
    // ratio 20, gamma 0.05: margin 17.1b beats 4*abar = 7.8b
    CHECK(sparse_regime_feasible(20.0, 1.0, 0.05));
    CHECK_FALSE(sparse_regime_feasible(1.0, 1.0, 0.3));
    CHECK_FALSE(sparse_regime_feasible(1.0, 2.0, 0.3));
  }
  SUBCASE("grid sweep against the search") {
    for (double gamma : {0.02, 0.05, 0.1, 0.2, 0.3, 0.45, 0.7, 0.95, 0.98}) {
      for (double ratio : {1.5, 3.0, 6.0, 12.0, 25.0, 60.0}) {
        double b = 1.0, a = ratio;
        double g = std::min(gamma, 1.0 - gamma);
        double margin = (1.0 - 2.0 * g) * (a - b), wall = 4.0 * a_bar_gamma(a, b, g);
        if (std::abs(margin - wall) < 0.01 * (margin + wall)) continue;  // knife-edge cell
        CHECK(sparse_regime_feasible(a, b, gamma) == feasible_by_search(a, b, gamma));
      }
    }
  }
}

TEST_CASE("sweep configuration validation and rate solving") {
  TheoryConfig cfg;
  cfg.m = 100;
  cfg.tau2_grid = {1.0, 4.0};
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("rates reproduce the requested signal at the fixed ratio") {
    for (double tau2 : {0.5, 1.0, 8.0, 32.0}) {
      auto [a, b] = cfg.rates_for(tau2);
      CHECK(a / b == doctest::Approx(cfg.ratio).epsilon(1e-12));
      CHECK(tau_squared(a, b) == doctest::Approx(tau2).epsilon(1e-12));
    }
  }
  SUBCASE("rejections") {
    auto broken = cfg;
    broken.gamma = 0.5;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = cfg;
    broken.gamma = 1.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = cfg;
    broken.ratio = 1.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = cfg;
    broken.tau2_grid.clear();
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = cfg;
    broken.seeds = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
  }
}

TEST_CASE("theorem sweeps produce one record per cell and seed, deterministically") {
  TheoryConfig cfg;
  cfg.m = 300;
  cfg.gamma = 0.3;
  cfg.tau2_grid = {1.0, 4.0, 16.0};
  cfg.seeds = 10;
  cfg.seed = 5;

  for (auto model : {TheoryModel::kDirected, TheoryModel::kCoupled}) {
    cfg.model = model;
    auto records = theorem_sweep(cfg);
    REQUIRE(records.size() == 30);
    for (const auto& r : records) {
      CHECK(r.n == 600);
      CHECK(r.gamma == 0.3);
      CHECK(r.a / r.b == doctest::Approx(4.0).epsilon(1e-12));
      CHECK(r.mismatch >= 0.0);
      CHECK(r.mismatch <= 1.0);
      CHECK(r.a_bar == doctest::Approx(a_bar_gamma(r.a, r.b, 0.3)).epsilon(1e-12));
      CHECK(r.feasible == sparse_regime_feasible(r.a, r.b, 0.3));
    }
    auto again = theorem_sweep(cfg);
    REQUIRE(again.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(again[i].mismatch == records[i].mismatch);
      CHECK(again[i].seed == records[i].seed);
    }

    auto summaries = summarize_sweep(records);
    REQUIRE(summaries.size() == 3);
    CHECK(summaries[0].tau2 == 1.0);
    CHECK(summaries[2].tau2 == 16.0);
    for (const auto& s : summaries) {
      CHECK(s.median_mismatch >= 0.0);
      CHECK(s.median_mismatch <= 1.0);
      CHECK(s.iqr >= 0.0);
    }
    // stronger signal should not hurt
    CHECK(summaries[2].median_mismatch <= summaries[0].median_mismatch + 0.02);
  }
}
