#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbmkit/em.hpp"
#include "sbmkit/generators.hpp"
#include "sbmkit/graph.hpp"
#include "sbmkit/metrics.hpp"
#include "sbmkit/rng.hpp"
#include "sbmkit/spectral.hpp"
#include "sbmkit/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbmkit;

namespace {

constexpr const char* kVersion = "sbmkit 0.1.0";

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;  // informational: all kernels are serial and deterministic
  std::string out_dir = ".";
  std::string config_path;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "root RNG seed");
  cmd->add_option("--threads", c.threads, "worker cap (results identical at any setting)");
  cmd->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--config", c.config_path, "JSON config file; flags override its fields");
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct Manifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings;
  json extra;

  // written last, so every listed output already exists on disk
  void write(const fs::path& dir) {
    json j{{"tool_version", kVersion}, {"command", command}, {"config", config},
           {"seed", seed},             {"outputs", outputs}, {"timings", timings}};
    if (!extra.is_null()) j["results"] = extra;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
  }
};

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_nodemap(const fs::path& path, const LoadDiagnostics& diag,
                   const std::vector<std::int32_t>* keep = nullptr) {
  std::ofstream out(path);
  if (keep) {
    for (auto idx : *keep) out << diag.node_ids[idx] << '\n';
  } else {
    for (const auto& tok : diag.node_ids) out << tok << '\n';
  }
}

struct LoadedGraph {
  SparseGraph graph;
  LoadDiagnostics diag;
  std::vector<std::int32_t> keep;  // dense index -> index in the raw file
  bool reduced = false;
};

// The loader assigns ids in first-appearance order. Files whose tokens are
// all integers (our own generate output in particular) get re-sorted by
// numeric value so per-node outputs line up with label files written in node
// order; nodemap.txt stays the join key for everything else.
void canonicalize_numeric(SparseGraph& g, LoadDiagnostics& diag) {
  std::vector<long long> value(g.n);
  for (std::int32_t i = 0; i < g.n; ++i) {
    const std::string& tok = diag.node_ids[i];
    if (tok.empty() || tok.size() > 18) return;
    long long v = 0;
    for (char ch : tok) {
      if (ch < '0' || ch > '9') return;
      v = v * 10 + (ch - '0');
    }
    value[i] = v;
  }
  std::vector<std::int32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return value[a] != value[b] ? value[a] < value[b] : diag.node_ids[a] < diag.node_ids[b];
  });
  std::vector<std::int32_t> new_id(g.n);
  bool identity = true;
  for (std::int32_t pos = 0; pos < g.n; ++pos) {
    new_id[order[pos]] = pos;
    identity = identity && order[pos] == pos;
  }
  if (identity) return;

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  edges.reserve(g.edge_count);
  for (std::int32_t i = 0; i < g.n; ++i)
    for (auto j : g.neighbors_of(i))
      if (g.directed || i < j) edges.emplace_back(new_id[i], new_id[j]);
  g = g.directed ? build_directed(g.n, std::move(edges)) : build_undirected(g.n, std::move(edges));
  std::vector<std::string> ids(g.n);
  for (std::int32_t pos = 0; pos < g.n; ++pos) ids[pos] = diag.node_ids[order[pos]];
  diag.node_ids = std::move(ids);
}

LoadedGraph load_graph(const std::string& path, bool directed, bool lcc) {
  LoadedGraph lg;
  lg.graph = load_edge_list(path, directed, &lg.diag);
  if (lg.diag.duplicates_dropped || lg.diag.self_loops_dropped)
    std::cerr << "note: normalized input (" << lg.diag.duplicates_dropped << " duplicate, "
              << lg.diag.self_loops_dropped << " self-loop lines dropped)\n";
  canonicalize_numeric(lg.graph, lg.diag);
  if (lcc) {
    auto view = largest_component(lg.graph);
    lg.graph = std::move(view.graph);
    lg.keep = std::move(view.keep);
    lg.reduced = true;
  }
  return lg;
}

// --------------------------------------------------------------- configs

void apply_sbm_json(const json& j, SbmConfig& cfg) {
  if (j.contains("n")) cfg.n = j.at("n").get<std::int32_t>();
  if (j.contains("k")) cfg.k = j.at("k").get<int>();
  if (j.contains("pi")) cfg.pi = j.at("pi").get<std::vector<double>>();
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("w")) cfg.w = j.at("w").get<std::vector<double>>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  if (j.contains("theta_low")) cfg.theta_low = j.at("theta_low").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
}

void apply_directed_json(const json& j, DirectedPairConfig& cfg) {
  if (j.contains("m")) cfg.m = j.at("m").get<std::int32_t>();
  if (j.contains("a")) cfg.a = j.at("a").get<double>();
  if (j.contains("b")) cfg.b = j.at("b").get<double>();
  if (j.contains("self_loops")) cfg.self_loops = j.at("self_loops").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
}

// --------------------------------------------------------------- generate

struct GenerateArgs {
  Common common;
  std::string model = "sbm";
  SbmConfig sbm{};
  DirectedPairConfig dir{};
  bool seed_given = false, sbm_seed_given = false;
};

int cmd_generate(GenerateArgs& a) {
  if (!a.common.config_path.empty()) {
    json j = load_config_json(a.common.config_path);
    if (j.contains("model")) a.model = j.at("model").get<std::string>();
    // config fills fields the command line left at their zero defaults
    if (a.model == "directed") {
      DirectedPairConfig base{};
      apply_directed_json(j, base);
      if (a.dir.m == 0) a.dir.m = base.m;
      if (a.dir.a == 0.0) a.dir.a = base.a;
      if (a.dir.b == 0.0) a.dir.b = base.b;
      if (j.contains("self_loops")) a.dir.self_loops = base.self_loops;
      if (a.dir.seed == 0) a.dir.seed = base.seed;
    } else {
      SbmConfig base{};
      apply_sbm_json(j, base);
      if (a.sbm.n == 0) a.sbm.n = base.n;
      if (a.sbm.k == 0) a.sbm.k = base.k;
      if (a.sbm.pi.empty()) a.sbm.pi = base.pi;
      if (j.contains("beta") && a.sbm.beta == 0.0) a.sbm.beta = base.beta;
      if (a.sbm.w.empty()) a.sbm.w = base.w;
      if (a.sbm.lambda == 0.0) a.sbm.lambda = base.lambda;
      if (j.contains("rho") && a.sbm.rho == 0.0) a.sbm.rho = base.rho;
      if (j.contains("theta_low")) a.sbm.theta_low = base.theta_low;
      if (a.sbm.seed == 0) a.sbm.seed = base.seed;
    }
  }

  auto out_dir = ensure_out_dir(a.common.out_dir);
  Manifest manifest;
  manifest.command = "generate";

  Timer t;
  SparseGraph graph;
  Labeling truth;
  std::vector<double> theta;
  if (a.model == "sbm") {
    if (a.sbm.seed == 0) a.sbm.seed = a.common.seed;
    a.sbm.validate();
    auto sample = sample_dcsbm(a.sbm);
    graph = std::move(sample.graph);
    truth = std::move(sample.truth);
    theta = std::move(sample.theta);
    manifest.seed = a.sbm.seed;
    manifest.config = {{"model", "sbm"},
                       {"n", a.sbm.n},
                       {"k", a.sbm.k},
                       {"pi", a.sbm.pi_or_uniform()},
                       {"beta", a.sbm.beta},
                       {"w", a.sbm.w_or_ones()},
                       {"lambda", a.sbm.lambda},
                       {"rho", a.sbm.rho},
                       {"theta_low", a.sbm.theta_low},
                       {"seed", a.sbm.seed}};
  } else if (a.model == "directed") {
    if (a.dir.seed == 0) a.dir.seed = a.common.seed;
    a.dir.validate();
    auto sample = sample_directed(a.dir);
    graph = std::move(sample.graph);
    truth = std::move(sample.truth);
    manifest.seed = a.dir.seed;
    manifest.config = {{"model", "directed"},          {"m", a.dir.m}, {"a", a.dir.a},
                       {"b", a.dir.b},                 {"self_loops", a.dir.self_loops},
                       {"seed", a.dir.seed}};
  } else {
    throw ConfigError("unknown model: " + a.model);
  }
  manifest.timings["generate"] = t.seconds();

  {
    std::ofstream out(out_dir / "edges.txt");
    write_edge_list(out, graph);
  }
  manifest.outputs.push_back("edges.txt");
  write_labels((out_dir / "truth.txt").string(), truth.labels);
  manifest.outputs.push_back("truth.txt");
  if (a.model == "sbm" && a.sbm.rho > 0.0) {
    std::ofstream out(out_dir / "theta.txt");
    for (double x : theta) out << x << '\n';
    manifest.outputs.push_back("theta.txt");
  }
  manifest.write(out_dir);

  double mean_degree =
      graph.n > 0 ? (graph.directed ? 1.0 : 2.0) * static_cast<double>(graph.edge_count) / graph.n
                  : 0.0;
  std::cout << "generated n=" << graph.n << " edges=" << graph.edge_count
            << " mean_degree=" << mean_degree << '\n';
  return 0;
}

// ------------------------------------------------------------------- init

struct InitArgs {
  Common common;
  std::string graph_path;
  std::string method = "scp";
  int k = 0;
  int r = 0;
  int eig_iters = 0;
  double eig_tol = 1e-8;
  int restarts = 10;
  bool lcc = false;
};

Labeling run_init(const SparseGraph& g, const InitArgs& a) {
  if (a.k < 1) throw ConfigError("--k must be at least 1");
  if (a.method == "dc" || a.method == "degree") {
    std::string warning;
    Labeling l = degree_cluster(g, a.k, a.common.seed, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
    return l;
  }
  if (a.method == "sc" || a.method == "scp") {
    SpectralConfig cfg;
    cfg.k = a.k;
    cfg.r = a.r;
    cfg.perturb = a.method == "scp";
    cfg.eig_iters = a.eig_iters;
    cfg.eig_tol = a.eig_tol;
    cfg.kmeans_restarts = a.restarts;
    cfg.seed = a.common.seed;
    return spectral_cluster(g, cfg);
  }
  throw ConfigError("unknown init method: " + a.method + " (expected dc, sc, or scp)");
}

int cmd_init(InitArgs& a) {
  auto out_dir = ensure_out_dir(a.common.out_dir);
  LoadedGraph lg = load_graph(a.graph_path, false, a.lcc);

  Timer t;
  Labeling labels = run_init(lg.graph, a);
  Manifest manifest;
  manifest.command = "init";
  manifest.seed = a.common.seed;
  manifest.config = {{"graph", a.graph_path}, {"method", a.method},       {"k", a.k},
                     {"r", a.r},              {"eig_iters", a.eig_iters}, {"eig_tol", a.eig_tol},
                     {"restarts", a.restarts}, {"largest_component", a.lcc}};
  manifest.timings["init"] = t.seconds();

  write_labels((out_dir / "labels.txt").string(), labels.labels);
  manifest.outputs.push_back("labels.txt");
  write_nodemap(out_dir / "nodemap.txt", lg.diag, lg.reduced ? &lg.keep : nullptr);
  manifest.outputs.push_back("nodemap.txt");
  manifest.write(out_dir);

  std::cout << "init method=" << a.method << " n=" << lg.graph.n << " k=" << a.k << '\n';
  return 0;
}

// -------------------------------------------------------------------- fit

struct FitArgs {
  Common common;
  std::string graph_path;
  std::string method = "cpl";
  std::string init_labels;
  std::string init_method = "scp";
  int k = 0;
  FitConfig fit{};
  bool lcc = false;
};

int cmd_fit(FitArgs& a) {
  auto out_dir = ensure_out_dir(a.common.out_dir);
  LoadedGraph lg = load_graph(a.graph_path, false, a.lcc);

  Method method;
  if (a.method == "upl")
    method = Method::kUpl;
  else if (a.method == "cpl")
    method = Method::kCpl;
  else
    throw ConfigError("unknown fit method: " + a.method + " (expected upl or cpl)");

  Manifest manifest;
  manifest.command = "fit";
  manifest.seed = a.common.seed;

  Labeling init;
  Timer t_init;
  if (!a.init_labels.empty()) {
    init.labels = read_labels(a.init_labels);
    if (static_cast<std::int64_t>(init.labels.size()) != lg.graph.n)
      throw ConfigError("initial labels length does not match graph");
    int mx = 0;
    for (auto l : init.labels) mx = std::max(mx, l + 1);
    init.k = a.k > 0 ? a.k : mx;
    init.validate();
  } else {
    if (a.k < 1) throw ConfigError("--k is required when no initial labels are given");
    InitArgs ia;
    ia.common = a.common;
    ia.method = a.init_method;
    ia.k = a.k;
    init = run_init(lg.graph, ia);
  }
  double init_seconds = t_init.seconds();

  Timer t_fit;
  FitResult res = fit(lg.graph, init, method, a.fit);
  manifest.timings["init"] = init_seconds;
  manifest.timings["fit"] = t_fit.seconds();
  manifest.timings["fit_per_round"] =
      res.outer_rounds > 0 ? manifest.timings["fit"] / res.outer_rounds : 0.0;

  manifest.config = {{"graph", a.graph_path},
                     {"method", a.method},
                     {"k", init.k},
                     {"init", a.init_labels.empty() ? a.init_method : a.init_labels},
                     {"t_outer", a.fit.t_outer},
                     {"inner_tol", a.fit.inner_tol},
                     {"inner_max", a.fit.inner_max},
                     {"soft_threshold", a.fit.soft_threshold},
                     {"rate_floor", a.fit.rate_floor},
                     {"largest_component", a.lcc}};

  write_labels((out_dir / "labels.txt").string(), res.labels.labels);
  manifest.outputs.push_back("labels.txt");
  {
    json params{{"pi_hat", std::vector<double>(res.params.pi.data(),
                                               res.params.pi.data() + res.params.pi.size())},
                {"p_hat", matrix_to_json(res.params.p)},
                {"lambda_hat", matrix_to_json(res.params.lambda)},
                {"theta_hat", matrix_to_json(res.params.theta)},
                {"outer_rounds", res.outer_rounds},
                {"converged", res.converged},
                {"loglik_trace", res.loglik_trace},
                {"diagnostics", res.diagnostics}};
    std::ofstream out(out_dir / "params.json");
    out << params.dump(2) << '\n';
  }
  manifest.outputs.push_back("params.json");
  write_nodemap(out_dir / "nodemap.txt", lg.diag, lg.reduced ? &lg.keep : nullptr);
  manifest.outputs.push_back("nodemap.txt");
  manifest.write(out_dir);

  std::cout << "fit method=" << a.method << " rounds=" << res.outer_rounds
            << " converged=" << (res.converged ? "yes" : "no") << '\n';
  return 0;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string pred_path;
  std::string truth_path;
  std::string graph_path;
  bool lcc = false;
};

int cmd_eval(EvalArgs& a) {
  auto out_dir = ensure_out_dir(a.common.out_dir);
  auto pred_raw = read_labels(a.pred_path);
  auto truth_raw = read_labels(a.truth_path);
  if (pred_raw.size() != truth_raw.size())
    throw ConfigError("prediction and truth files differ in length");

  Labeling pred, truth;
  pred.labels = pred_raw;
  truth.labels = truth_raw;
  int kp = 0, kt = 0;
  for (auto l : pred.labels) kp = std::max(kp, l + 1);
  for (auto l : truth.labels) kt = std::max(kt, l + 1);
  pred.k = std::max(kp, kt);
  truth.k = pred.k;

  json metrics{{"nmi", nmi(pred, truth)},
               {"mismatch", mismatch_ratio(pred, truth)},
               {"confusion", matrix_to_json(confusion(pred, truth))}};

  if (!a.graph_path.empty()) {
    LoadedGraph lg = load_graph(a.graph_path, false, a.lcc);
    double mean_degree =
        lg.graph.n > 0 ? 2.0 * static_cast<double>(lg.graph.edge_count) / lg.graph.n : 0.0;
    metrics["graph"] = {{"n", lg.graph.n},
                        {"edges", lg.graph.edge_count},
                        {"mean_degree", mean_degree},
                        {"largest_component", a.lcc}};
    std::cout << "graph n=" << lg.graph.n << " mean_degree=" << mean_degree << '\n';
  }

  {
    std::ofstream out(out_dir / "metrics.json");
    out << metrics.dump(2) << '\n';
  }
  Manifest manifest;
  manifest.command = "eval";
  manifest.seed = a.common.seed;
  manifest.config = {{"pred", a.pred_path}, {"truth", a.truth_path}, {"graph", a.graph_path}};
  manifest.outputs.push_back("metrics.json");
  manifest.extra = metrics;
  manifest.write(out_dir);

  std::cout << "nmi=" << metrics["nmi"].get<double>()
            << " mismatch=" << metrics["mismatch"].get<double>() << '\n';
  return 0;
}

// ----------------------------------------------------------------- theory

struct TheoryArgs {
  Common common;
  TheoryConfig cfg{};
  std::string model = "directed";
};

int cmd_theory(TheoryArgs& a) {
  auto out_dir = ensure_out_dir(a.common.out_dir);
  if (a.model == "directed")
    a.cfg.model = TheoryModel::kDirected;
  else if (a.model == "coupled" || a.model == "undirected")
    a.cfg.model = TheoryModel::kCoupled;
  else
    throw ConfigError("unknown theory model: " + a.model);
  a.cfg.seed = a.cfg.seed ? a.cfg.seed : a.common.seed;
  a.cfg.validate();

  Timer t;
  auto records = theorem_sweep(a.cfg);
  auto summary = summarize_sweep(records);

  // the coupled sweep carries the extra sparse-regime flag per cell
  const bool coupled = a.cfg.model == TheoryModel::kCoupled;
  const char* model_name = coupled ? "coupled" : "directed";
  {
    std::ofstream out(out_dir / "sweep.csv");
    out << "model,n,gamma,a,b,tau2,a_bar_gamma,seed,mismatch";
    if (coupled) out << ",feasible";
    out << '\n';
    for (const auto& r : records) {
      out << model_name << ',' << r.n << ',' << r.gamma << ',' << r.a << ',' << r.b << ','
          << r.tau2 << ',' << r.a_bar << ',' << r.seed << ',' << r.mismatch;
      if (coupled) out << ',' << (r.feasible ? 1 : 0);
      out << '\n';
    }
  }

  json cells = json::array();
  for (const auto& s : summary) {
    cells.push_back({{"tau2", s.tau2},
                     {"median_mismatch", s.median_mismatch},
                     {"iqr", s.iqr},
                     {"sparse_regime_feasible", s.feasible}});
    std::cout << "tau2=" << s.tau2 << " median_mismatch=" << s.median_mismatch
              << " iqr=" << s.iqr;
    if (a.cfg.model == TheoryModel::kCoupled && !s.feasible)
      std::cout << " (outside the guaranteed sparse regime)";
    std::cout << '\n';
  }

  Manifest manifest;
  manifest.command = "theory";
  manifest.seed = a.cfg.seed;
  manifest.config = {{"model", model_name}, {"m", a.cfg.m},
                     {"gamma", a.cfg.gamma}, {"ratio", a.cfg.ratio},
                     {"tau2", a.cfg.tau2_grid}, {"seeds", a.cfg.seeds},
                     {"self_loops", a.cfg.self_loops}};
  manifest.timings["sweep"] = t.seconds();
  manifest.outputs.push_back("sweep.csv");
  manifest.extra = cells;
  manifest.write(out_dir);
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  Common common;
  std::vector<std::int64_t> sizes;
  double lambda = 10.0;
  int k = 3;
  double beta = 0.05;
  int reps = 3;
  std::string method = "cpl";
};

int cmd_bench(BenchArgs& a) {
  if (a.sizes.empty()) throw ConfigError("empty grid: pass --sizes with at least one n");
  if (a.reps < 1) throw ConfigError("--reps must be at least 1");
  Method method;
  if (a.method == "upl")
    method = Method::kUpl;
  else if (a.method == "cpl")
    method = Method::kCpl;
  else
    throw ConfigError("unknown fit method: " + a.method);
  auto out_dir = ensure_out_dir(a.common.out_dir);

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };

  std::ofstream csv(out_dir / "bench.csv");
  csv << "n,phase,seconds\n";
  std::vector<double> log_n, log_fit;
  json rows = json::array();
  for (std::size_t idx = 0; idx < a.sizes.size(); ++idx) {
    std::int64_t n = a.sizes[idx];
    std::vector<double> gen_s, init_s, per_round_s, total_s;
    for (int rep = 0; rep < a.reps; ++rep) {
      SbmConfig cfg;
      cfg.n = static_cast<std::int32_t>(n);
      cfg.k = a.k;
      cfg.beta = a.beta;
      cfg.lambda = a.lambda;
      cfg.seed = rng::sub_key(rng::stream_key(a.common.seed, rng::kTagSweep), idx, rep) | 1;

      Timer tg;
      auto sample = sample_dcsbm(cfg);
      gen_s.push_back(tg.seconds());

      SpectralConfig scfg;
      scfg.k = a.k;
      scfg.seed = cfg.seed;
      Timer ti;
      Labeling init = spectral_cluster(sample.graph, scfg);
      init_s.push_back(ti.seconds());

      Timer tf;
      FitResult res = fit(sample.graph, init, method);
      double total = tf.seconds();
      total_s.push_back(total);
      per_round_s.push_back(res.outer_rounds > 0 ? total / res.outer_rounds : total);
    }
    double g = median(gen_s), i = median(init_s), f = median(per_round_s), ft = median(total_s);
    csv << n << ",generate," << g << '\n';
    csv << n << ",init," << i << '\n';
    csv << n << ",fit_per_round," << f << '\n';
    csv << n << ",fit_total," << ft << '\n';
    rows.push_back(
        {{"n", n}, {"generate", g}, {"init", i}, {"fit_per_round", f}, {"fit_total", ft}});
    log_n.push_back(std::log(static_cast<double>(n)));
    log_fit.push_back(std::log(std::max(f, 1e-9)));
    std::cout << "n=" << n << " generate=" << g << "s init=" << i << "s fit_per_round=" << f
              << "s\n";
  }
  csv.close();

  double slope = 0.0;
  if (log_n.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      mx += log_n[i];
      my += log_fit[i];
    }
    mx /= log_n.size();
    my /= log_n.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      num += (log_n[i] - mx) * (log_fit[i] - my);
      den += (log_n[i] - mx) * (log_n[i] - mx);
    }
    slope = den > 0 ? num / den : 0.0;
    std::cout << "fit_per_round log-log slope=" << slope << '\n';
  }

  Manifest manifest;
  manifest.command = "bench";
  manifest.seed = a.common.seed;
  manifest.config = {{"sizes", a.sizes}, {"lambda", a.lambda},   {"k", a.k},
                     {"beta", a.beta},   {"reps", a.reps},       {"method", a.method}};
  manifest.outputs.push_back("bench.csv");
  manifest.extra = {{"rows", rows}, {"fit_per_round_loglog_slope", slope}};
  manifest.write(out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse block-model community detection toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cgen = app.add_subcommand("generate", "sample a planted-partition graph");
  add_common(cgen, gen.common);
  cgen->add_option("--model", gen.model, "sbm or directed")->capture_default_str();
  cgen->add_option("--n", gen.sbm.n, "node count");
  cgen->add_option("--k", gen.sbm.k, "class count");
  cgen->add_option("--pi", gen.sbm.pi, "class weights")->delimiter(',');
  cgen->add_option("--beta", gen.sbm.beta, "out-in ratio in [0,1)");
  cgen->add_option("--w", gen.sbm.w, "relative within-class weights")->delimiter(',');
  cgen->add_option("--lambda", gen.sbm.lambda, "expected average degree");
  cgen->add_option("--rho", gen.sbm.rho, "fraction of low-degree nodes");
  cgen->add_option("--theta-low", gen.sbm.theta_low, "low degree multiplier")
      ->capture_default_str();
  cgen->add_option("--m", gen.dir.m, "community size (directed model)");
  cgen->add_option("--a", gen.dir.a, "within-class rate (directed model)");
  cgen->add_option("--b", gen.dir.b, "cross-class rate (directed model)");
  cgen->add_flag("--self-loops,!--no-self-loops", gen.dir.self_loops,
                 "allow self-loops (directed model)");
  cgen->callback([&] { cmd_generate(gen); });

  InitArgs init;
  auto* cinit = app.add_subcommand("init", "produce an initial labeling");
  add_common(cinit, init.common);
  cinit->add_option("--graph", init.graph_path, "edge list file")->required();
  cinit->add_option("--method", init.method, "dc, sc, or scp")->capture_default_str();
  cinit->add_option("--k", init.k, "cluster count")->required();
  cinit->add_option("--r", init.r, "embedding dimension (0 = k-1)");
  cinit->add_option("--eig-iters", init.eig_iters, "eigensolver sweep budget (0 = auto)");
  cinit->add_option("--eig-tol", init.eig_tol, "eigensolver residual tolerance")
      ->capture_default_str();
  cinit->add_option("--restarts", init.restarts, "k-means restarts")->capture_default_str();
  cinit->add_flag("--largest-component", init.lcc, "restrict to the largest component");
  cinit->callback([&] { cmd_init(init); });

  FitArgs fita;
  auto* cfit = app.add_subcommand("fit", "fit block parameters and labels");
  add_common(cfit, fita.common);
  cfit->add_option("--graph", fita.graph_path, "edge list file")->required();
  cfit->add_option("--method", fita.method, "upl or cpl")->capture_default_str();
  cfit->add_option("--init-labels", fita.init_labels, "initial labeling file (1-based)");
  cfit->add_option("--init", fita.init_method, "initializer when no labels file: dc, sc, scp")
      ->capture_default_str();
  cfit->add_option("--k", fita.k, "class count (required unless --init-labels)");
  cfit->add_option("--t-outer", fita.fit.t_outer, "outer rounds")->capture_default_str();
  cfit->add_option("--inner-tol", fita.fit.inner_tol, "inner EM tolerance")
      ->capture_default_str();
  cfit->add_option("--inner-max", fita.fit.inner_max, "inner EM iteration cap")
      ->capture_default_str();
  cfit->add_option("--soft-threshold", fita.fit.soft_threshold,
                   "responsibility cutoff in the refresh step")
      ->capture_default_str();
  cfit->add_option("--rate-floor", fita.fit.rate_floor, "floor added to rates inside logs")
      ->capture_default_str();
  cfit->add_flag("--largest-component", fita.lcc, "restrict to the largest component");
  cfit->callback([&] { cmd_fit(fita); });

  EvalArgs eval;
  auto* ceval = app.add_subcommand("eval", "compare labelings");
  add_common(ceval, eval.common);
  ceval->add_option("--pred", eval.pred_path, "predicted labels file")->required();
  ceval->add_option("--truth", eval.truth_path, "reference labels file")->required();
  ceval->add_option("--graph", eval.graph_path, "optional edge list for summary stats");
  ceval->add_flag("--largest-component", eval.lcc, "restrict graph stats to the largest component");
  ceval->callback([&] { cmd_eval(eval); });

  TheoryArgs theory;
  auto* cth = app.add_subcommand("theory", "one-step classification sweeps");
  add_common(cth, theory.common);
  cth->add_option("--model", theory.model, "directed or coupled")->capture_default_str();
  cth->add_option("--m", theory.cfg.m, "community size")->capture_default_str();
  cth->add_option("--gamma", theory.cfg.gamma, "initial overlap in (0,1) \\ {1/2}")
      ->capture_default_str();
  cth->add_option("--ratio", theory.cfg.ratio, "a/b ratio")->capture_default_str();
  cth->add_option("--tau2", theory.cfg.tau2_grid, "tau^2 grid")->delimiter(',')->required();
  cth->add_option("--seeds", theory.cfg.seeds, "replicates per cell")->capture_default_str();
  cth->add_option("--a-hat", theory.cfg.a_hat, "plug-in within rate (0 = true a)");
  cth->add_option("--b-hat", theory.cfg.b_hat, "plug-in cross rate (0 = true b)");
  cth->add_flag("--self-loops,!--no-self-loops", theory.cfg.self_loops,
                "allow self-loops in the directed draw");
  cth->callback([&] { cmd_theory(theory); });

  BenchArgs bench;
  auto* cb = app.add_subcommand("bench", "timing sweeps over graph sizes");
  add_common(cb, bench.common);
  cb->add_option("--sizes", bench.sizes, "node counts")->delimiter(',');
  cb->add_option("--lambda", bench.lambda, "expected average degree")->capture_default_str();
  cb->add_option("--k", bench.k, "class count")->capture_default_str();
  cb->add_option("--beta", bench.beta, "out-in ratio")->capture_default_str();
  cb->add_option("--reps", bench.reps, "repetitions per size")->capture_default_str();
  cb->add_option("--method", bench.method, "upl or cpl")->capture_default_str();
  cb->callback([&] { cmd_bench(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
