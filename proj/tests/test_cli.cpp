#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch_root() {
  static fs::path root = [] {
    auto p = fs::temp_directory_path() / ("sbmkit_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& name) {
  auto p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  static int counter = 0;
  auto out_file = scratch_root() / ("stdout_" + std::to_string(counter) + ".txt");
  auto err_file = scratch_root() / ("stderr_" + std::to_string(counter) + ".txt");
  counter++;
  std::string cmd = std::string(SBMKIT_CLI_PATH) + " " + args + " > " + out_file.string() +
                    " 2> " + err_file.string();
  int raw = std::system(cmd.c_str());
  int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return {code, slurp(out_file), slurp(err_file)};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int line_count(const std::string& s) {
  int lines = 0;
  for (char c : s) lines += c == '\n';
  return lines;
}

}  // namespace

TEST_CASE("version flag") {
  auto r = run("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("sbmkit") != std::string::npos);
}

TEST_CASE("generate writes the data files and the manifest last") {
  auto dir = fresh_dir("gen");
  auto r = run("generate --n 80 --k 2 --lambda 8 --beta 0.05 --seed 7 --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("generated n=80") != std::string::npos);
  CHECK(fs::exists(dir / "edges.txt"));
  CHECK(fs::exists(dir / "truth.txt"));
  CHECK_FALSE(fs::exists(dir / "theta.txt"));  // rho = 0

  auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["config"]["n"] == 80);
  CHECK(manifest["config"]["lambda"] == 8.0);
  CHECK(manifest["tool_version"].get<std::string>().find("sbmkit") != std::string::npos);
  CHECK(manifest["timings"].contains("generate"));
  std::vector<std::string> outputs = manifest["outputs"];
  for (const auto& name : outputs) CHECK(fs::exists(dir / name));

  // truth has one 1-based label line per node
  CHECK(line_count(slurp(dir / "truth.txt")) == 80);
}

TEST_CASE("generate with degree heterogeneity also writes the multipliers") {
  auto dir = fresh_dir("gen_rho");
  // lambda kept low: the theta scaling divides the connection matrix by
  // (E theta)^2 = 0.0784, so higher densities would push p past 1
  auto r = run("generate --n 100 --k 2 --lambda 3 --rho 0.9 --seed 3 --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "theta.txt"));
  CHECK(line_count(slurp(dir / "theta.txt")) == 100);
  auto manifest = read_json(dir / "manifest.json");
  std::vector<std::string> outputs = manifest["outputs"];
  CHECK(std::find(outputs.begin(), outputs.end(), "theta.txt") != outputs.end());
}

TEST_CASE("generate reruns with one seed are byte-identical") {
  auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  std::string args = "generate --n 120 --k 3 --lambda 7 --beta 0.1 --seed 42 --out-dir ";
  REQUIRE(run(args + d1.string()).code == 0);
  REQUIRE(run(args + d2.string()).code == 0);
  CHECK(slurp(d1 / "edges.txt") == slurp(d2 / "edges.txt"));
  CHECK(slurp(d1 / "truth.txt") == slurp(d2 / "truth.txt"));
}

TEST_CASE("config file fields merge under explicit flags") {
  auto dir = fresh_dir("cfgmerge");
  std::ofstream(dir / "cfg.json") << R"({"n": 50, "k": 2, "lambda": 6.0})";
  auto r = run("generate --config " + (dir / "cfg.json").string() + " --lambda 9 --seed 3 --out-dir " +
               dir.string());
  REQUIRE(r.code == 0);
  auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["config"]["n"] == 50);       // from the file
  CHECK(manifest["config"]["lambda"] == 9.0); // flag wins
}

TEST_CASE("invalid configuration exits with code 2") {
  auto dir = fresh_dir("gen_bad");
  auto r = run("generate --n 20 --k 2 --lambda 3 --beta 1.5 --seed 1 --out-dir " + dir.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("beta") != std::string::npos);
}

TEST_CASE("missing input files exit with code 1") {
  auto dir = fresh_dir("init_missing");
  auto r = run("init --graph " + (dir / "absent.txt").string() + " --k 2 --out-dir " + dir.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("unknown initializer exits with code 2") {
  auto dir = fresh_dir("init_unknown");
  std::ofstream(dir / "g.txt") << "1 2\n2 3\n";
  auto r = run("init --graph " + (dir / "g.txt").string() + " --method bogus --k 2 --out-dir " +
               dir.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown init method") != std::string::npos);
}

TEST_CASE("generate, init, fit, eval round trip recovers the planted labels") {
  auto g = fresh_dir("pipe_g"), i = fresh_dir("pipe_i"), f = fresh_dir("pipe_f"),
       e = fresh_dir("pipe_e");
  REQUIRE(run("generate --n 80 --k 2 --lambda 8 --beta 0.05 --seed 7 --out-dir " + g.string())
              .code == 0);
  auto ri = run("init --graph " + (g / "edges.txt").string() + " --method scp --k 2 --seed 7 " +
                "--out-dir " + i.string());
  REQUIRE(ri.code == 0);
  CHECK(ri.out.find("init method=scp n=80") != std::string::npos);
  CHECK(fs::exists(i / "nodemap.txt"));

  auto rf = run("fit --graph " + (g / "edges.txt").string() + " --method cpl --init-labels " +
                (i / "labels.txt").string() + " --seed 7 --out-dir " + f.string());
  REQUIRE(rf.code == 0);
  auto params = read_json(f / "params.json");
  double pi_total = 0.0;
  for (double x : params["pi_hat"]) pi_total += x;
  CHECK(pi_total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(params.contains("theta_hat"));
  CHECK(params.contains("loglik_trace"));
  CHECK(params["outer_rounds"].get<int>() >= 1);

  auto re = run("eval --pred " + (f / "labels.txt").string() + " --truth " +
                (g / "truth.txt").string() + " --out-dir " + e.string());
  REQUIRE(re.code == 0);
  auto metrics = read_json(e / "metrics.json");
  CHECK(metrics["nmi"].get<double>() >= 0.9);
  CHECK(metrics["mismatch"].get<double>() <= 0.05);
  CHECK(re.out.find("nmi=") != std::string::npos);

  SUBCASE("fit can also run its own initializer") {
    auto f2 = fresh_dir("pipe_f2");
    auto r2 = run("fit --graph " + (g / "edges.txt").string() +
                  " --method upl --init scp --k 2 --seed 7 --out-dir " + f2.string());
    REQUIRE(r2.code == 0);
    auto e2 = fresh_dir("pipe_e2");
    auto re2 = run("eval --pred " + (f2 / "labels.txt").string() + " --truth " +
                   (g / "truth.txt").string() + " --out-dir " + e2.string());
    REQUIRE(re2.code == 0);
    CHECK(read_json(e2 / "metrics.json")["nmi"].get<double>() >= 0.9);
  }
}

TEST_CASE("eval of identical files is perfect and graph stats are optional") {
  auto dir = fresh_dir("eval_id");
  std::ofstream(dir / "labels.txt") << "1\n2\n1\n2\n";
  std::ofstream(dir / "g.txt") << "1 2\n2 3\n3 4\n";
  auto r = run("eval --pred " + (dir / "labels.txt").string() + " --truth " +
               (dir / "labels.txt").string() + " --graph " + (dir / "g.txt").string() +
               " --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  auto metrics = read_json(dir / "metrics.json");
  CHECK(metrics["nmi"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(metrics["mismatch"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(metrics["graph"]["n"] == 4);
  CHECK(metrics["graph"]["edges"] == 3);
}

TEST_CASE("eval rejects length mismatches with code 2") {
  auto dir = fresh_dir("eval_bad");
  std::ofstream(dir / "a.txt") << "1\n2\n";
  std::ofstream(dir / "b.txt") << "1\n2\n1\n";
  auto r = run("eval --pred " + (dir / "a.txt").string() + " --truth " + (dir / "b.txt").string() +
               " --out-dir " + dir.string());
  CHECK(r.code == 2);
}

TEST_CASE("theory sweep emits the pinned CSV schema") {
  SUBCASE("directed header and row count") {
    auto dir = fresh_dir("theory_dir");
    auto r = run("theory --model directed --gamma 0.3 --tau2 1,4 --m 100 --seeds 5 --seed 11 " +
                 std::string("--out-dir ") + dir.string());
    REQUIRE(r.code == 0);
    auto csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("model,n,gamma,a,b,tau2,a_bar_gamma,seed,mismatch\n", 0) == 0);
    CHECK(line_count(csv) == 1 + 2 * 5);
    CHECK(r.out.find("tau2=") != std::string::npos);
    auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["results"].size() == 2);
  }
  SUBCASE("coupled header carries the feasibility column") {
    auto dir = fresh_dir("theory_cpl");
    auto r = run("theory --model coupled --gamma 0.3 --tau2 1,4 --m 100 --seeds 5 --seed 11 " +
                 std::string("--out-dir ") + dir.string());
    REQUIRE(r.code == 0);
    auto csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("model,n,gamma,a,b,tau2,a_bar_gamma,seed,mismatch,feasible\n", 0) == 0);
    CHECK(line_count(csv) == 1 + 2 * 5);
    // gamma 0.3 at ratio 4 sits outside the guaranteed regime
    CHECK(r.out.find("outside the guaranteed sparse regime") != std::string::npos);
  }
  SUBCASE("the undirected alias selects the coupled model") {
    auto dir = fresh_dir("theory_und");
    auto r = run("theory --model undirected --gamma 0.3 --tau2 1 --m 60 --seeds 3 --seed 2 " +
                 std::string("--out-dir ") + dir.string());
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "sweep.csv").find(",feasible") != std::string::npos);
  }
  SUBCASE("the excluded overlap value is rejected") {
    auto dir = fresh_dir("theory_half");
    auto r = run("theory --model directed --gamma 0.5 --tau2 1 --m 50 --seed 1 --out-dir " +
                 dir.string());
    CHECK(r.code == 2);
  }
}

TEST_CASE("bench reports one row per size and phase") {
  auto dir = fresh_dir("bench");
  auto r = run("bench --sizes 400,800 --lambda 5 --k 2 --reps 1 --seed 5 --out-dir " +
               dir.string());
  REQUIRE(r.code == 0);
  auto csv = slurp(dir / "bench.csv");
  CHECK(csv.rfind("n,phase,seconds\n", 0) == 0);
  CHECK(line_count(csv) == 1 + 2 * 4);
  CHECK(csv.find("400,generate,") != std::string::npos);
  CHECK(csv.find("800,fit_total,") != std::string::npos);
  CHECK(r.out.find("log-log slope=") != std::string::npos);
  auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["results"].contains("fit_per_round_loglog_slope"));

  SUBCASE("an empty grid is a configuration error") {
    auto bad = fresh_dir("bench_bad");
    auto rb = run("bench --seed 1 --out-dir " + bad.string());
    CHECK(rb.code == 2);
    CHECK(rb.err.find("empty grid") != std::string::npos);
  }
}
