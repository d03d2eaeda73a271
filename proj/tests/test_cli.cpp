#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fonsim_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  const fs::path log = work_dir() / "cmd_output.txt";
  const std::string cmd = "cd " + work_dir().string() + " && " + FONSIM_PATH +
                          " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream buf;
  buf << in.rdbuf();
  res.output = buf.str();
  return res;
}

std::string slurp(const std::string& name) {
  std::ifstream in(work_dir() / name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("simulate reruns byte-identically and writes the trace schema") {
  CHECK(run("simulate --preset example1 --seed 11 --steps 50 --out a.csv")
            .exit_code == 0);
  CHECK(run("simulate --preset example1 --seed 11 --steps 50 --out b.csv")
            .exit_code == 0);
  const std::string a = slurp("a.csv");
  CHECK(a == slurp("b.csv"));
  CHECK(slurp("a.json") == slurp("b.json"));
  CHECK(count_lines(a) == 52);  // header + 51 states
  CHECK(a.rfind("t,p,pbar_1,", 0) == 0);
  CHECK(a.find(",sigma_60") != std::string::npos);

  // A different seed moves the trace.
  CHECK(run("simulate --preset example1 --seed 12 --steps 50 --out c.csv")
            .exit_code == 0);
  CHECK(slurp("c.csv") != a);
}

TEST_CASE("simulate with steps=0 emits only the initial state") {
  CHECK(run("simulate --preset example1 --seed 3 --steps 0 --out zero.csv")
            .exit_code == 0);
  CHECK(count_lines(slurp("zero.csv")) == 2);
}

TEST_CASE("two manipulators at 10 and 20 report target 15") {
  const std::string manip =
      "simulate --preset example3 --seed 5 --steps 30 --out manip.csv "
      "--set \"manipulators=[{\\\"index\\\":39,\\\"pbar0\\\":10.0},"
      "{\\\"index\\\":49,\\\"pbar0\\\":20.0}]\"";
  CHECK(run(manip).exit_code == 0);
  const std::string side = slurp("manip.json");
  CHECK(side.find("\"manipulator_consensus_target\": 15.0") !=
        std::string::npos);
}

TEST_CASE("sweep reruns byte-identically with the stats schema") {
  const std::string cmd =
      "sweep --preset table2 --set \"d_values=[0.85]\" "
      "--set \"b_values=[0.45]\" --set runs=5 --out s1.csv";
  CHECK(run(cmd).exit_code == 0);
  CHECK(run("sweep --preset table2 --set \"d_values=[0.85]\" "
            "--set \"b_values=[0.45]\" --set runs=5 --out s2.csv")
            .exit_code == 0);
  const std::string s = slurp("s1.csv");
  CHECK(s == slurp("s2.csv"));
  CHECK(slurp("s1.json") == slurp("s2.json"));
  CHECK(s.rfind("scheme,d,n,b,metric,mean,std,runs,shortfall\n", 0) == 0);
  CHECK(s.find("global,0.85,60,0.45,steps_to_consensus,") != std::string::npos);
}

TEST_CASE("estimate and signal rerun byte-identically on a synthetic CSV") {
  {
    std::ofstream csv(work_dir() / "prices.csv");
    csv << "date,adj_close\n";
    double p = 20.0;
    char date[16];
    for (int t = 0; t < 120; ++t) {
      std::snprintf(date, sizeof(date), "2014-%02d-%02d", 1 + t / 28, 1 + t % 28);
      csv << date << "," << p << "\n";
      p *= (t % 3 == 0) ? 1.01 : 0.997;
    }
  }
  CHECK(run("estimate --input prices.csv --out est1.csv").exit_code == 0);
  CHECK(run("estimate --input prices.csv --out est2.csv").exit_code == 0);
  CHECK(slurp("est1.csv") == slurp("est2.csv"));
  CHECK(slurp("est1.json") == slurp("est2.json"));
  CHECK(slurp("est1.csv").rfind("date,price,pbar_hat,sigma_hat,gap_flag,signal",
                                0) == 0);
  CHECK(slurp("est1.json").find("word_of_mouth_proportion") !=
        std::string::npos);

  CHECK(run("signal --input prices.csv --out sig1.csv").exit_code == 0);
  CHECK(run("signal --input prices.csv --out sig2.csv").exit_code == 0);
  CHECK(slurp("sig1.csv") == slurp("sig2.csv"));
}

TEST_CASE("a constant-price CSV keeps pbar_hat near the constant") {
  {
    std::ofstream csv(work_dir() / "flat.csv");
    csv << "date,adj_close\n";
    char date[16];
    for (int t = 0; t < 60; ++t) {
      std::snprintf(date, sizeof(date), "2015-%02d-%02d", 1 + t / 28, 1 + t % 28);
      csv << date << ",18.25\n";
    }
  }
  // v0 on the fixed-point ray v1/v2 = ln(18.25).
  const auto res = run(
      "estimate --input flat.csv --set \"v0=[0.29041650800285007,0.1]\" "
      "--out flat_est.csv");
  CHECK(res.exit_code == 0);
  const std::string est = slurp("flat_est.csv");
  // The zero-innovation fixed point holds exactly, so pbar_hat prints as
  // the shortest round-trip form of the constant itself.
  CHECK(est.find(",18.25,18.25,10,0,") != std::string::npos);
  const std::string side = slurp("flat_est.json");
  CHECK(side.find("\"word_of_mouth_proportion\"") != std::string::npos);
}

TEST_CASE("validation failures exit 1 and name the field") {
  const auto bad = run("simulate --preset example1 --set sigma_eps=-0.5");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("sigma_eps") != std::string::npos);

  const auto unknown = run("simulate --preset nope");
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.output.find("preset") != std::string::npos);

  const auto typo = run("simulate --preset example1 --set sigma_epz=0.5");
  CHECK(typo.exit_code == 1);
  CHECK(typo.output.find("sigma_epz") != std::string::npos);

  std::ofstream(work_dir() / "broken.csv") << "date,adj_close\n2014-01-02,x\n";
  const auto bad_csv = run("estimate --input broken.csv --out never.csv");
  CHECK(bad_csv.exit_code == 1);
  CHECK(bad_csv.output.find("line 2") != std::string::npos);
}

TEST_CASE("verify passes by default and fails stochastic checks at tol 0") {
  const auto ok = run("verify");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("ALL PASS") != std::string::npos);
  CHECK(ok.output.find("Theorem 3") != std::string::npos);
  CHECK(ok.output.find("Theorem 6") != std::string::npos);
  CHECK(ok.output.find("Lemma 2") != std::string::npos);

  const auto strict = run("verify --tol 0");
  CHECK(strict.exit_code == 2);
  // Exact structural checks survive a zero tolerance.
  CHECK(strict.output.find("closeness_symmetry         [Def. 2                ] PASS") !=
        std::string::npos);
  // Numeric ones cannot.
  CHECK(strict.output.find("FAIL") != std::string::npos);
}
