#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return CHPT_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  std::string cmd = std::string(cli_path()) + " " + args + " > " + out.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  return r;
}

fs::path fresh_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / "chpt_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

const char* kTinyReviews =
    "date,rating,category\n"
    "2019-01-07,4.5,Casual Dining\n"
    "2019-01-08,2.0,CD\n"
    "2019-01-15,3.0,Casual Dining \n"
    "2019-01-21,5.0,Bar\n"
    "2019-01-22,oops,Bar\n"
    "2019-02-04,4.0,casual dining\n";

// small but real fit; converges in a couple of seconds
const char* kFitFlags =
    " --samples 400 --chains 2 --warmup 300 --seed 11 --sentiment positive";

}  // namespace

TEST_CASE("synth writes a well-formed series and a manifest") {
  fs::path dir = fresh_dir("synth");
  RunResult r = run_cli("synth --w1 0.01 --w2 -0.02 --b1 0.5 --b2 2.5 --tau 0.7"
                        " --sigma 0.2 --T 80 --seed 3 --out " +
                            (dir / "series.csv").string(),
                        dir);
  CHECK(r.exit_code == 0);
  std::string csv = slurp(dir / "series.csv");
  CHECK(csv.rfind("week_index,week_start_date,positive,negative,neutral,total,"
                  "target_positive,target_negative",
                  0) == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["subcommand"] == "synth");
  CHECK(manifest["options"]["seed"] == 3);
}

TEST_CASE("ingest aggregates, rejects bad rows, and reports them") {
  fs::path dir = fresh_dir("ingest");
  write_file(dir / "reviews.csv", kTinyReviews);
  RunResult r = run_cli("ingest --input " + (dir / "reviews.csv").string() +
                            " --category CD --sentiment positive --min-year 2013 --out " +
                            (dir / "series.csv").string(),
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("1 rows rejected") != std::string::npos);

  std::string rejects = slurp(dir / "series.rejects.csv");
  CHECK(rejects.find("oops") != std::string::npos);

  // 4 casual-dining rows over 5 weeks; week 0 holds the first two
  std::string csv = slurp(dir / "series.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);
  char ln2[32];
  std::snprintf(ln2, sizeof(ln2), "%.17g", std::log1p(1.0));
  CHECK(line == std::string("0,2019-01-07,1,1,0,2,") + ln2 + "," + ln2);
}

TEST_CASE("ingest without the rating column exits 2 and writes nothing") {
  fs::path dir = fresh_dir("ingest_schema");
  write_file(dir / "reviews.csv", "date,category\n2019-01-07,Bar\n");
  RunResult r = run_cli("ingest --input " + (dir / "reviews.csv").string() + " --out " +
                            (dir / "series.csv").string(),
                        dir);
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(dir / "series.csv"));
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
}

TEST_CASE("missing input file exits 1") {
  fs::path dir = fresh_dir("io_error");
  RunResult r = run_cli("ingest --input " + (dir / "absent.csv").string() + " --out " +
                            (dir / "series.csv").string(),
                        dir);
  CHECK(r.exit_code == 1);
}

TEST_CASE("fit then report produce the full output set") {
  fs::path dir = fresh_dir("pipeline");
  RunResult synth = run_cli("synth --w1 0.004 --w2 -0.01 --b1 0.5 --b2 3.0 --tau 0.7"
                            " --sigma 0.25 --T 120 --seed 9 --out " +
                                (dir / "series.csv").string(),
                            dir);
  REQUIRE(synth.exit_code == 0);

  RunResult fit = run_cli("fit --input " + (dir / "series.csv").string() + " --out-dir " +
                              (dir / "fit").string() + kFitFlags,
                          dir);
  CHECK(fit.exit_code == 0);
  CHECK(fit.stdout_text.find("mean") != std::string::npos);
  CHECK(fit.stdout_text.find("r_hat") != std::string::npos);
  CHECK(fit.stdout_text.find("Number of divergences:") != std::string::npos);
  REQUIRE(fs::exists(dir / "fit" / "draws.csv"));
  REQUIRE(fs::exists(dir / "fit" / "diagnostics.json"));
  REQUIRE(fs::exists(dir / "fit" / "manifest.json"));

  auto diagnostics = nlohmann::json::parse(slurp(dir / "fit" / "diagnostics.json"));
  CHECK(diagnostics.contains("tau"));
  CHECK(diagnostics.contains("divergences"));

  RunResult report = run_cli(
      "report --series " + (dir / "series.csv").string() + " --draws " +
          (dir / "fit" / "draws.csv").string() + " --out-dir " + (dir / "report").string() +
          " --event-window 2013-06-01:2016-12-31 --seed 4",
      dir);
  CHECK(report.exit_code == 0);
  for (const char* name :
       {"result.json", "lineplot.svg", "posterior.svg", "residuals.svg", "qq.svg",
        "manifest.json"}) {
    CHECK(fs::exists(dir / "report" / name));
  }

  auto result = nlohmann::json::parse(slurp(dir / "report" / "result.json"));
  CHECK(result["schema_version"] == 1);
  CHECK(result["changepoint"].contains("calendar_date"));
  CHECK(result["diagnostics"]["divergences"] == diagnostics["divergences"]);
  // tau_true = 0.7 on an easy fixture; the estimate lands nearby
  double tau_mean = result["changepoint"]["tau_mean"].get<double>();
  CHECK(tau_mean > 0.6);
  CHECK(tau_mean < 0.8);
  // the window covers the estimated date on this fixture
  CHECK(result["changepoint"]["in_window"].is_boolean());
}

TEST_CASE("a fit without warmup exits 3 but still writes outputs") {
  fs::path dir = fresh_dir("nonconverged");
  RunResult synth = run_cli("synth --w1 0.004 --w2 -0.01 --b1 0.5 --b2 3.0 --tau 0.7"
                            " --sigma 0.25 --T 100 --seed 21 --out " +
                                (dir / "series.csv").string(),
                            dir);
  REQUIRE(synth.exit_code == 0);
  RunResult fit = run_cli("fit --input " + (dir / "series.csv").string() + " --out-dir " +
                              (dir / "fit").string() +
                              " --samples 60 --chains 3 --warmup 0 --seed 2",
                          dir);
  CHECK(fit.exit_code == 3);
  CHECK(fs::exists(dir / "fit" / "draws.csv"));
  auto diagnostics = nlohmann::json::parse(slurp(dir / "fit" / "diagnostics.json"));
  CHECK(diagnostics["converged"] == false);
}

TEST_CASE("config file values apply with flag-over-file precedence") {
  fs::path dir = fresh_dir("config");
  write_file(dir / "model.conf",
             "likelihood = cauchy\n"
             "alpha = 6\n"
             "beta = 3\n"
             "sharpness = 10\n");
  RunResult synth = run_cli("synth --w1 0.004 --w2 -0.01 --b1 0.5 --b2 3.0 --tau 0.7"
                            " --sigma 0.25 --T 90 --seed 5 --out " +
                                (dir / "series.csv").string(),
                            dir);
  REQUIRE(synth.exit_code == 0);
  RunResult fit = run_cli("fit --input " + (dir / "series.csv").string() + " --out-dir " +
                              (dir / "fit").string() + " --config " +
                              (dir / "model.conf").string() + " --alpha 5" + kFitFlags,
                          dir);
  REQUIRE(fit.exit_code == 0);
  auto manifest = nlohmann::json::parse(slurp(dir / "fit" / "manifest.json"));
  CHECK(manifest["options"]["likelihood"] == "cauchy");  // from file
  CHECK(manifest["options"]["sharpness"] == 10.0);       // from file
  CHECK(manifest["options"]["alpha"] == 5.0);            // flag wins
  CHECK(manifest["options"]["beta"] == 3.0);

  write_file(dir / "bad.conf", "nonsense = 1\n");
  RunResult bad = run_cli("fit --input " + (dir / "series.csv").string() + " --out-dir " +
                              (dir / "fit2").string() + " --config " +
                              (dir / "bad.conf").string() + kFitFlags,
                          dir);
  CHECK(bad.exit_code == 2);
}

TEST_CASE("run-all on raw reviews produces every artifact in one pass") {
  fs::path dir = fresh_dir("runall");
  std::ostringstream reviews;
  reviews << "date,rating,category\n";
  // two regimes of review volume for the Bar category
  for (int week = 0; week < 30; ++week) {
    int count = week < 20 ? 2 : 8;
    for (int i = 0; i < count; ++i) {
      int day = 7 * week + (i % 7);
      int month = 1 + day / 28;
      int dom = 1 + day % 28;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "2019-%02d-%02d", month, dom);
      reviews << buf << ",4.5,Bar\n";
    }
  }
  write_file(dir / "reviews.csv", reviews.str());

  RunResult all = run_cli("run-all --input " + (dir / "reviews.csv").string() +
                              " --category Bar --min-year 2013 --out-dir " +
                              (dir / "out").string() +
                              " --samples 100 --chains 2 --warmup 120 --seed 1",
                          dir);
  CHECK((all.exit_code == 0 || all.exit_code == 3));
  for (const char* name : {"series.csv", "rejects.csv", "draws.csv", "diagnostics.json",
                           "result.json", "lineplot.svg", "manifest.json"}) {
    CHECK(fs::exists(dir / "out" / name));
  }
  auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["subcommand"] == "run-all");
}

TEST_CASE("reruns with the same seed are byte-identical") {
  fs::path dir = fresh_dir("determinism");
  RunResult synth = run_cli("synth --w1 0.004 --w2 -0.01 --b1 0.5 --b2 3.0 --tau 0.7"
                            " --sigma 0.25 --T 100 --seed 13 --out " +
                                (dir / "series.csv").string(),
                            dir);
  REQUIRE(synth.exit_code == 0);
  for (const char* run : {"a", "b"}) {
    RunResult fit = run_cli("fit --input " + (dir / "series.csv").string() +
                                " --out-dir " + (dir / run).string() + kFitFlags,
                            dir);
    REQUIRE(fit.exit_code == 0);
    RunResult report = run_cli("report --series " + (dir / "series.csv").string() +
                                   " --draws " + (dir / run / "draws.csv").string() +
                                   " --out-dir " + (dir / run).string() + " --seed 8",
                               dir);
    REQUIRE(report.exit_code == 0);
  }
  for (const char* name : {"draws.csv", "diagnostics.json", "result.json",
                           "lineplot.svg", "posterior.svg", "residuals.svg", "qq.svg"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
}
