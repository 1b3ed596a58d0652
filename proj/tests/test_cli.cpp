// End-to-end checks of the command-line tool: exit codes, emitted files,
// and fixed-seed reproducibility.  The binary path and fixture directory
// come in through compile definitions.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "helpers.hpp"
#include "tgslope/tgslope.hpp"

using namespace tgslope;
using nlohmann::json;

namespace {

const std::string kCli = TGSLOPE_CLI_PATH;
const std::string kFixtures = TGSLOPE_FIXTURE_DIR;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd = kCli + " " + args + " >" + log_path + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream is(log_path);
  std::ostringstream os;
  os << is.rdbuf();
  r.output = os.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("fit on the shipped noiseless fixture recovers the support",
          "[cli]") {
  const std::string dir = testutil::temp_dir("cli_fit");
  const RunResult r = run_cli("fit --x " + kFixtures + "/noiseless_x.csv" +
                                  " --y " + kFixtures + "/noiseless_y.t3d" +
                                  " --k 3 --out " + dir,
                              dir + "/log.txt");
  REQUIRE(r.exit_code == 0);

  const json diag = read_json(dir + "/diagnostics.json");
  CHECK(diag.at("converged").get<bool>());
  CHECK(diag.at("discovery").get<int>() == 5);
  CHECK(diag.at("k").get<int>() == 3);
  CHECK(diag.at("lambda_source").get<std::string>() == "chi");
  CHECK(diag.at("method").get<std::string>() == "pdcae");

  const Tensor3 b_hat = read_tensor_t3d(dir + "/b_hat.t3d");
  REQUIRE(b_hat.dim1() == 4);
  REQUIRE(b_hat.dim2() == 4);
  REQUIRE(b_hat.dim3() == 40);
  const auto support = support_of(b_hat);
  const std::set<Index> got(support.begin(), support.end());
  CHECK(got == std::set<Index>{2, 6, 27, 38, 39});

  // Factor files parse back and multiply out to the written coefficients.
  const Mat g = read_matrix_csv(dir + "/g.csv");
  const Mat h = read_matrix_csv(dir + "/h.csv");
  REQUIRE(g.rows() == 40);
  REQUIRE(g.cols() == 3);
  REQUIRE(h.rows() == 16);
  REQUIRE(h.cols() == 3);
  CHECK((mode3_unfold(b_hat) - g * h.transpose()).lpNorm<Eigen::Infinity>() <=
        1e-12);
  CHECK(testutil::orthonormality_error(h) <= 1e-8);
}

TEST_CASE("fit accepts a penalty file and flat weights still select", "[cli]") {
  const std::string dir = testutil::temp_dir("cli_lambda_file");
  const RunResult r =
      run_cli("fit --x " + kFixtures + "/noiseless_x.csv" + " --y " +
                  kFixtures + "/noiseless_y.t3d" + " --k 3 --lambda-file " +
                  kFixtures + "/lambda_flat40.txt --out " + dir,
              dir + "/log.txt");
  REQUIRE(r.exit_code == 0);
  const json diag = read_json(dir + "/diagnostics.json");
  CHECK(diag.at("lambda_source").get<std::string>() == "file");
  CHECK(diag.at("discovery").get<int>() == 5);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  const std::string dir = testutil::temp_dir("cli_usage");
  const std::string fit_base = "fit --x " + kFixtures + "/noiseless_x.csv" +
                               " --y " + kFixtures + "/noiseless_y.t3d" +
                               " --out " + dir;

  CHECK(run_cli(fit_base, dir + "/log1.txt").exit_code == 2);  // missing --k
  CHECK(run_cli(fit_base + " --k 3 --method newton", dir + "/log2.txt")
            .exit_code == 2);
  CHECK(run_cli(fit_base + " --k 3 --q 0.1 --lambda-file " + kFixtures +
                    "/lambda_flat40.txt",
                dir + "/log3.txt")
            .exit_code == 2);
  CHECK(run_cli("simulate --preset bogus --out " + dir, dir + "/log4.txt")
            .exit_code == 2);

  std::ofstream(dir + "/bad_key.json") << "{\"maxiter\": 10}\n";
  const RunResult r = run_cli(fit_base + " --k 3 --config " + dir +
                                  "/bad_key.json",
                              dir + "/log5.txt");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("maxiter") != std::string::npos);
}

TEST_CASE("io errors exit with code 3", "[cli]") {
  const std::string dir = testutil::temp_dir("cli_io_err");
  CHECK(run_cli("fit --x " + dir + "/nope.csv --y " + kFixtures +
                    "/noiseless_y.t3d --k 3 --out " + dir,
                dir + "/log1.txt")
            .exit_code == 3);
  CHECK(run_cli("fit --x " + kFixtures + "/noiseless_x.csv --y " + kFixtures +
                    "/noiseless_y.t3d --k 3 --lambda-file " + kFixtures +
                    "/lambda_increasing.txt --out " + dir,
                dir + "/log2.txt")
            .exit_code == 3);
}

TEST_CASE("tlrr ignores penalty flags with a warning", "[cli]") {
  const std::string dir = testutil::temp_dir("cli_tlrr");
  const RunResult r = run_cli("fit --x " + kFixtures + "/noiseless_x.csv" +
                                  " --y " + kFixtures + "/noiseless_y.t3d" +
                                  " --k 3 --method tlrr --q 0.2 --out " + dir,
                              dir + "/log.txt");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("ignor") != std::string::npos);  // warning mentions it
  const json diag = read_json(dir + "/diagnostics.json");
  CHECK(diag.at("lambda_source").get<std::string>() == "zero");
  CHECK(diag.at("discovery").get<int>() == 40);  // no shrinkage: full support
}

TEST_CASE("config file fills defaults and flags take precedence", "[cli]") {
  const std::string dir = testutil::temp_dir("cli_config");
  std::ofstream(dir + "/cfg.json") << "{\"q\": 0.2, \"seed\": 9}\n";
  const std::string base = "fit --x " + kFixtures + "/noiseless_x.csv" +
                           " --y " + kFixtures + "/noiseless_y.t3d" +
                           " --k 3 --config " + dir + "/cfg.json --out " + dir;

  REQUIRE(run_cli(base, dir + "/log1.txt").exit_code == 0);
  CHECK(read_json(dir + "/diagnostics.json").at("q").get<double>() == 0.2);
  CHECK(read_json(dir + "/diagnostics.json").at("seed").get<std::uint64_t>() ==
        9);

  REQUIRE(run_cli(base + " --q 0.3", dir + "/log2.txt").exit_code == 0);
  CHECK(read_json(dir + "/diagnostics.json").at("q").get<double>() == 0.3);
}

TEST_CASE("simulate reruns with one seed are byte identical", "[cli]") {
  const std::string dir_a = testutil::temp_dir("cli_sim_a");
  const std::string dir_b = testutil::temp_dir("cli_sim_b");
  const std::string args =
      "simulate --preset fdr --scale desk --s 10 --n 64 --p 64 --reps 2 "
      "--seed 7 --out ";

  REQUIRE(run_cli(args + dir_a, dir_a + "/log.txt").exit_code == 0);
  REQUIRE(run_cli(args + dir_b, dir_b + "/log.txt").exit_code == 0);

  for (const char* name : {"summary.csv", "reps.csv", "run_config.json"}) {
    INFO(name);
    REQUIRE(slurp(dir_a + "/" + name) == slurp(dir_b + "/" + name));
  }

  // The summary must carry the seed stamp and parse as a table.
  const std::string summary = slurp(dir_a + "/summary.csv");
  CHECK(summary.find(metadata_line(7)) != std::string::npos);
  CHECK(summary.rfind("grid,method,reps,failures,", 0) == 0);

  const json cfg = read_json(dir_a + "/run_config.json");
  CHECK(cfg.at("seed").get<std::uint64_t>() == 7);
  CHECK(cfg.at("preset").get<std::string>() == "fdr");
  REQUIRE(cfg.at("points").is_array());
  REQUIRE(cfg.at("points").size() == 1);
  CHECK(cfg.at("points")[0].at("s").get<int>() == 10);
  CHECK(cfg.at("points")[0].at("n").get<int>() == 64);
}
