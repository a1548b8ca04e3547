#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "repvis/dataset.hpp"

namespace fs = std::filesystem;
using namespace repvis;

namespace {

const char* kNeutralConfig = R"([risky]
p_high = 0.8
p_low = 0.4
[safe]
kind = uninformative
success_prob = 0.5
[signal]
q_high = 0.75
q_low = 0.25
[visibility.risky]
kind = constant
sigma_success = 1
sigma_failure = 1
[visibility.safe]
kind = constant
sigma_success = 1
sigma_failure = 1
[value]
kind = linear
slope = 1
intercept = 0
[simulation]
n_authors = 60
n_fields = 6
periods = 8
adoption_base = 4
adoption_cycle = 3
seed = 7
[reform]
delta_failure = 0
delta_success = 0
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("repvis_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& body) const {
    const fs::path p = path / name;
    std::ofstream os(p, std::ios::binary);
    os << body;
    return p.string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("calc emits the report as JSON") {
  TempDir tmp;
  const std::string cfg = tmp.file("scenario.cfg", kNeutralConfig);
  std::ostringstream out, err;
  const int rc = cli::cmd_calc(cfg, 0.5, {}, out, err);
  CHECK(rc == cli::kOk);
  CHECK(out.str().find("\"delta_prime_exact\"") != std::string::npos);
  CHECK(out.str().find("\"signs_disagree\": true") != std::string::npos);
}

TEST_CASE("calc maps config problems to the input-error code") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(cli::cmd_calc(tmp.sub("missing.cfg"), 0.5, {}, out, err) == cli::kInputError);

  const std::string broken = tmp.file("broken.cfg", "[risky]\np_high 0.8\n");
  CHECK(cli::cmd_calc(broken, 0.5, {}, out, err) == cli::kInputError);
  CHECK(err.str().find("line 2") != std::string::npos);

  const std::string cfg = tmp.file("scenario.cfg", kNeutralConfig);
  CHECK(cli::cmd_calc(cfg, 1.5, {}, out, err) == cli::kInputError);
}

TEST_CASE("sweep writes a deterministic grid CSV") {
  TempDir tmp;
  const std::string cfg = tmp.file("scenario.cfg", kNeutralConfig);
  const std::string out_path = tmp.sub("sweep.csv");
  std::ostringstream out, err;
  REQUIRE(cli::cmd_sweep(cfg, "0.01:0.99:0.01", out_path, {}, out, err) == cli::kOk);

  const std::string first = slurp(out_path);
  std::size_t lines = 0;
  for (char c : first)
    if (c == '\n') ++lines;
  CHECK(lines == 100);  // header + 99 grid rows

  REQUIRE(cli::cmd_sweep(cfg, "0.01:0.99:0.01", out_path, {}, out, err) == cli::kOk);
  CHECK(slurp(out_path) == first);  // byte-identical rerun

  CHECK(cli::cmd_sweep(cfg, "0.5:0.4:0.1", out_path, {}, out, err) == cli::kInputError);
  CHECK(cli::cmd_sweep(cfg, "zz", out_path, {}, out, err) == cli::kInputError);
}

TEST_CASE("verify: single claims pass, the full registry reports the band defect") {
  std::ostringstream out, err;
  CHECK(cli::cmd_verify("unity", 1, {}, out, err) == cli::kOk);
  CHECK(out.str().find("PASS  unity") != std::string::npos);

  std::ostringstream out_all;
  const int rc = cli::cmd_verify("all", 1, {}, out_all, err);
  // The quoted zero-side boundary values of the reform band are inconsistent
  // with the (constant) failure partial, so the registry is expected to
  // report exactly that one failing claim.
  CHECK(rc == cli::kVerificationFailure);
  CHECK(out_all.str().find("FAIL  band") != std::string::npos);
  CHECK(out_all.str().find("FAIL  unity") == std::string::npos);
  CHECK(out_all.str().find("FAIL  prop1") == std::string::npos);
  CHECK(out_all.str().find("FAIL  curvature") == std::string::npos);
  CHECK(out_all.str().find("FAIL  dominance-C1") == std::string::npos);
  CHECK(out_all.str().find("FAIL  dominance-C2") == std::string::npos);

  CHECK(cli::cmd_verify("nonsense", 1, {}, out, err) == cli::kInputError);
}

TEST_CASE("simulate then estimate end to end") {
  TempDir tmp;
  std::string body(kNeutralConfig);
  // Visibility reform scenario: failures gain half their mass post-adoption.
  body.replace(body.find("sigma_failure = 1"), 17, "sigma_failure = 0.4");
  body.replace(body.find("delta_failure = 0"), 17, "delta_failure = 0.5");
  const std::string cfg = tmp.file("reform.cfg", body);
  const std::string panel_path = tmp.sub("panel.csv");

  std::ostringstream out, err;
  REQUIRE(cli::cmd_simulate(cfg, panel_path, {}, out, err) == cli::kOk);
  const Dataset panel = Dataset::read_csv_file(panel_path);
  CHECK(panel.n_rows() == 60 * 8);
  CHECK(panel.names() ==
        std::vector<std::string>{"author_id", "field_id", "period", "event_time", "post",
                                 "rep_pre", "high_rep", "risky", "success", "survived"});
  CHECK(fs::exists(panel_path + ".manifest.json"));

  // Byte-identical rerun of the panel.
  const std::string bytes = slurp(panel_path);
  REQUIRE(cli::cmd_simulate(cfg, panel_path, {}, out, err) == cli::kOk);
  CHECK(slurp(panel_path) == bytes);

  const std::string est_dir = tmp.sub("est");
  const int rc = cli::cmd_estimate(panel_path, cfg, est_dir, {}, out, err);
  INFO(err.str());
  REQUIRE(rc == cli::kOk);
  for (const char* name :
       {"event_risky.csv", "event_success.csv", "series_risky.csv", "series_success.csv",
        "first_stage.csv", "iv_risky.csv", "iv_success.csv", "pooled_risky.csv",
        "event_risky.json", "manifest.json"})
    CHECK(fs::exists(fs::path(est_dir) / name));

  // Determinism of every non-manifest artifact.
  const std::string series = slurp((fs::path(est_dir) / "series_risky.csv").string());
  REQUIRE(cli::cmd_estimate(panel_path, cfg, est_dir, {}, out, err) == cli::kOk);
  CHECK(slurp((fs::path(est_dir) / "series_risky.csv").string()) == series);
}

TEST_CASE("estimate names a missing panel column") {
  TempDir tmp;
  const std::string panel = tmp.file("panel.csv", "author_id,field_id\n1,2\n");
  std::ostringstream out, err;
  CHECK(cli::cmd_estimate(panel, "", tmp.sub("out"), {}, out, err) == cli::kInputError);
  CHECK(err.str().find("missing required column: period") != std::string::npos);
}

TEST_CASE("config overrides flow through --set") {
  TempDir tmp;
  const std::string cfg = tmp.file("scenario.cfg", kNeutralConfig);
  cli::CommonOptions common;
  common.overrides = {"simulation.n_authors=10", "simulation.periods=3",
                      "simulation.adoption_base=2", "simulation.adoption_cycle=1"};
  const std::string panel_path = tmp.sub("panel.csv");
  std::ostringstream out, err;
  REQUIRE(cli::cmd_simulate(cfg, panel_path, common, out, err) == cli::kOk);
  CHECK(Dataset::read_csv_file(panel_path).n_rows() == 30);
}

TEST_CASE("report bundles sweep and verification artifacts") {
  TempDir tmp;
  const std::string cfg = tmp.file("scenario.cfg", kNeutralConfig);
  const std::string dir = tmp.sub("bundle");
  std::ostringstream out, err;
  const int rc = cli::cmd_report(cfg, dir, 3, {}, out, err);
  CHECK(rc == cli::kVerificationFailure);  // the band claim stays red
  CHECK(fs::exists(fs::path(dir) / "sweep.csv"));
  CHECK(fs::exists(fs::path(dir) / "verify_band.json"));
  CHECK(fs::exists(fs::path(dir) / "verify_unity.json"));
  CHECK(fs::exists(fs::path(dir) / "manifest.json"));
  const std::string band = slurp((fs::path(dir) / "verify_band.json").string());
  CHECK(band.find("\"passed\": false") != std::string::npos);
}
