#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

const std::filesystem::path kData = LEVYX_TEST_DATA;

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run levyx(const std::string& args) {
  auto dir = std::filesystem::temp_directory_path();
  auto out = dir / "levyx_cli_test.out", err = dir / "levyx_cli_test.err";
  std::string cmd = std::string(LEVYX_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string spec(const std::string& name) { return "--spec " + (kData / name).string(); }

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("price happy path") {
  Run r = levyx("price " + spec("forward_start_gaussian.json"));
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j.contains("price"));
  CHECK(j.contains("error_estimate"));
  CHECK(j["method"] == "fourier");
  CHECK(j["diagnostics"]["dimensions"] == 1);
  CHECK(j["contract"]["type"] == "forward_start");
}

TEST_CASE("exit codes") {
  Run cgmy_mc = levyx("price " + spec("barrier_cgmy.json"));
  CHECK(cgmy_mc.code == 4);
  CHECK(cgmy_mc.err.find("UnsupportedModel") != std::string::npos);
  CHECK(cgmy_mc.out.empty());

  CHECK(levyx("price " + spec("chooser_nig.json")).code == 4);

  Run bad = levyx("price " + spec("bad_field.json"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("model.params.sigma") != std::string::npos);

  CHECK(levyx("price --spec /nonexistent/spec.json").code == 2);
  CHECK(levyx("price " + spec("forward_start_gaussian.json") + " --method lattice").code == 2);
  CHECK(levyx("bogus").code == 2);

  Run strip = levyx("price " + spec("strip_violation.json"));
  CHECK(strip.code == 3);
  CHECK(!strip.err.empty());

  CHECK(levyx("validate nothing").code == 2);
}

TEST_CASE("esscher model and continuous Asian") {
  Run r = levyx("price " + spec("asian_continuous_nig_esscher.json"));
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["price"].get<double>() > 0.0);
}

TEST_CASE("fourier and Monte Carlo agree on an NIG digital") {
  Run f = levyx("price " + spec("digital_nig.json"));
  Run m = levyx("price " + spec("digital_nig.json") + " --method mc");
  REQUIRE(f.code == 0);
  REQUIRE(m.code == 0);
  json jf = json::parse(f.out), jm = json::parse(m.out);
  double diff = std::abs(jf["price"].get<double>() - jm["price"].get<double>());
  CHECK(diff <= 3 * jm["stderr"].get<double>());
}

TEST_CASE("closed form on a gaussian lookback") {
  Run f = levyx("price " + spec("lookback_gaussian.json"));
  Run c = levyx("price " + spec("lookback_gaussian.json") + " --method closed_form");
  REQUIRE(f.code == 0);
  REQUIRE(c.code == 0);
  double a = json::parse(f.out)["price"], b = json::parse(c.out)["price"];
  CHECK(std::abs(a - b) < 1e-5 * b);
}

TEST_CASE("grid convergence table") {
  Run r = levyx("convergence " + spec("digital_gaussian.json") + " --axis grid");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("resolution,price,error,wall_time_ms\n", 0) == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() >= 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == 2 * rows[i - 1][0]);
    CHECK(rows[i][2] < rows[i - 1][2]);
  }
}

TEST_CASE("path convergence table") {
  Run r = levyx("convergence " + spec("vanilla_gaussian.json") + " --axis paths");
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() >= 2);
  CHECK(rows.front()[0] == 10000);
  // standard error ~ 1/sqrt(n), within a factor of two
  double expected = std::sqrt(rows.back()[0] / rows.front()[0]);
  double ratio = rows.front()[2] / rows.back()[2];
  CHECK(ratio > expected / 2);
  CHECK(ratio < expected * 2);
}

TEST_CASE("validate reports") {
  Run r = levyx("validate emm");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["suite"] == "emm");
  CHECK(j["passed"] == j["cases"]);
}
