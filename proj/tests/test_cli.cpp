#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vmp/fit.hpp"
#include "vmp/validation.hpp"

using namespace vmp;
using json = nlohmann::ordered_json;

namespace {

const std::string kData = VMP_DATA_DIR;
const std::string kTool = VMPFIT_PATH;

FitRequest request(const std::string& model, const std::string& file, const std::string& y, const std::string& x) {
  FitRequest r;
  r.model = model;
  r.data = kData + "/" + file;
  r.response = y;
  r.predictors = {x};
  return r;
}

int run_tool(const std::string& args) {
  const int status = std::system((kTool + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void check_round_trip(const FitOutcome& out) {
  const json back = json::parse(dump_result(out.result));
  const auto curves = curves_from_result(back);
  REQUIRE(curves.size() == out.result["curves"].size());
  for (const auto& [name, c] : curves) {
    const json& stored = out.result["curves"][name];
    CHECK(std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size()) == stored["mean"].get<std::vector<double>>());
    CHECK(std::vector<double>(c.lower95.data(), c.lower95.data() + c.lower95.size()) ==
          stored["lower95"].get<std::vector<double>>());
    CHECK(std::vector<double>(c.upper95.data(), c.upper95.data() + c.upper95.size()) ==
          stored["upper95"].get<std::vector<double>>());
  }
}

}  // namespace

TEST_CASE("CSV parsing") {
  const Table t = parse_csv("a, b\r\n1,2.5\r\n\r\n-3,4e-2\n", "t.csv");
  CHECK(t.names == std::vector<std::string>{"a", "b"});
  CHECK(t.rows() == 2);
  CHECK(t.column("b")[1] == 0.04);
  CHECK_THROWS_WITH_AS(t.column("c"), doctest::Contains("missing column 'c'"), DomainError);
  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2\n3\n", "t.csv"), doctest::Contains("t.csv:3"), DomainError);
  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2\n3,x\n", "t.csv"), doctest::Contains("t.csv:3: column 'b'"), DomainError);
  CHECK_THROWS_AS(parse_csv("", "t.csv"), DomainError);
}

TEST_CASE("penspline fit on the bundled car-like data") {
  const auto req = request("penspline", "carlike.csv", "mpg", "weight");
  const auto out = run_fit(req, read_csv(req.data));
  CHECK(out.converged);
  CHECK(out.result["q_densities"].size() == 5);
  const auto trace = out.result["elbo_trace"].get<std::vector<double>>();
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] - trace[i - 1] >= -1e-8);
  const auto& mean = out.result["curves"]["mean"];
  CHECK(mean["grid"].size() == 201);
  for (std::size_t i = 0; i < 201; ++i) {
    CHECK(mean["lower95"][i].get<double>() <= mean["mean"][i].get<double>());
    CHECK(mean["mean"][i].get<double>() <= mean["upper95"][i].get<double>());
  }
  // deterministic output
  CHECK(dump_result(out.result) == dump_result(run_fit(req, read_csv(req.data)).result));
  check_round_trip(out);
}

TEST_CASE("result round trip for every model kind") {
  auto lr = request("linreg", "linreg.csv", "y", "x1");
  check_round_trip(run_fit(lr, read_csv(lr.data)));
  auto gl = request("glmspline", "poisson.csv", "y", "x");
  gl.link = "log";
  check_round_trip(run_fit(gl, read_csv(gl.data)));
  auto gc = request("groupcurves", "groupcurves.csv", "y", "x");
  gc.group = "group";
  gc.label = "label";
  gc.knots = 12;
  gc.spline = "osullivan";
  gc.iters = 50;
  const auto out = run_fit(gc, read_csv(gc.data));
  CHECK(out.result["curves"].contains("contrast"));
  check_round_trip(out);
}

TEST_CASE("logistic spline at n = 500, K = 25, 200 iterations") {
  auto req = request("glmspline", "logistic.csv", "y", "x");
  req.link = "logit";
  const auto out = run_fit(req, read_csv(req.data));
  CHECK(out.result["convergence"]["iterations"].get<int>() <= 200);
  CHECK(out.result["curves"]["mean"]["grid"].size() == 201);
  CHECK(out.result["curves"]["linear_predictor"]["scale"] == "linear_predictor");
  CHECK(out.result["curves"]["mean"]["scale"] == "response");
  CHECK(out.result["meta"]["spline"] == "osullivan");
}

TEST_CASE("request validation") {
  auto req = request("penspline", "carlike.csv", "nope", "weight");
  const Table t = read_csv(req.data);
  CHECK_THROWS_WITH_AS(run_fit(req, t), doctest::Contains("'nope'"), DomainError);
  req.response = "mpg";
  req.link = "logit";
  CHECK_THROWS_AS(run_fit(req, t), DomainError);
  req.link = "";
  req.model = "bogus";
  CHECK_THROWS_AS(run_fit(req, t), DomainError);
  req.model = "groupcurves";
  CHECK_THROWS_AS(run_fit(req, t), DomainError);

  const Model m = curve_model_from_result(run_fit(request("penspline", "carlike.csv", "mpg", "weight"), t).result);
  CHECK_FALSE(extrapolation_warning(m, equispaced_grid(m.x_lo, m.x_hi)));
  CHECK(extrapolation_warning(m, equispaced_grid(m.x_lo - 1, m.x_hi)));
}

TEST_CASE("vmpfit exit codes") {
  const std::string out = "vmpfit_test_out.json";
  CHECK(run_tool("fit --model penspline --data " + kData + "/carlike.csv --response mpg --predictor weight --out " + out) == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(json::parse(ss.str())["q_densities"].size() == 5);
  CHECK(run_tool("fit --model penspline --data " + kData + "/carlike.csv --response mpg --predictor weight --iters 2 --out " + out) == 2);
  CHECK(run_tool("fit --model penspline --data " + kData + "/carlike.csv --response nope --predictor weight --out " + out) == 1);
  CHECK(run_tool("fit --model penspline --data missing.csv --response y --predictor x") == 1);
  CHECK(run_tool("fit --bogus") == 1);
  CHECK(run_tool("validate --only 9") == 0);
  std::remove(out.c_str());
}

TEST_CASE("validation checks catch a perturbed expectation formula") {
  CHECK(check_criterion(3).pass);
  CHECK(check_criterion(9).pass);
  ValidationHooks bad;
  bad.expected_T = [](const NatParam& x) {
    Vec t = expected_sufficient_statistic(x);
    if (x.family.kind == FamilyKind::InverseChiSquared) t[1] *= 1.001;  // E(1/x) off by 0.1%
    return t;
  };
  const auto r2 = check_criterion(2, bad);
  CHECK_FALSE(r2.pass);
  CHECK(r2.detail.find("InverseChiSquared") != std::string::npos);
  CHECK_FALSE(check_criterion(3, bad).pass);

  ValidationHooks bad_entropy;
  bad_entropy.entropy = [](const NatParam& x) {
    return entropy(x) + (x.family.kind == FamilyKind::InverseWishart ? 0.05 : 0.0);
  };
  CHECK_FALSE(check_criterion(2, bad_entropy).pass);
}
