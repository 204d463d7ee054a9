#pragma once

#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "vmp/models.hpp"

namespace vmp {

inline constexpr const char* kVersion = "0.1.0";

// Numeric CSV with a header row; columns addressed by name.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  Index rows() const { return columns.empty() ? 0 : static_cast<Index>(columns.front().size()); }
  bool has(const std::string& name) const;
  Vec column(const std::string& name) const;  // DomainError naming the column when missing
};

Table parse_csv(const std::string& text, const std::string& source = "<input>");
Table read_csv(const std::string& path);
void write_csv(const std::string& path, const Table& t);

struct FitRequest {
  std::string model = "penspline";  // linreg, penspline, groupcurves, glmspline
  std::string data;
  std::string response;
  std::vector<std::string> predictors;  // linreg may take several
  std::string group, label;
  Index knots = 25;
  Index group_knots = 5;
  bool subject_effects = true;
  std::string link;             // empty: identity, or logit for glmspline
  std::string spline = "auto";  // auto: osullivan for glmspline, truncated_linear otherwise
  std::size_t iters = 200;
  double tol = 1e-8;
  double sigma_beta_sq = 1e10;
  double a_hyper = 1e5;
  double damping = 1.0;
  std::uint64_t seed = 0;
  std::size_t grid_points = 201;
};

struct FitOutcome {
  nlohmann::ordered_json result;
  bool converged = false;
  std::string summary;
};

// Builds the model from the table, runs message passing and assembles the
// result document.
FitOutcome run_fit(const FitRequest& req, const Table& data);

// Curves recomputed from a result document's q-density and basis sections.
std::map<std::string, FittedCurve> curves_from_result(const nlohmann::ordered_json& result);

// The model's curve machinery (no factor graph) rebuilt from a result document.
Model curve_model_from_result(const nlohmann::ordered_json& result);

std::string dump_result(const nlohmann::ordered_json& result);

}  // namespace vmp
