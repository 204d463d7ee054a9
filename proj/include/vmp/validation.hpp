#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vmp/models.hpp"

namespace vmp {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

// Replaceable expectation formulas, so a perturbed formula can be fed to the
// checks that are supposed to catch it.
struct ValidationHooks {
  std::function<Vec(const NatParam&)> expected_T = [](const NatParam& x) { return expected_sufficient_statistic(x); };
  std::function<double(const NatParam&)> entropy = [](const NatParam& x) { return vmp::entropy(x); };
};

inline constexpr int kNumCriteria = 9;

CriterionResult check_criterion(int id, const ValidationHooks& hooks = {});
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const ValidationHooks& hooks = {});

// Best linear-predictor RMSE of a penalized likelihood fit with the smoothing
// parameter tuned against the truth, on the same data as criterion 8.
double tuned_penalized_rmse(Link link, std::uint64_t seed);

std::string format_result(const CriterionResult& r, bool known_red = false);

}  // namespace vmp
