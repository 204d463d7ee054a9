#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "vmp/expfam.hpp"

namespace vmp {

using Rng = std::mt19937_64;
inline constexpr const char* kRngAlgorithm = "std::mt19937_64";

// One draw from the proper member x. Scalar families return 1x1, MVN d x 1,
// matrix families d x d.
Mat sample(const NatParam& x, Rng& rng);

enum class OracleMethod { quadrature, monte_carlo };

struct MomentEstimate {
  Vec mean;       // estimate of E{T(x)}
  Vec std_error;  // quadrature error estimate or Monte Carlo standard error
  double entropy = 0.0;
  double entropy_std_error = 0.0;
  bool flagged = false;  // budget ran out before the tolerance was met
  std::string method;
};

// Quadrature is available for the scalar families and normalizes the kernel
// numerically, so it never calls log_partition. budget is the refinement
// level limit for quadrature and the number of draws for Monte Carlo.
MomentEstimate moment_oracle(const NatParam& x, OracleMethod method, std::size_t budget,
                             std::uint64_t seed = 20240601);

// Asymptotic Kolmogorov-Smirnov p-value for the one-sample statistic against
// a continuous cdf.
struct KsResult {
  double statistic;
  double p_value;
};
KsResult ks_test(std::vector<double> draws, const std::function<double(double)>& cdf);

}  // namespace vmp
