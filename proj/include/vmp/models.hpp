#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vmp/fragments.hpp"
#include "vmp/fragments_glm.hpp"
#include "vmp/oracle.hpp"

namespace vmp {

enum class SplineKind { truncated_linear, osullivan };
enum class Link { identity, logit, probit, log };

std::string to_string(SplineKind k);
std::string to_string(Link l);
SplineKind spline_kind_from_string(const std::string& s);
Link link_from_string(const std::string& s);

double inverse_link(Link link, double eta);

// Type-7 quantiles of the distinct values of x at probabilities k/(n_knots+1).
Vec quantile_knots(const Vec& x, Index n_knots);

struct SplineBasis {
  SplineKind kind = SplineKind::truncated_linear;
  Vec knots;  // interior knots
  double lo = 0, hi = 1;
  Mat transform;  // O'Sullivan: B-spline values -> Z columns

  Index size() const;
  // Rows of Z at x. O'Sullivan bases clamp x to [lo, hi].
  Mat evaluate(const Vec& x) const;
};

// Builds the basis (computing the O'Sullivan transform when needed).
SplineBasis make_spline_basis(SplineKind kind, const Vec& knots, double lo, double hi);

// Z is n x K for both kinds. truncated_linear: (x - knot_k)_+ at K quantile
// knots. osullivan: cubic B-splines on K - 2 interior quantile knots, turned
// into K columns with an identity penalty.
std::pair<Mat, SplineBasis> spline_design(const Vec& x, Index K, SplineKind kind);

struct Standardizer {
  double center = 0, scale = 1;
  static Standardizer fit(const Vec& x);
  Vec apply(const Vec& x) const { return ((x.array() - center) / scale).matrix(); }
};

struct Hyper {
  double sigma_beta_sq = 1e10;
  double A = 1e5;  // Half-Cauchy scale for every standard deviation
  Vec A_U = Vec::Constant(2, 1e5);  // half-t scales for the random intercept/slope block
  double nu = 2;   // half-t degrees of freedom
};

struct Model {
  std::string kind;  // linreg, penspline, groupcurves, glmspline
  ModelSpec spec;
  Link link = Link::identity;
  std::string coef_node;
  // What the curve builders need.
  std::optional<Standardizer> standardizer;
  std::optional<SplineBasis> basis;      // global basis
  std::optional<SplineBasis> grp_basis;  // group-level basis (groupcurves)
  Index n_groups = 0;
  bool subject_effects = false;
  double x_lo = 0, x_hi = 1;  // predictor range, original units
  std::vector<std::string> warnings;

  std::vector<std::string> curve_names() const;
  // Rows mapping the coefficient node to the named curve at grid points in
  // original predictor units.
  Mat curve_design(const std::string& curve, const Vec& grid) const;
};

Model build_linear_regression(const Vec& y, const Mat& X, double sigma_beta_sq = 1e10, double A_hyper = 1e5);

Model build_penalized_spline(const Vec& y, const Vec& x, Index K, const Hyper& hyper = {},
                             SplineKind kind = SplineKind::truncated_linear);

struct GroupCurvesOptions {
  Index K_gbl = 15;
  Index K_grp = 5;
  bool subject_effects = true;  // random intercept and slope per group
  SplineKind kind = SplineKind::truncated_linear;
};

// group_id: 1..m per observation; label: 0 (W) or 1 (B), constant within group.
Model build_group_curves(const Vec& y, const Vec& x, const std::vector<int>& group_id, const Vec& label,
                         const GroupCurvesOptions& opts = {}, const Hyper& hyper = {});

Model build_glm_spline(const Vec& y, const Vec& x, Index K, Link link, const Hyper& hyper = {},
                       SplineKind kind = SplineKind::osullivan);

struct FittedCurve {
  Vec grid, mean, lower95, upper95;
};

inline constexpr double kZ975 = 1.959963984540054;

// Bands are computed for C mu +/- z sd and mapped through the inverse link.
FittedCurve fitted_curve(const NatParam& q_coef, const Mat& C_grid, const Vec& grid, Link link = Link::identity);

Vec equispaced_grid(double lo, double hi, Index n = 201);

// Set when grid leaves the predictor range the basis was built on.
std::optional<std::string> extrapolation_warning(const Model& m, const Vec& grid);

// ---- synthetic data -----------------------------------------------------------

// {1.05 - 1.02x + 0.018x^2 + 0.4 phi(x; 0.38, 0.08) + 0.08 phi(x; 0.75, 0.03)}/2.7
double f_true(double x);
// True linear predictor of the GLM simulator: logit(f), Phi^{-1}(f), log(10 f).
double true_linear_predictor(Link link, double x);

struct Dataset {
  Vec y, x;
  std::vector<int> group;
  Vec label;
  Mat X;
};

Dataset simulate_linear_regression(Index n, Index d, std::uint64_t seed, double sigma = 1.0);
Dataset simulate_gaussian_spline(Index n, double sigma, std::uint64_t seed);
Dataset simulate_glm(Index n, Link link, std::uint64_t seed);
Dataset simulate_group_curves(Index m, Index n_per, std::uint64_t seed);

}  // namespace vmp
