#pragma once

#include <string>
#include <variant>

#include "vmp/linalg.hpp"
#include "vmp/special.hpp"

namespace vmp {

enum class FamilyKind {
  Bernoulli,
  UnivariateNormal,
  InverseChiSquared,
  Beta,
  InverseGaussian,
  MultivariateNormal,
  InverseWishart,
  InverseGWishartDiag,  // inverse G-Wishart with a totally disconnected graph
};

struct Family {
  FamilyKind kind = FamilyKind::MultivariateNormal;
  Index d = 1;

  static Family bernoulli() { return {FamilyKind::Bernoulli, 1}; }
  static Family univariate_normal() { return {FamilyKind::UnivariateNormal, 1}; }
  static Family inverse_chi_squared() { return {FamilyKind::InverseChiSquared, 1}; }
  static Family beta() { return {FamilyKind::Beta, 1}; }
  static Family inverse_gaussian() { return {FamilyKind::InverseGaussian, 1}; }
  static Family multivariate_normal(Index d) { return {FamilyKind::MultivariateNormal, d}; }
  static Family inverse_wishart(Index d) { return {FamilyKind::InverseWishart, d}; }
  static Family inverse_g_wishart_diag(Index d) { return {FamilyKind::InverseGWishartDiag, d}; }

  Index length() const;
  std::string name() const;
  bool is_matrix() const {
    return kind == FamilyKind::InverseWishart || kind == FamilyKind::InverseGWishartDiag;
  }
  bool operator==(const Family&) const = default;
};

Family family_from_name(const std::string& name, Index d);

struct NatParam {
  Family family;
  Vec eta;
};

struct BernoulliParams { double p; };
struct NormalParams { double mu, sigma2; };
struct InvChiSqParams { double kappa, lambda; };
struct BetaParams { double alpha, beta; };
struct InvGaussianParams { double mu, lambda; };
struct MvnParams { Vec mu; Mat Sigma; };
// Also used for InverseGWishartDiag, with Lambda diagonal.
struct InvWishartParams { double kappa; Mat Lambda; };

using CommonParameters = std::variant<BernoulliParams, NormalParams, InvChiSqParams, BetaParams,
                                      InvGaussianParams, MvnParams, InvWishartParams>;

NatParam common_to_natural(const Family& family, const CommonParameters& common);
CommonParameters natural_to_common(const NatParam& x);

bool is_proper(const NatParam& x);
void require_proper(const NatParam& x, const std::string& context);

Vec expected_sufficient_statistic(const NatParam& x);
double entropy(const NatParam& x);
double log_partition(const NatParam& x);
// E{log h(x)} for the base measure h of the family.
double expected_log_base_measure(const NatParam& x);

// Sufficient statistic and log base measure at a point. Scalar families take
// a 1x1 matrix, MVN a d x 1 column, matrix families a d x d matrix.
Vec sufficient_statistic(const Family& family, const Mat& x);
double log_base_measure(const Family& family, const Mat& x);
double log_density(const NatParam& q, const Mat& x);

// Projects the trailing d^2 block onto the diagonal for InverseGWishartDiag
// and symmetrizes matrix blocks otherwise.
Vec canonicalize(const Family& family, const Vec& eta);

// E(X^{-1}) for the inverse-scale families (InverseChiSquared, InverseWishart,
// InverseGWishartDiag), taken from the sufficient statistic expectation.
Mat expected_inverse(const NatParam& x);

}  // namespace vmp
