#include "vmp/expfam.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void check_length(const Family& f, const Vec& eta, const char* where) {
  if (eta.size() != f.length())
    throw DimensionError(std::string(where) + ": " + f.name() + " expects natural parameter length " +
                         std::to_string(f.length()) + ", got " + std::to_string(eta.size()));
}

void require(const NatParam& x, const char* where) { require_proper(x, where); }

// Trailing d x d block of a matrix-family parameter, symmetrized.
Mat matrix_block(const Vec& eta, Index d) {
  return symmetrize(vec_inverse(eta.tail(d * d), d));
}

bool negdef(const Mat& S) {
  if (!S.allFinite()) return false;
  Eigen::LLT<Mat> llt(-symmetrize(S));
  return llt.info() == Eigen::Success;
}

double logdet_neg(const Mat& S, const std::string& ctx) { return spd_logdet(-S, ctx); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// e^{z} Ei(-z) at z = 4 sqrt(eta1 eta2), written as -e^z E1(z).
double ig_ei_term(double eta1, double eta2) {
  const double z = 4.0 * std::sqrt(eta1 * eta2);
  return -scaled_exponential_integral_e1(z);
}

}  // namespace

Index Family::length() const {
  switch (kind) {
    case FamilyKind::Bernoulli:
      return 1;
    case FamilyKind::UnivariateNormal:
    case FamilyKind::InverseChiSquared:
    case FamilyKind::Beta:
    case FamilyKind::InverseGaussian:
      return 2;
    case FamilyKind::MultivariateNormal:
      return d + d * d;
    case FamilyKind::InverseWishart:
    case FamilyKind::InverseGWishartDiag:
      return 1 + d * d;
  }
  return 0;
}

std::string Family::name() const {
  switch (kind) {
    case FamilyKind::Bernoulli: return "Bernoulli";
    case FamilyKind::UnivariateNormal: return "UnivariateNormal";
    case FamilyKind::InverseChiSquared: return "InverseChiSquared";
    case FamilyKind::Beta: return "Beta";
    case FamilyKind::InverseGaussian: return "InverseGaussian";
    case FamilyKind::MultivariateNormal: return "MultivariateNormal";
    case FamilyKind::InverseWishart: return "InverseWishart";
    case FamilyKind::InverseGWishartDiag: return "InverseGWishartDiag";
  }
  return "?";
}

Family family_from_name(const std::string& name, Index d) {
  if (d < 1) throw DomainError("family_from_name: dimension must be >= 1");
  if (name == "Bernoulli") return Family::bernoulli();
  if (name == "UnivariateNormal") return Family::univariate_normal();
  if (name == "InverseChiSquared") return Family::inverse_chi_squared();
  if (name == "Beta") return Family::beta();
  if (name == "InverseGaussian") return Family::inverse_gaussian();
  if (name == "MultivariateNormal") return Family::multivariate_normal(d);
  if (name == "InverseWishart") return Family::inverse_wishart(d);
  if (name == "InverseGWishartDiag") return Family::inverse_g_wishart_diag(d);
  throw DomainError("unknown family '" + name + "'");
}

NatParam common_to_natural(const Family& f, const CommonParameters& common) {
  auto bad = [&](const std::string& field, const std::string& why) {
    return DomainError(f.name() + ": parameter " + field + " " + why);
  };
  auto want = [&](auto* p) {
    if (!p) throw DomainError(f.name() + ": common parameter record of the wrong kind");
    return *p;
  };
  Vec eta(f.length());
  switch (f.kind) {
    case FamilyKind::Bernoulli: {
      const auto c = want(std::get_if<BernoulliParams>(&common));
      if (!(c.p > 0 && c.p < 1)) throw bad("p", "must lie in (0,1), got " + fmt(c.p));
      eta << std::log(c.p / (1 - c.p));
      break;
    }
    case FamilyKind::UnivariateNormal: {
      const auto c = want(std::get_if<NormalParams>(&common));
      if (!std::isfinite(c.mu)) throw bad("mu", "must be finite");
      if (!(c.sigma2 > 0) || !std::isfinite(c.sigma2)) throw bad("sigma2", "must be positive, got " + fmt(c.sigma2));
      eta << c.mu / c.sigma2, -0.5 / c.sigma2;
      break;
    }
    case FamilyKind::InverseChiSquared: {
      const auto c = want(std::get_if<InvChiSqParams>(&common));
      if (!(c.kappa > 0) || !std::isfinite(c.kappa)) throw bad("kappa", "must be positive, got " + fmt(c.kappa));
      if (!(c.lambda > 0) || !std::isfinite(c.lambda)) throw bad("lambda", "must be positive, got " + fmt(c.lambda));
      eta << -0.5 * (c.kappa + 2), -0.5 * c.lambda;
      break;
    }
    case FamilyKind::Beta: {
      const auto c = want(std::get_if<BetaParams>(&common));
      if (!(c.alpha > 0) || !std::isfinite(c.alpha)) throw bad("alpha", "must be positive, got " + fmt(c.alpha));
      if (!(c.beta > 0) || !std::isfinite(c.beta)) throw bad("beta", "must be positive, got " + fmt(c.beta));
      eta << c.alpha - 1, c.beta - 1;
      break;
    }
    case FamilyKind::InverseGaussian: {
      const auto c = want(std::get_if<InvGaussianParams>(&common));
      if (!(c.mu > 0) || !std::isfinite(c.mu)) throw bad("mu", "must be positive, got " + fmt(c.mu));
      if (!(c.lambda > 0) || !std::isfinite(c.lambda)) throw bad("lambda", "must be positive, got " + fmt(c.lambda));
      eta << -0.5 * c.lambda / (c.mu * c.mu), -0.5 * c.lambda;
      break;
    }
    case FamilyKind::MultivariateNormal: {
      const auto c = want(std::get_if<MvnParams>(&common));
      if (c.mu.size() != f.d || c.Sigma.rows() != f.d || c.Sigma.cols() != f.d)
        throw DimensionError(f.name() + ": mu/Sigma dimensions do not match d=" + std::to_string(f.d));
      if (!c.mu.allFinite()) throw bad("mu", "must be finite");
      Mat P;
      try {
        P = spd_inverse(c.Sigma, "Sigma");
      } catch (const NumericError&) {
        throw bad("Sigma", "must be symmetric positive definite");
      }
      eta << P * c.mu, -0.5 * vec(P);
      break;
    }
    case FamilyKind::InverseWishart:
    case FamilyKind::InverseGWishartDiag: {
      const auto c = want(std::get_if<InvWishartParams>(&common));
      const double dd = static_cast<double>(f.d);
      if (c.Lambda.rows() != f.d || c.Lambda.cols() != f.d)
        throw DimensionError(f.name() + ": Lambda dimension does not match d=" + std::to_string(f.d));
      // The diagonal case is a product of Inverse-chi^2(kappa + d - 1) laws.
      const double kmin = f.kind == FamilyKind::InverseWishart ? dd - 1 : 1 - dd;
      if (!(c.kappa > kmin) || !std::isfinite(c.kappa))
        throw bad("kappa", "must exceed " + fmt(kmin) + ", got " + fmt(c.kappa));
      if (!negdef(-c.Lambda) || (c.Lambda - c.Lambda.transpose()).cwiseAbs().maxCoeff() >
                                    1e-12 * c.Lambda.cwiseAbs().maxCoeff())
        throw bad("Lambda", "must be symmetric positive definite");
      if (f.kind == FamilyKind::InverseGWishartDiag &&
          (c.Lambda - Mat(c.Lambda.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 0)
        throw bad("Lambda", "must be diagonal for the totally disconnected graph");
      eta << -0.5 * (c.kappa + dd + 1), -0.5 * vec(c.Lambda);
      break;
    }
  }
  return {f, eta};
}

CommonParameters natural_to_common(const NatParam& x) {
  require(x, "natural_to_common");
  const Vec& e = x.eta;
  const Index d = x.family.d;
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      return BernoulliParams{sigmoid(e[0])};
    case FamilyKind::UnivariateNormal:
      return NormalParams{-0.5 * e[0] / e[1], -0.5 / e[1]};
    case FamilyKind::InverseChiSquared:
      return InvChiSqParams{-2 - 2 * e[0], -2 * e[1]};
    case FamilyKind::Beta:
      return BetaParams{e[0] + 1, e[1] + 1};
    case FamilyKind::InverseGaussian:
      return InvGaussianParams{std::sqrt(e[1] / e[0]), -2 * e[1]};
    case FamilyKind::MultivariateNormal: {
      const auto m = mvn_moments(e, "natural_to_common");
      return MvnParams{m.mean, m.cov};
    }
    case FamilyKind::InverseWishart:
    case FamilyKind::InverseGWishartDiag:
      return InvWishartParams{-static_cast<double>(d) - 1 - 2 * e[0], -2 * matrix_block(e, d)};
  }
  throw DomainError("natural_to_common: unknown family");
}

bool is_proper(const NatParam& x) {
  if (x.eta.size() != x.family.length() || !x.eta.allFinite()) return false;
  const Vec& e = x.eta;
  const Index d = x.family.d;
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      return true;
    case FamilyKind::UnivariateNormal:
      return e[1] < 0;
    case FamilyKind::InverseChiSquared:
      return e[0] < -1 && e[1] < 0;
    case FamilyKind::Beta:
      return e[0] > -1 && e[1] > -1;
    case FamilyKind::InverseGaussian:
      return e[0] < 0 && e[1] < 0;
    case FamilyKind::MultivariateNormal:
      return negdef(matrix_block(e, d));
    case FamilyKind::InverseWishart:
      return e[0] < -static_cast<double>(d) && negdef(matrix_block(e, d));
    case FamilyKind::InverseGWishartDiag: {
      if (!(e[0] < -1)) return false;
      const Mat V = vec_inverse(e.tail(d * d), d);
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) {
          if (i == j && !(V(i, j) < 0)) return false;
          if (i != j && V(i, j) != 0) return false;
        }
      return true;
    }
  }
  return false;
}

void require_proper(const NatParam& x, const std::string& context) {
  check_length(x.family, x.eta, context.c_str());
  if (!is_proper(x)) {
    std::ostringstream os;
    os << context << ": " << x.family.name() << " natural parameter is not proper (eta = [";
    for (Index i = 0; i < x.eta.size(); ++i) os << (i ? ", " : "") << x.eta[i];
    os << "])";
    throw ImproperError(os.str());
  }
}

Vec expected_sufficient_statistic(const NatParam& x) {
  require(x, "expected_sufficient_statistic");
  const Vec& e = x.eta;
  const Index d = x.family.d;
  Vec out(x.family.length());
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      out << sigmoid(e[0]);
      break;
    case FamilyKind::UnivariateNormal:
      out << -0.5 * e[0] / e[1], (e[0] * e[0] - 2 * e[1]) / (4 * e[1] * e[1]);
      break;
    case FamilyKind::InverseChiSquared:
      out << std::log(-e[1]) - digamma(-e[0] - 1), (e[0] + 1) / e[1];
      break;
    case FamilyKind::Beta: {
      const double s = digamma(e[0] + e[1] + 2);
      out << digamma(e[0] + 1) - s, digamma(e[1] + 1) - s;
      break;
    }
    case FamilyKind::InverseGaussian: {
      const double r = std::sqrt(e[1] / e[0]);
      out << r, 1 / r - 0.5 / e[1];
      break;
    }
    case FamilyKind::MultivariateNormal: {
      const auto m = mvn_moments(e, "expected_sufficient_statistic");
      out << m.mean, vec(m.second);
      break;
    }
    case FamilyKind::InverseWishart: {
      const Mat V = matrix_block(e, d);
      double s = 0;
      for (Index j = 1; j <= d; ++j) s += digamma(-e[0] - 0.5 * static_cast<double>(d + j));
      const Mat Vinv = negdef_inverse(V, "expected_sufficient_statistic");
      out << logdet_neg(V, "expected_sufficient_statistic") - s,
          vec((e[0] + 0.5 * static_cast<double>(d + 1)) * Vinv);
      break;
    }
    case FamilyKind::InverseGWishartDiag: {
      const Mat V = vec_inverse(e.tail(d * d), d);
      double s = 0;
      Mat Einv = Mat::Zero(d, d);
      for (Index i = 0; i < d; ++i) {
        s += std::log(-V(i, i)) - digamma(-e[0] - 1);
        Einv(i, i) = (e[0] + 1) / V(i, i);
      }
      out << s, vec(Einv);
      break;
    }
  }
  return out;
}

double log_partition(const NatParam& x) {
  require(x, "log_partition");
  const Vec& e = x.eta;
  const Index d = x.family.d;
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      return log1pexp(e[0]);
    case FamilyKind::UnivariateNormal:
      return -0.25 * e[0] * e[0] / e[1] - 0.5 * std::log(-2 * e[1]);
    case FamilyKind::InverseChiSquared:
      return (e[0] + 1) * std::log(-e[1]) + log_gamma(-e[0] - 1);
    case FamilyKind::Beta:
      return log_gamma(e[0] + 1) + log_gamma(e[1] + 1) - log_gamma(e[0] + e[1] + 2);
    case FamilyKind::InverseGaussian:
      return -2 * std::sqrt(e[0] * e[1]) - 0.5 * std::log(-2 * e[1]);
    case FamilyKind::MultivariateNormal: {
      const Vec e1 = e.head(d);
      const Mat S = matrix_block(e.tail(d * d), d);
      const Mat Sinv = negdef_inverse(S, "log_partition");
      return -0.25 * e1.dot(Sinv * e1) - 0.5 * logdet_neg(2 * S, "log_partition");
    }
    case FamilyKind::InverseWishart: {
      const Mat V = matrix_block(e, d);
      double s = 0;
      for (Index j = 1; j <= d; ++j) s += log_gamma(-e[0] - 0.5 * static_cast<double>(d + j));
      return (e[0] + 0.5 * static_cast<double>(d + 1)) * logdet_neg(V, "log_partition") + s;
    }
    case FamilyKind::InverseGWishartDiag: {
      double s = 0;
      for (Index i = 0; i < d; ++i)
        s += (e[0] + 1) * std::log(-e[1 + i * d + i]) + log_gamma(-e[0] - 1);
      return s;
    }
  }
  throw DomainError("log_partition: unknown family");
}

double expected_log_base_measure(const NatParam& x) {
  require(x, "expected_log_base_measure");
  const Vec& e = x.eta;
  const double d = static_cast<double>(x.family.d);
  switch (x.family.kind) {
    case FamilyKind::UnivariateNormal:
      return -0.5 * kLog2Pi;
    case FamilyKind::MultivariateNormal:
      return -0.5 * d * kLog2Pi;
    case FamilyKind::InverseWishart:
      return -0.25 * d * (d - 1) * kLogPi;
    case FamilyKind::InverseGaussian:
      // h(x) = (2 pi)^{-1/2} x^{-3/2}
      return -0.25 * std::log(4 * std::numbers::pi * std::numbers::pi * std::pow(e[1] / e[0], 3)) -
             1.5 * ig_ei_term(e[0], e[1]);
    default:
      return 0.0;
  }
}

double entropy(const NatParam& x) {
  require(x, "entropy");
  const Vec& e = x.eta;
  const Index d = x.family.d;
  const double dd = static_cast<double>(d);
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      return log1pexp(e[0]) - e[0] * sigmoid(e[0]);
    case FamilyKind::UnivariateNormal:
      return 0.5 * (1 + kLog2Pi) + 0.5 * std::log(-0.5 / e[1]);
    case FamilyKind::InverseChiSquared:
      return log_gamma(-e[0] - 1) + e[0] * digamma(-e[0] - 1) + std::log(-e[1]) - e[0] - 1;
    case FamilyKind::Beta:
      return log_gamma(e[0] + 1) + log_gamma(e[1] + 1) - log_gamma(e[0] + e[1] + 2) -
             e[0] * digamma(e[0] + 1) - e[1] * digamma(e[1] + 1) +
             (e[0] + e[1]) * digamma(e[0] + e[1] + 2);
    case FamilyKind::InverseGaussian:
      return 0.5 + 0.25 * std::log(std::numbers::pi * std::numbers::pi * e[1] / std::pow(e[0], 3)) +
             1.5 * ig_ei_term(e[0], e[1]);
    case FamilyKind::MultivariateNormal: {
      const Mat S = matrix_block(e.tail(d * d), d);
      // log|-(1/2) S^{-1}| = -log|-2 S|
      return 0.5 * dd * (1 + kLog2Pi) - 0.5 * logdet_neg(2 * S, "entropy");
    }
    case FamilyKind::InverseWishart: {
      const Mat V = matrix_block(e, d);
      double s = 0;
      for (Index j = 1; j <= d; ++j) {
        const double a = -e[0] - 0.5 * static_cast<double>(d + j);
        s += log_gamma(a) + e[0] * digamma(a);
      }
      return s + 0.5 * (dd + 1) * logdet_neg(V, "entropy") - dd * e[0] - 0.5 * dd * (dd + 1) +
             0.25 * dd * (dd - 1) * kLogPi;
    }
    case FamilyKind::InverseGWishartDiag: {
      double s = 0;
      for (Index i = 0; i < d; ++i) {
        const double e2 = e[1 + i * d + i];
        s += log_gamma(-e[0] - 1) + e[0] * digamma(-e[0] - 1) + std::log(-e2) - e[0] - 1;
      }
      return s;
    }
  }
  throw DomainError("entropy: unknown family");
}

Vec sufficient_statistic(const Family& f, const Mat& x) {
  auto scalar = [&]() {
    if (x.rows() != 1 || x.cols() != 1)
      throw DimensionError(f.name() + ": expected a scalar observation");
    return x(0, 0);
  };
  Vec t(f.length());
  switch (f.kind) {
    case FamilyKind::Bernoulli:
      t << scalar();
      break;
    case FamilyKind::UnivariateNormal: {
      const double v = scalar();
      t << v, v * v;
      break;
    }
    case FamilyKind::InverseChiSquared: {
      const double v = scalar();
      t << std::log(v), 1 / v;
      break;
    }
    case FamilyKind::Beta: {
      const double v = scalar();
      t << std::log(v), std::log1p(-v);
      break;
    }
    case FamilyKind::InverseGaussian: {
      const double v = scalar();
      t << v, 1 / v;
      break;
    }
    case FamilyKind::MultivariateNormal: {
      if (x.rows() != f.d || x.cols() != 1) throw DimensionError(f.name() + ": expected a d x 1 point");
      const Vec v = x.col(0);
      t << v, vec(v * v.transpose());
      break;
    }
    case FamilyKind::InverseWishart: {
      if (x.rows() != f.d || x.cols() != f.d) throw DimensionError(f.name() + ": expected a d x d point");
      t << spd_logdet(x, "sufficient_statistic"), vec(spd_inverse(x, "sufficient_statistic"));
      break;
    }
    case FamilyKind::InverseGWishartDiag: {
      if (x.rows() != f.d || x.cols() != f.d) throw DimensionError(f.name() + ": expected a d x d point");
      const Vec diag = x.diagonal();
      t << diag.array().log().sum(), vec(Mat(diag.cwiseInverse().asDiagonal()));
      break;
    }
  }
  return t;
}

double log_base_measure(const Family& f, const Mat& x) {
  const double d = static_cast<double>(f.d);
  switch (f.kind) {
    case FamilyKind::UnivariateNormal:
      return -0.5 * kLog2Pi;
    case FamilyKind::MultivariateNormal:
      return -0.5 * d * kLog2Pi;
    case FamilyKind::InverseWishart:
      return -0.25 * d * (d - 1) * kLogPi;
    case FamilyKind::InverseGaussian:
      return -0.5 * kLog2Pi - 1.5 * std::log(x(0, 0));
    default:
      return 0.0;
  }
}

double log_density(const NatParam& q, const Mat& x) {
  return sufficient_statistic(q.family, x).dot(q.eta) - log_partition(q) +
         log_base_measure(q.family, x);
}

Vec canonicalize(const Family& f, const Vec& eta) {
  check_length(f, eta, "canonicalize");
  Vec out = eta;
  const Index d = f.d;
  switch (f.kind) {
    case FamilyKind::MultivariateNormal:
      out.tail(d * d) = vec(symmetrize(vec_inverse(eta.tail(d * d), d)));
      break;
    case FamilyKind::InverseWishart:
      out.tail(d * d) = vec(symmetrize(vec_inverse(eta.tail(d * d), d)));
      break;
    case FamilyKind::InverseGWishartDiag: {
      const Vec diag = vec_inverse(eta.tail(d * d), d).diagonal();
      out.tail(d * d) = vec(Mat(diag.asDiagonal()));
      break;
    }
    default:
      break;
  }
  return out;
}

Mat expected_inverse(const NatParam& x) {
  const Index d = x.family.d;
  switch (x.family.kind) {
    case FamilyKind::InverseChiSquared:
    case FamilyKind::InverseWishart:
    case FamilyKind::InverseGWishartDiag: {
      const Vec t = expected_sufficient_statistic(x);
      return vec_inverse(t.tail(d * d), d);
    }
    default:
      throw DomainError("expected_inverse: not defined for " + x.family.name());
  }
}

}  // namespace vmp
