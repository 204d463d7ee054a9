#include "vmp/oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <cmath>

namespace vmp {

namespace {

double gamma_draw(double shape, Rng& rng) { return std::gamma_distribution<double>(shape, 1.0)(rng); }

// Inverse-chi^2(kappa, lambda) = lambda / chi^2_kappa.
double inv_chisq_draw(double kappa, double lambda, Rng& rng) {
  return lambda / (2.0 * gamma_draw(0.5 * kappa, rng));
}

// Bartlett factor draw of W ~ Wishart(kappa, S) given the Cholesky factor L of S.
Mat wishart_draw(double kappa, const Mat& L, Rng& rng) {
  const Index d = L.rows();
  std::normal_distribution<double> z;
  Mat A = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(2.0 * gamma_draw(0.5 * (kappa - static_cast<double>(i)), rng));
    for (Index j = 0; j < i; ++j) A(i, j) = z(rng);
  }
  const Mat LA = L * A;
  return LA * LA.transpose();
}

// Scalar quadrature on a transformed real line. The map u -> x(u) carries
// Jacobian dx/du; stat(u) returns T(x(u)) computed without cancellation.
struct ScalarProblem {
  std::function<double(double)> log_kernel;  // T^T eta + log h at x(u), shifted
  std::function<double(double)> log_jacobian;
  std::function<Vec(double)> stat;
};

MomentEstimate quadrature(const NatParam& q, const ScalarProblem& p, std::size_t levels) {
  boost::math::quadrature::sinh_sinh<double> integrator(std::max<std::size_t>(levels, 4));
  const double tol = 1e-14;
  bool flagged = false;
  auto integrate = [&](const std::function<double(double)>& f) {
    double err = 0, l1 = 0;
    const double v = integrator.integrate(f, tol, &err, &l1);
    if (!(err <= 1e-10 * std::max(l1, 1e-300))) flagged = true;
    return std::pair{v, err};
  };
  auto weight = [&](double u) {
    const double lw = p.log_kernel(u) + p.log_jacobian(u);
    return std::isfinite(lw) ? std::exp(lw) : 0.0;
  };
  const auto [Z, zerr] = integrate(weight);
  const Index m = q.family.length();
  MomentEstimate out;
  out.mean.resize(m);
  out.std_error.resize(m);
  for (Index k = 0; k < m; ++k) {
    const auto [v, e] = integrate([&](double u) {
      const double w = weight(u);
      return w == 0.0 ? 0.0 : w * p.stat(u)[k];
    });
    out.mean[k] = v / Z;
    out.std_error[k] = e / Z + std::fabs(v) * zerr / (Z * Z);
  }
  const auto [ek, ekerr] = integrate([&](double u) {
    const double w = weight(u);
    return w == 0.0 ? 0.0 : w * p.log_kernel(u);
  });
  out.entropy = std::log(Z) - ek / Z;
  out.entropy_std_error = ekerr / Z + zerr / Z;
  out.flagged = flagged;
  out.method = "quadrature(sinh-sinh)";
  return out;
}

}  // namespace

Mat sample(const NatParam& x, Rng& rng) {
  require_proper(x, "sample");
  const Index d = x.family.d;
  const auto common = natural_to_common(x);
  Mat out(1, 1);
  switch (x.family.kind) {
    case FamilyKind::Bernoulli:
      out(0, 0) = std::bernoulli_distribution(std::get<BernoulliParams>(common).p)(rng) ? 1.0 : 0.0;
      return out;
    case FamilyKind::UnivariateNormal: {
      const auto c = std::get<NormalParams>(common);
      out(0, 0) = std::normal_distribution<double>(c.mu, std::sqrt(c.sigma2))(rng);
      return out;
    }
    case FamilyKind::InverseChiSquared: {
      const auto c = std::get<InvChiSqParams>(common);
      out(0, 0) = inv_chisq_draw(c.kappa, c.lambda, rng);
      return out;
    }
    case FamilyKind::Beta: {
      const auto c = std::get<BetaParams>(common);
      const double a = gamma_draw(c.alpha, rng), b = gamma_draw(c.beta, rng);
      out(0, 0) = a / (a + b);
      return out;
    }
    case FamilyKind::InverseGaussian: {
      // Michael, Schucany and Haas transformation
      const auto c = std::get<InvGaussianParams>(common);
      const double nu = std::normal_distribution<double>()(rng);
      const double y = nu * nu, mu = c.mu, lam = c.lambda;
      const double v = mu + mu * mu * y / (2 * lam) -
                       mu / (2 * lam) * std::sqrt(4 * mu * lam * y + mu * mu * y * y);
      const double u = std::uniform_real_distribution<double>()(rng);
      out(0, 0) = u <= mu / (mu + v) ? v : mu * mu / v;
      return out;
    }
    case FamilyKind::MultivariateNormal: {
      const auto c = std::get<MvnParams>(common);
      const Mat L = Eigen::LLT<Mat>(c.Sigma).matrixL();
      Vec z(d);
      std::normal_distribution<double> nd;
      for (Index i = 0; i < d; ++i) z[i] = nd(rng);
      return c.mu + L * z;
    }
    case FamilyKind::InverseWishart: {
      const auto c = std::get<InvWishartParams>(common);
      const Mat L = Eigen::LLT<Mat>(spd_inverse(c.Lambda, "sample")).matrixL();
      return spd_inverse(wishart_draw(c.kappa, L, rng), "sample");
    }
    case FamilyKind::InverseGWishartDiag: {
      const auto c = std::get<InvWishartParams>(common);
      Mat X = Mat::Zero(d, d);
      for (Index i = 0; i < d; ++i)
        X(i, i) = inv_chisq_draw(c.kappa + static_cast<double>(d) - 1, c.Lambda(i, i), rng);
      return X;
    }
  }
  throw DomainError("sample: unknown family");
}

MomentEstimate moment_oracle(const NatParam& x, OracleMethod method, std::size_t budget,
                             std::uint64_t seed) {
  require_proper(x, "moment_oracle");
  const Vec& e = x.eta;
  if (method == OracleMethod::quadrature) {
    // The log-partition enters only as a constant shift against overflow;
    // the normalizer itself is integrated.
    const double shift = log_partition(x);
    ScalarProblem p;
    switch (x.family.kind) {
      case FamilyKind::Bernoulli: {
        const double w1 = std::exp(e[0] - shift), w0 = std::exp(-shift);
        const double z = w0 + w1;
        MomentEstimate out;
        out.mean = Vec::Constant(1, w1 / z);
        out.std_error = Vec::Zero(1);
        out.entropy = -(w0 / z) * std::log(w0 / z) - (w1 / z) * std::log(w1 / z);
        out.method = "enumeration";
        return out;
      }
      case FamilyKind::UnivariateNormal: {
        const auto c = std::get<NormalParams>(natural_to_common(x));
        const double s = std::sqrt(c.sigma2);
        p.log_kernel = [=](double u) {
          const double v = c.mu + s * u;
          return e[0] * v + e[1] * v * v - 0.9189385332046727 - shift;
        };
        p.log_jacobian = [=](double) { return std::log(s); };
        p.stat = [=](double u) {
          const double v = c.mu + s * u;
          return Vec((Vec(2) << v, v * v).finished());
        };
        break;
      }
      case FamilyKind::InverseChiSquared:
      case FamilyKind::InverseGaussian: {
        const bool igauss = x.family.kind == FamilyKind::InverseGaussian;
        // centre the log scale near the bulk
        const double c = igauss ? std::sqrt(e[1] / e[0]) : e[1] / (e[0] + 1);
        p.log_kernel = [=](double u) {
          const double v = c * std::exp(u), lv = std::log(c) + u;
          return igauss ? e[0] * v + e[1] / v - 0.9189385332046727 - 1.5 * lv - shift
                        : e[0] * lv + e[1] / v - shift;
        };
        p.log_jacobian = [=](double u) { return std::log(c) + u; };
        p.stat = [=](double u) {
          const double v = c * std::exp(u);
          return igauss ? Vec((Vec(2) << v, 1 / v).finished())
                        : Vec((Vec(2) << std::log(c) + u, 1 / v).finished());
        };
        break;
      }
      case FamilyKind::Beta: {
        // x = 1/(1+e^{-u}) keeps log x and log(1-x) exact in the tails
        p.log_kernel = [=](double u) { return -e[0] * log1pexp(-u) - e[1] * log1pexp(u) - shift; };
        p.log_jacobian = [](double u) { return -log1pexp(-u) - log1pexp(u); };
        p.stat = [](double u) { return Vec((Vec(2) << -log1pexp(-u), -log1pexp(u)).finished()); };
        break;
      }
      default:
        throw DomainError("moment_oracle: quadrature is only available for scalar families, not " +
                          x.family.name());
    }
    return quadrature(x, p, budget);
  }

  if (budget < 2) throw DomainError("moment_oracle: Monte Carlo budget must be at least 2");
  Rng rng(seed);
  const Index m = x.family.length();
  Vec s1 = Vec::Zero(m), s2 = Vec::Zero(m);
  double h1 = 0, h2 = 0;
  const double A = log_partition(x);
  for (std::size_t i = 0; i < budget; ++i) {
    const Mat draw = sample(x, rng);
    const Vec t = sufficient_statistic(x.family, draw);
    s1 += t;
    s2 += t.cwiseProduct(t);
    const double lq = t.dot(e) - A + log_base_measure(x.family, draw);
    h1 -= lq;
    h2 += lq * lq;
  }
  const double n = static_cast<double>(budget);
  MomentEstimate out;
  out.mean = s1 / n;
  const Vec var = ((s2 / n) - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0) * (n / (n - 1));
  out.std_error = (var / n).cwiseSqrt();
  out.entropy = h1 / n;
  out.entropy_std_error = std::sqrt(std::max(0.0, h2 / n - out.entropy * out.entropy) / (n - 1));
  out.method = std::string("monte_carlo(") + kRngAlgorithm + ")";
  return out;
}

KsResult ks_test(std::vector<double> draws, const std::function<double(double)>& cdf) {
  if (draws.empty()) throw DomainError("ks_test: no draws");
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double D = 0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double F = cdf(draws[i]);
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  // Kolmogorov series with Stephens' small-sample correction
  const double sn = std::sqrt(n);
  const double lam = (sn + 0.12 + 0.11 / sn) * D;
  double p = 0;
  if (lam < 0.2) {
    p = 1.0;
  } else {
    for (int k = 1; k <= 200; ++k) {
      const double term = std::exp(-2.0 * k * k * lam * lam);
      p += (k % 2 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {D, p};
}

}  // namespace vmp
