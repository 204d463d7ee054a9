#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Raised when common parameters or expectations are requested from a
// non-normalizable natural parameter vector.
class ImproperError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(std::string context, const std::string& what,
               double rcond = std::numeric_limits<double>::quiet_NaN());
  const std::string& context() const noexcept { return context_; }
  double rcond() const noexcept { return rcond_; }

 private:
  std::string context_;
  double rcond_;
};

struct SolveOptions {
  // On factorization failure retry once with eps = 1e-10 * trace / d added
  // to the diagonal.
  bool ridge = false;
};

Vec vec(const Mat& M);
Mat vec_inverse(const Vec& a, Index d);
Mat vec_inverse(const Vec& a);
Mat symmetrize(const Mat& M);

// Inverse and log-determinant of a symmetric positive definite matrix.
Mat spd_inverse(const Mat& M, const std::string& context, const SolveOptions& opts = {});
double spd_logdet(const Mat& M, const std::string& context, const SolveOptions& opts = {});
// S^{-1} for symmetric negative definite S, computed as -(-S)^{-1}.
Mat negdef_inverse(const Mat& S, const std::string& context, const SolveOptions& opts = {});

Mat blockdiag(const std::vector<Mat>& blocks);
Mat kron_identity(Index m, const Mat& B);

// d such that d + d^2 == length, or -1.
Index mvn_dim(Index length);

struct MvnMoments {
  Vec mean;
  Mat cov;
  Mat second;  // E(theta theta^T)
};

MvnMoments mvn_moments(const Vec& eta, const std::string& context = "",
                       const SolveOptions& opts = {});

// E{-0.5 (theta^T Q theta - 2 r^T theta + s)} for theta with MVN natural
// parameter eta.
double g_vmp(const Vec& eta, const Mat& Q, const Vec& r, double s,
             const std::string& context = "", const SolveOptions& opts = {});

}  // namespace vmp
