#include "vmp/linalg.hpp"

#include <cmath>
#include <sstream>

namespace vmp {

NumericError::NumericError(std::string context, const std::string& what, double rcond)
    : Error(context.empty() ? what : context + ": " + what),
      context_(std::move(context)),
      rcond_(rcond) {}

Vec vec(const Mat& M) {
  if (M.rows() != M.cols())
    throw DimensionError("vec: matrix is " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()) + ", expected square");
  return Eigen::Map<const Vec>(M.data(), M.size());
}

Mat vec_inverse(const Vec& a, Index d) {
  if (d < 0 || a.size() != d * d)
    throw DimensionError("vec_inverse: length " + std::to_string(a.size()) +
                         " is not " + std::to_string(d) + "^2");
  return Eigen::Map<const Mat>(a.data(), d, d);
}

Mat vec_inverse(const Vec& a) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(a.size()))));
  if (d * d != a.size())
    throw DimensionError("vec_inverse: length " + std::to_string(a.size()) +
                         " is not a perfect square");
  return vec_inverse(a, d);
}

Mat symmetrize(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("symmetrize: matrix not square");
  return 0.5 * (M + M.transpose());
}

namespace {

Eigen::LLT<Mat> factor_spd(const Mat& M, const std::string& context, const SolveOptions& opts) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw DimensionError(context + ": expected non-empty square matrix");
  Mat A = symmetrize(M);
  if (!A.allFinite()) throw NumericError(context, "matrix has non-finite entries");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() == Eigen::Success) return llt;
  if (opts.ridge) {
    const double eps = 1e-10 * A.trace() / static_cast<double>(A.rows());
    if (eps > 0) {
      A.diagonal().array() += eps;
      llt.compute(A);
      if (llt.info() == Eigen::Success) return llt;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double amax = ev.cwiseAbs().maxCoeff();
  std::ostringstream os;
  os << "matrix of order " << A.rows() << " is not positive definite (eigenvalue range ["
     << ev.minCoeff() << ", " << ev.maxCoeff() << "])";
  throw NumericError(context, os.str(), amax > 0 ? ev.minCoeff() / amax : 0.0);
}

}  // namespace

Mat spd_inverse(const Mat& M, const std::string& context, const SolveOptions& opts) {
  auto llt = factor_spd(M, context, opts);
  Mat inv = llt.solve(Mat::Identity(M.rows(), M.cols()));
  return symmetrize(inv);
}

double spd_logdet(const Mat& M, const std::string& context, const SolveOptions& opts) {
  auto llt = factor_spd(M, context, opts);
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Mat negdef_inverse(const Mat& S, const std::string& context, const SolveOptions& opts) {
  return -spd_inverse(-S, context, opts);
}

Mat blockdiag(const std::vector<Mat>& blocks) {
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Mat out = Mat::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Mat kron_identity(Index m, const Mat& B) {
  Mat out = Mat::Zero(m * B.rows(), m * B.cols());
  for (Index k = 0; k < m; ++k) out.block(k * B.rows(), k * B.cols(), B.rows(), B.cols()) = B;
  return out;
}

Index mvn_dim(Index length) {
  const auto d = static_cast<Index>(std::llround((-1.0 + std::sqrt(1.0 + 4.0 * length)) / 2.0));
  return (d >= 1 && d + d * d == length) ? d : -1;
}

MvnMoments mvn_moments(const Vec& eta, const std::string& context, const SolveOptions& opts) {
  const Index d = mvn_dim(eta.size());
  if (d < 0) throw DimensionError(context + ": MVN natural parameter has invalid length " +
                                  std::to_string(eta.size()));
  const Vec eta1 = eta.head(d);
  const Mat S = symmetrize(vec_inverse(eta.tail(d * d), d));
  MvnMoments m;
  m.cov = spd_inverse(-2.0 * S, context, opts);
  m.mean = m.cov * eta1;
  m.second = m.cov + m.mean * m.mean.transpose();
  return m;
}

double g_vmp(const Vec& eta, const Mat& Q, const Vec& r, double s, const std::string& context,
             const SolveOptions& opts) {
  const Index d = mvn_dim(eta.size());
  if (d < 0 || Q.rows() != d || Q.cols() != d || r.size() != d)
    throw DimensionError(context + ": g_vmp argument dimensions disagree");
  const Vec v1 = eta.head(d);
  const Mat Sinv = negdef_inverse(symmetrize(vec_inverse(eta.tail(d * d), d)), context, opts);
  const Vec w = Sinv * v1;
  // tr(Q S^{-1} [v1 v1^T S^{-1} - 2I]) = w^T Q w - 2 tr(Q S^{-1})
  const double tr = w.dot(Q * w) - 2.0 * (Q.cwiseProduct(Sinv.transpose())).sum();
  return -0.125 * tr - 0.5 * r.dot(w) - 0.5 * s;
}

}  // namespace vmp
