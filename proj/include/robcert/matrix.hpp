#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>
#include <string>
#include <vector>

namespace robcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative threshold below which singular values are treated as zero.
inline constexpr double kDefaultRankTol = 1e-9;

/// Symmetric matrix with a validated symmetry invariant:
/// max|S - S^T| <= 1e-12 (1 + max|S|).
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw std::invalid_argument("SymMat: matrix is not square");
    }
    const double scale = 1.0 + m_.cwiseAbs().maxCoeff();
    const double skew = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * scale) {
      throw std::invalid_argument("SymMat: asymmetry " + std::to_string(skew) +
                                  " exceeds tolerance");
    }
    m_ = 0.5 * (m_ + m_.transpose().eval());
  }

  /// Builds from an arbitrary square matrix by averaging with its transpose.
  static SymMat symmetrize(const Mat& m) {
    return SymMat(Mat(0.5 * (m + m.transpose())));
  }

  const Mat& mat() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  Mat m_;
};

/// Kronecker product a (x) b, (rows_a rows_b) x (cols_a cols_b).
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Matrix exponential (scaling-and-squaring with Pade approximation).
inline Mat expm(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  return a.exp();
}

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// tol * sigma_max are treated as zero.
inline Mat pinv(const Mat& a, double tol = kDefaultRankTol) {
  if (a.size() == 0) return Mat(a.cols(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() > 0 ? sv(0) : 0.0);
  Vec inv_sv = Vec::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

/// Orthonormal basis of the (numerical) kernel {x : a x ~ 0}: right singular
/// vectors whose singular values satisfy sigma_i <= tol * sigma_max.
/// Returns an n x k matrix, possibly with k = 0.
inline Mat kernelBasis(const Mat& a, double tol = kDefaultRankTol) {
  if (a.rows() == 0) return Mat::Identity(a.cols(), a.cols());
  if (a.cols() == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() > 0 ? sv(0) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  }
  const Index k = a.cols() - rank;
  return svd.matrixV().rightCols(k);
}

struct EigResult {
  Vec values;   // ascending
  Mat vectors;  // orthogonal, columns are eigenvectors
};

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
inline EigResult symEig(const SymMat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.mat());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("symEig: eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Minimum eigenvalue of the symmetric part of m.
inline double minEig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (m + m.transpose())),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double maxEig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (m + m.transpose())),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Spectral radius of a general square matrix.
inline double spectralRadius(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Reciprocal condition number estimate via SVD (0 for singular/empty).
inline double rcond(const Mat& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

/// Horizontal concatenation; all inputs must have equal row counts.
inline Mat hcat(const std::vector<Mat>& parts) {
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    if (p.size() > 0 || p.rows() > 0) rows = std::max(rows, p.rows());
    cols += p.cols();
  }
  Mat out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    if (p.cols() > 0) {
      if (p.rows() != rows) throw std::invalid_argument("hcat: row mismatch");
      out.middleCols(at, p.cols()) = p;
    }
    at += p.cols();
  }
  return out;
}

/// Vertical concatenation; all inputs must have equal column counts.
inline Mat vcat(const std::vector<Mat>& parts) {
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    if (p.size() > 0 || p.cols() > 0) cols = std::max(cols, p.cols());
    rows += p.rows();
  }
  Mat out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    if (p.rows() > 0) {
      if (p.cols() != cols) throw std::invalid_argument("vcat: col mismatch");
      out.middleRows(at, p.rows()) = p;
    }
    at += p.rows();
  }
  return out;
}

/// Block-diagonal assembly.
inline Mat blkdiag(const std::vector<Mat>& parts) {
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    rows += p.rows();
    cols += p.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& p : parts) {
    out.block(r, c, p.rows(), p.cols()) = p;
    r += p.rows();
    c += p.cols();
  }
  return out;
}

}  // namespace robcert
