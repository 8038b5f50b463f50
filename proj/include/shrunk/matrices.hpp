#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shrunk/errors.hpp"

namespace shrunk {

// Dense symmetric matrix. Construction symmetrizes the input as (M + M^T)/2,
// which makes entries(i,j) == entries(j,i) exact in IEEE arithmetic.
template <typename Scalar>
class SymMatrix {
 public:
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& m) {
    static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                  "scalar type mismatch");
    if (m.rows() != m.cols() || m.rows() < 1)
      throw InvalidInput("SymMatrix requires a square matrix with dim >= 1");
    mat_ = (m + m.transpose()) / Scalar(2);
  }

  static SymMatrix Identity(Eigen::Index n) { return SymMatrix(Dense::Identity(n, n)); }
  static SymMatrix Zero(Eigen::Index n) { return SymMatrix(Dense::Zero(n, n)); }

  Eigen::Index dim() const { return mat_.rows(); }
  const Dense& dense() const { return mat_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }
  Scalar trace() const { return mat_.trace(); }
  bool all_finite() const { return mat_.allFinite(); }

  // S + amount * I, preserving exact symmetry.
  SymMatrix shifted(Scalar amount) const {
    SymMatrix out;
    out.mat_ = mat_;
    out.mat_.diagonal().array() += amount;
    return out;
  }

 private:
  Dense mat_;
};

using SymMatrixd = SymMatrix<double>;

// Eigenvalues in ascending order with one eigenvector per column. For the
// generalized problem the columns are orthonormal in the S'-inner product
// instead of the Euclidean one.
template <typename Scalar>
struct EigPair {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

using EigPaird = EigPair<double>;

namespace detail {

// Deterministic sign: the largest-magnitude entry of each column is made
// positive, ties broken by lowest row index.
template <typename Scalar>
void fix_column_signs(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index pivot = 0;
    Scalar best = std::abs(v(0, c));
    for (Eigen::Index r = 1; r < v.rows(); ++r) {
      Scalar a = std::abs(v(r, c));
      if (a > best) {
        best = a;
        pivot = r;
      }
    }
    if (v(pivot, c) < Scalar(0)) v.col(c) = -v.col(c);
  }
}

}  // namespace detail

// Full symmetric eigendecomposition, values ascending, unit eigenvectors.
template <typename Scalar>
EigPair<Scalar> sym_eig(const SymMatrix<Scalar>& s) {
  if (!s.all_finite()) throw InvalidInput("sym_eig: matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<typename SymMatrix<Scalar>::Dense> solver(s.dense());
  if (solver.info() != Eigen::Success)
    throw InvalidInput("sym_eig: eigendecomposition failed to converge");
  EigPair<Scalar> out{solver.eigenvalues(), solver.eigenvectors()};
  detail::fix_column_signs(out.vectors);
  return out;
}

// Solves M * Y = B for symmetric positive definite M via Cholesky.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> spd_solve(
    const SymMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& b) {
  static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                "scalar type mismatch");
  if (b.rows() != m.dim())
    throw InvalidInput("spd_solve: right-hand side row count mismatch");
  if (!m.all_finite() || !b.allFinite())
    throw InvalidInput("spd_solve: non-finite entries");
  Eigen::LLT<typename SymMatrix<Scalar>::Dense> llt(m.dense());
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("spd_solve: Cholesky factorization failed");
  return llt.solve(b.derived());
}

// The d smallest eigenpairs of H w = lambda S' w with S' = S + ridge*(tr(S)/n)*I.
// Solved by whitening through the eigendecomposition of S'; the returned
// vectors satisfy W^T S' W = I.
template <typename Scalar>
EigPair<Scalar> gen_eig_smallest(const SymMatrix<Scalar>& h, const SymMatrix<Scalar>& s,
                                 Eigen::Index d, Scalar ridge) {
  using Dense = typename SymMatrix<Scalar>::Dense;
  const Eigen::Index n = h.dim();
  if (s.dim() != n) throw InvalidInput("gen_eig_smallest: dimension mismatch");
  if (d < 1 || d > n) throw InvalidDimension("gen_eig_smallest: d out of range");
  if (ridge < Scalar(0)) throw InvalidInput("gen_eig_smallest: ridge must be >= 0");

  const Scalar shift = ridge * s.trace() / Scalar(n);
  EigPair<Scalar> sd = sym_eig(s.shifted(shift));
  if (sd.values(0) <= Scalar(0))
    throw NotPositiveDefinite("gen_eig_smallest: metric not positive definite after ridge");

  // T = U * Lambda^{-1/2}; pencil becomes the ordinary problem on T^T H T.
  Dense t = sd.vectors * sd.values.cwiseSqrt().cwiseInverse().asDiagonal();
  EigPair<Scalar> wh = sym_eig(SymMatrix<Scalar>(Dense(t.transpose() * h.dense() * t)));

  EigPair<Scalar> out;
  out.values = wh.values.head(d);
  out.vectors = t * wh.vectors.leftCols(d);
  detail::fix_column_signs(out.vectors);
  return out;
}

// Ridge policy shared by every fit: regularize only when S is numerically
// rank-deficient, i.e. lambda_min < 1e-10 * tr(S)/n. A caller that wants the
// ridge unconditionally passes it to gen_eig_smallest directly.
template <typename Scalar>
Scalar adaptive_ridge(const SymMatrix<Scalar>& s, Scalar requested) {
  EigPair<Scalar> d = sym_eig(s);
  const Scalar threshold = Scalar(1e-10) * s.trace() / Scalar(s.dim());
  return d.values(0) < threshold ? requested : Scalar(0);
}

// Principal angles (ascending, radians) between the column spans of a and b.
// Small angles come from the sine route, which stays accurate where the
// cosine saturates at 1 - eps.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> principal_angles(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() != b.rows()) throw InvalidInput("principal_angles: row count mismatch");
  if (a.cols() == 0 || b.cols() == 0) throw InvalidInput("principal_angles: empty basis");
  auto orthonormalize = [](const Dense& m) {
    Eigen::HouseholderQR<Dense> qr(m);
    return Dense(qr.householderQ() * Dense::Identity(m.rows(), m.cols()));
  };
  Dense qa = orthonormalize(a);
  Dense qb = orthonormalize(b);
  Dense cross = qa.transpose() * qb;

  Eigen::JacobiSVD<Dense> cos_svd(cross);
  auto cos_sv = cos_svd.singularValues();  // descending -> angles ascending
  Eigen::JacobiSVD<Dense> sin_svd(Dense(qb - qa * cross));
  auto sin_desc = sin_svd.singularValues();

  const Eigen::Index p = cos_sv.size();
  std::vector<Scalar> sin_asc(sin_desc.data(), sin_desc.data() + sin_desc.size());
  std::sort(sin_asc.begin(), sin_asc.end());

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> angles(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Scalar c = std::clamp(cos_sv(i), Scalar(-1), Scalar(1));
    if (c * c >= Scalar(0.5) && i < static_cast<Eigen::Index>(sin_asc.size()))
      angles(i) = std::asin(std::clamp(sin_asc[static_cast<size_t>(i)], Scalar(0), Scalar(1)));
    else
      angles(i) = std::acos(c);
  }
  return angles;
}

}  // namespace shrunk
