#pragma once

// Multi-response ridge regression with an unpenalized intercept on sparse
// design matrices:
//
//   minimize  sum_i || W^T x_i + b - y_i ||^2 + ridge * ||W||_F^2
//
// Solved on centered data, via the primal normal equations (d x d), the dual
// system (n x n) or matrix-free conjugate gradients, whichever is smallest.

#include "mood/common.hpp"
#include "mood/features.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <string>
#include <vector>

namespace mood {

enum class RidgeMethod
{
  automatic,
  primal,
  dual,
  conjugate_gradient
};

struct RidgeFit
{
  Eigen::MatrixXd weights;   // d x k
  Eigen::VectorXd intercept; // k
  RidgeMethod method = RidgeMethod::automatic;
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Stacks sparse vectors as rows of an n x dim matrix. Indices must be < dim.
inline SparseRows to_sparse_rows(const std::vector<SparseVector>& rows, std::size_t dim)
{
  std::vector<Eigen::Triplet<double>> trip;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.nnz();
  trip.reserve(nnz);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].nnz(); ++k)
    {
      if (rows[i].indices[k] >= dim)
        throw InvalidArgument("feature index " + std::to_string(rows[i].indices[k]) +
                              " out of range for dimension " + std::to_string(dim));
      trip.emplace_back(static_cast<int>(i), static_cast<int>(rows[i].indices[k]),
                        rows[i].values[k]);
    }
  SparseRows m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace detail {

inline void check_not_singular(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, double ridge)
{
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const bool singular =
      ldlt.info() != Eigen::Success || !(dmax > 0.0) || d.minCoeff() <= 1e-12 * dmax;
  if (singular)
  {
    if (ridge == 0.0)
      throw NumericalError("least-squares system is singular with ridge = 0; set ridge > 0");
    throw NumericalError("least-squares system is numerically singular");
  }
}

inline Eigen::MatrixXd solve_cg(const SparseRows& X, const Eigen::VectorXd& xbar,
                                const Eigen::MatrixXd& rhs, double ridge, double tol)
{
  const auto n = static_cast<double>(X.rows());
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd xv = X * v;
    Eigen::VectorXd out = X.transpose() * xv;
    out -= (n * xbar.dot(v)) * xbar;
    out += ridge * v;
    return out;
  };

  const Eigen::Index d = X.cols();
  Eigen::MatrixXd sol = Eigen::MatrixXd::Zero(d, rhs.cols());
  const Eigen::Index max_iter = 20 * d + 100;
  for (Eigen::Index c = 0; c < rhs.cols(); ++c)
  {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd r = rhs.col(c);
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    const double stop = std::max(tol, 1e-14 * std::sqrt(rr));
    Eigen::Index it = 0;
    while (std::sqrt(rr) > stop)
    {
      if (++it > max_iter)
        throw NumericalError("conjugate gradient did not converge (residual " +
                             std::to_string(std::sqrt(rr)) + ")" +
                             (ridge == 0.0 ? "; set ridge > 0" : ""));
      const Eigen::VectorXd ap = apply(p);
      const double pap = p.dot(ap);
      if (!(pap > 0.0))
        throw NumericalError("least-squares system is singular with ridge = " +
                             std::to_string(ridge) + "; set ridge > 0");
      const double alpha = rr / pap;
      x += alpha * p;
      r -= alpha * ap;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    sol.col(c) = x;
  }
  return sol;
}

} // namespace detail

/// `targets` is n x k. `cg_tolerance` bounds the residual norm of the
/// normal equations when the conjugate-gradient path is used.
inline RidgeFit fit_ridge(const SparseRows& X, const Eigen::MatrixXd& targets, double ridge,
                          RidgeMethod method = RidgeMethod::automatic,
                          double cg_tolerance = 1e-8)
{
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n == 0) throw InvalidArgument("ridge regression needs at least one sample");
  if (targets.rows() != n) throw InvalidArgument("targets row count does not match samples");
  if (!targets.allFinite()) throw InvalidArgument("non-finite regression targets");

  const double nd = static_cast<double>(n);
  const Eigen::VectorXd xbar = (X.transpose() * Eigen::VectorXd::Ones(n)) / nd;
  const Eigen::RowVectorXd ybar = targets.colwise().mean();
  const Eigen::MatrixXd Yc = targets.rowwise() - ybar;

  constexpr Eigen::Index direct_limit = 3000;
  if (method == RidgeMethod::automatic)
  {
    if (d <= n && d <= direct_limit) method = RidgeMethod::primal;
    else if (n <= direct_limit) method = RidgeMethod::dual;
    else if (d <= direct_limit) method = RidgeMethod::primal;
    else method = RidgeMethod::conjugate_gradient;
  }

  RidgeFit fit;
  fit.method = method;
  Eigen::MatrixXd rhs = X.transpose() * Yc; // X_c^T Y_c == X^T Y_c
  switch (method)
  {
  case RidgeMethod::primal: {
    Eigen::MatrixXd A = Eigen::MatrixXd(X.transpose() * X);
    A.noalias() -= nd * xbar * xbar.transpose();
    A.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    detail::check_not_singular(ldlt, ridge);
    fit.weights = ldlt.solve(rhs);
    break;
  }
  case RidgeMethod::dual: {
    if (ridge == 0.0)
      throw NumericalError("dual least-squares system is singular with ridge = 0; set ridge > 0");
    // K_c = H X X^T H with H the centering projector.
    Eigen::MatrixXd K = Eigen::MatrixXd(X * X.transpose());
    const Eigen::VectorXd rowmean = K.rowwise().mean();
    const double grand = rowmean.mean();
    K.colwise() -= rowmean;
    K.rowwise() -= rowmean.transpose();
    K.array() += grand;
    K.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    detail::check_not_singular(ldlt, ridge);
    const Eigen::MatrixXd alpha = ldlt.solve(Yc);
    fit.weights = X.transpose() * alpha;
    fit.weights.noalias() -= xbar * alpha.colwise().sum();
    break;
  }
  case RidgeMethod::conjugate_gradient:
    fit.weights = detail::solve_cg(X, xbar, rhs, ridge, cg_tolerance);
    break;
  case RidgeMethod::automatic: break;
  }
  if (!fit.weights.allFinite()) throw NumericalError("ridge regression produced non-finite weights");
  fit.intercept = ybar.transpose() - fit.weights.transpose() * xbar;
  return fit;
}

inline RidgeFit fit_ridge(const std::vector<SparseVector>& x, std::size_t dim,
                          const Eigen::MatrixXd& targets, double ridge,
                          RidgeMethod method = RidgeMethod::automatic)
{
  return fit_ridge(to_sparse_rows(x, dim), targets, ridge, method);
}

} // namespace mood
