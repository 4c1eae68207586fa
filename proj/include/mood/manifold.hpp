#pragma once

// The emotion manifold: class centroids in feature space, their classical
// MDS embedding, and the ridge regression from documents to manifold
// coordinates.

#include "mood/common.hpp"
#include "mood/features.hpp"
#include "mood/ridge.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace mood {

struct CentroidTable
{
  std::vector<std::string> labels;
  Eigen::MatrixXd rows; // C x d, row c = mean feature vector of class c
};

/// Row c is the arithmetic mean of the vectors of class c.
inline CentroidTable class_centroids(const Dataset& data)
{
  const std::size_t C = data.num_classes();
  if (C < 2) throw InvalidArgument("class_centroids needs at least 2 classes");
  CentroidTable t{data.classes, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(C),
                                                      static_cast<Eigen::Index>(data.dim))};
  std::vector<std::size_t> counts(C, 0);
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    const auto c = static_cast<Eigen::Index>(data.y[i]);
    ++counts[static_cast<std::size_t>(c)];
    const auto& v = data.x[i];
    for (std::size_t k = 0; k < v.nnz(); ++k)
    {
      if (v.indices[k] >= data.dim) throw InvalidArgument("feature index out of range");
      t.rows(c, v.indices[k]) += v.values[k];
    }
  }
  for (std::size_t c = 0; c < C; ++c)
  {
    if (counts[c] == 0) throw InvalidArgument("class '" + data.classes[c] + "' has no documents");
    t.rows.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }
  return t;
}

struct MdsResult
{
  Eigen::MatrixXd coords;     // C x l
  Eigen::VectorXd eigenvalues; // all C eigenvalues of B, descending
};

/// Classical (Torgerson) MDS of a matrix of Euclidean distances.
///
/// B = -1/2 J D^2 J is eigendecomposed; the top-l eigenpairs give coordinates
/// V_l diag(sqrt(max(lambda, 0))). Axes come in descending eigenvalue order
/// and each axis is flipped so its largest-magnitude coordinate is positive.
inline MdsResult classical_mds(const Eigen::MatrixXd& distances, Eigen::Index l)
{
  const Eigen::Index C = distances.rows();
  if (distances.cols() != C || C < 2) throw InvalidArgument("MDS needs a square matrix with C >= 2");
  if (l < 1 || l > C - 1)
    throw InvalidArgument("embedding dimension " + std::to_string(l) + " outside [1, " +
                          std::to_string(C - 1) + "]");
  if (!distances.allFinite()) throw InvalidArgument("MDS distance matrix is not finite");

  const Eigen::MatrixXd D2 = distances.array().square().matrix();
  const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(C, C) -
                            Eigen::MatrixXd::Constant(C, C, 1.0 / static_cast<double>(C));
  Eigen::MatrixXd B = -0.5 * J * D2 * J;
  B = 0.5 * (B + B.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success) throw NumericalError("MDS eigendecomposition failed");

  MdsResult out;
  out.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();
  const double top = out.eigenvalues(0);
  if (!(top > 1e-14 * std::max(1.0, D2.maxCoeff())) || !(top > 0.0))
    throw InvalidArgument("degenerate MDS input: all points coincide (rank 0)");

  // Eigenvalues this close to zero are rounding noise; their square roots
  // (~1e-8 relative) would otherwise leak into the coordinates.
  const double noise = 1e-12 * top * static_cast<double>(C);
  out.coords.resize(C, l);
  for (Eigen::Index a = 0; a < l; ++a)
  {
    const double lambda = out.eigenvalues(a) > noise ? out.eigenvalues(a) : 0.0;
    Eigen::VectorXd col = V.col(a) * std::sqrt(lambda);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < C; ++i)
      if (std::abs(col(i)) > std::abs(col(arg))) arg = i;
    if (col(arg) < 0.0) col = -col;
    out.coords.col(a) = col;
  }
  return out;
}

/// Pairwise Euclidean distances between the rows of `points`.
inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points)
{
  const Eigen::Index C = points.rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C, C);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = i + 1; j < C; ++j)
      D(i, j) = D(j, i) = (points.row(i) - points.row(j)).norm();
  return D;
}

/// Embeds centroid rows into R^l by classical MDS on their Euclidean distances.
inline Eigen::MatrixXd embed_centroids(const CentroidTable& table, Eigen::Index l)
{
  return classical_mds(pairwise_distances(table.rows), l).coords;
}

struct ManifoldModel
{
  std::vector<std::string> labels;
  Eigen::MatrixXd theta;     // d x l
  Eigen::VectorXd intercept; // l
  Eigen::MatrixXd mu;        // C x l, embedded centroids
  std::uint64_t vocab_fingerprint = 0;
  double ridge = 1e-3;
  /// Isotropic scale of Z|X. Never estimated; kept for the file format.
  std::optional<double> sigma_x;

  Eigen::Index dim() const noexcept { return theta.cols(); }
  Eigen::Index input_dim() const noexcept { return theta.rows(); }
};

struct ManifoldOptions
{
  /// Ambient dimension; 0 means C, clamped to C - 1.
  Eigen::Index dim = 0;
  double ridge = 1e-3;
  RidgeMethod method = RidgeMethod::automatic;
};

inline Eigen::Index resolve_manifold_dim(Eigen::Index requested, std::size_t num_classes)
{
  const auto C = static_cast<Eigen::Index>(num_classes);
  if (requested == 0) return C - 1;
  if (requested < 1 || requested > C - 1)
    throw InvalidArgument("manifold dimension " + std::to_string(requested) + " outside [1, " +
                          std::to_string(C - 1) + "]");
  return requested;
}

/// Regression of documents onto the manifold coordinates of their labels.
inline RidgeFit fit_regression(const Dataset& data, const Eigen::MatrixXd& mu, double ridge,
                               RidgeMethod method = RidgeMethod::automatic)
{
  if (mu.rows() != static_cast<Eigen::Index>(data.num_classes()))
    throw InvalidArgument("manifold has " + std::to_string(mu.rows()) + " centroids but data has " +
                          std::to_string(data.num_classes()) + " classes");
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(data.size()), mu.cols());
  for (std::size_t i = 0; i < data.size(); ++i)
    targets.row(static_cast<Eigen::Index>(i)) = mu.row(data.y[i]);
  return fit_ridge(data.x, data.dim, targets, ridge, method);
}

inline ManifoldModel fit_manifold(const Dataset& data, std::uint64_t vocab_fingerprint,
                                  const ManifoldOptions& opts = {})
{
  const Eigen::Index l = resolve_manifold_dim(opts.dim, data.num_classes());
  const CentroidTable table = class_centroids(data);
  ManifoldModel m;
  m.labels = table.labels;
  m.mu = embed_centroids(table, l);
  RidgeFit fit = fit_regression(data, m.mu, opts.ridge, opts.method);
  m.theta = std::move(fit.weights);
  m.intercept = std::move(fit.intercept);
  m.vocab_fingerprint = vocab_fingerprint;
  m.ridge = opts.ridge;
  return m;
}

inline void check_vocabulary(const SparseVector& x, std::uint64_t fingerprint)
{
  if (x.vocab_id != 0 && fingerprint != 0 && x.vocab_id != fingerprint)
    throw VocabularyMismatch("vocabulary fingerprint mismatch: input " + fingerprint_hex(x.vocab_id) +
                             ", model " + fingerprint_hex(fingerprint));
}

/// theta^T x + b, the mode of Z | X = x.
inline Eigen::VectorXd project(const SparseVector& x, const ManifoldModel& model)
{
  check_vocabulary(x, model.vocab_fingerprint);
  Eigen::VectorXd z = model.intercept;
  for (std::size_t k = 0; k < x.nnz(); ++k)
  {
    if (x.indices[k] >= model.input_dim())
      throw VocabularyMismatch("feature index " + std::to_string(x.indices[k]) +
                               " beyond model vocabulary size " + std::to_string(model.input_dim()));
    z += x.values[k] * model.theta.row(x.indices[k]).transpose();
  }
  return z;
}

struct WeightedTerm
{
  std::string term;
  double weight = 0.0;
};

struct AxisWords
{
  std::vector<WeightedTerm> negative; // most negative first
  std::vector<WeightedTerm> positive; // most positive first
};

/// Terms with the most extreme regression coefficients on one axis.
inline AxisWords axis_top_words(const ManifoldModel& model, const Vocabulary& vocab,
                                Eigen::Index axis, std::size_t k)
{
  if (axis < 0 || axis >= model.dim())
    throw InvalidArgument("axis " + std::to_string(axis) + " out of range [0, " +
                          std::to_string(model.dim()) + ")");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (static_cast<Eigen::Index>(vocab.size()) != model.input_dim() ||
      vocab.fingerprint() != model.vocab_fingerprint)
    throw VocabularyMismatch("vocabulary does not belong to this manifold");

  std::vector<WeightedTerm> all;
  all.reserve(vocab.size());
  for (std::size_t j = 0; j < vocab.size(); ++j)
    all.push_back({vocab.term(j), model.theta(static_cast<Eigen::Index>(j), axis)});
  const std::size_t take = std::min(k, all.size());

  AxisWords out;
  auto asc = all;
  std::sort(asc.begin(), asc.end(), [](const auto& a, const auto& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.term < b.term;
  });
  out.negative.assign(asc.begin(), asc.begin() + static_cast<std::ptrdiff_t>(take));
  auto desc = std::move(all);
  std::sort(desc.begin(), desc.end(), [](const auto& a, const auto& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
  });
  out.positive.assign(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

} // namespace mood
