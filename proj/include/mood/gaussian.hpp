#pragma once

// Class-conditional Gaussians on the manifold with shrinkage covariance,
// log densities, and Bhattacharyya / Hellinger distances.

#include "mood/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace mood {

enum class CovarianceStructure
{
  diagonal,
  full
};

enum class CovariancePooling
{
  pooled,   // LDA
  per_class // QDA
};

inline const char* to_string(CovarianceStructure s)
{
  return s == CovarianceStructure::diagonal ? "diagonal" : "full";
}

inline const char* to_string(CovariancePooling p)
{
  return p == CovariancePooling::pooled ? "pooled" : "per-class";
}

inline CovarianceStructure parse_structure(const std::string& s)
{
  if (s == "diagonal" || s == "diag") return CovarianceStructure::diagonal;
  if (s == "full") return CovarianceStructure::full;
  throw InvalidArgument("unknown covariance structure '" + s + "' (expected diagonal|full)");
}

inline CovariancePooling parse_pooling(const std::string& s)
{
  if (s == "pooled" || s == "lda") return CovariancePooling::pooled;
  if (s == "per-class" || s == "qda") return CovariancePooling::per_class;
  throw InvalidArgument("unknown covariance pooling '" + s + "' (expected pooled|per-class)");
}

struct CovarianceSpec
{
  CovarianceStructure structure = CovarianceStructure::full;
  CovariancePooling pooling = CovariancePooling::pooled;
  /// Weight of the spherical target in (1 - lambda) S + lambda * t * I.
  double lambda = 0.1;
  /// Diagonal ridge. When unset, 1e-6 * trace(S) / l of the raw estimate.
  std::optional<double> epsilon;
  /// Spherical target t = trace(S) / l instead of trace(S).
  bool normalize_trace = false;

  void validate() const
  {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0,1]");
    if (epsilon && !(*epsilon >= 0.0 && std::isfinite(*epsilon)))
      throw InvalidArgument("epsilon must be >= 0");
  }
};

/// Maximum-likelihood covariance made usable: optional diagonal restriction,
/// shrinkage towards trace(S) * I (or trace(S)/l * I), then a diagonal ridge.
inline Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& raw, const CovarianceSpec& spec)
{
  const auto l = static_cast<double>(raw.rows());
  Eigen::MatrixXd S = raw;
  if (spec.structure == CovarianceStructure::diagonal)
    S = Eigen::MatrixXd(raw.diagonal().asDiagonal());
  const double trace = S.trace();
  const double target = spec.normalize_trace ? trace / l : trace;
  S *= (1.0 - spec.lambda);
  S.diagonal().array() += spec.lambda * target;
  double eps = spec.epsilon ? *spec.epsilon : 1e-6 * trace / l;
  // All points coincident: keep the matrix invertible.
  if (!spec.epsilon && !(eps > 0.0)) eps = 1e-12;
  S.diagonal().array() += eps;
  return S;
}

/// A multivariate normal with cached Cholesky factor.
class Gaussian
{
public:
  Gaussian() = default;

  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov))
  {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw InvalidArgument("Gaussian: covariance shape does not match mean");
    if (!mean_.allFinite() || !cov_.allFinite()) throw InvalidArgument("Gaussian: non-finite parameters");
    llt_.compute(cov_);
    if (llt_.info() != Eigen::Success) return;
    const Eigen::VectorXd diag = llt_.matrixL().toDenseMatrix().diagonal();
    if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) return;
    log_det_ = 2.0 * diag.array().log().sum();
    positive_definite_ = std::isfinite(log_det_);
  }

  /// Densities and distances are only defined when this holds.
  bool positive_definite() const noexcept { return positive_definite_; }

  void require_positive_definite() const
  {
    if (!positive_definite_)
      throw NumericalError("covariance is not positive definite (add a diagonal ridge)");
  }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  double log_det() const noexcept { return log_det_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

  /// (z - mu)^T Sigma^-1 (z - mu)
  double mahalanobis_sq(const Eigen::VectorXd& z) const
  {
    require_positive_definite();
    const Eigen::VectorXd w = llt_.matrixL().solve(z - mean_);
    return w.squaredNorm();
  }

  double log_pdf(const Eigen::VectorXd& z) const
  {
    if (z.size() != dim()) throw InvalidArgument("point dimension does not match Gaussian");
    constexpr double log_2pi = 1.8378770664093454835606594728112;
    return -0.5 * (static_cast<double>(dim()) * log_2pi + log_det_ + mahalanobis_sq(z));
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
  bool positive_definite_ = false;
};

/// Per-class Gaussians N(mu_y, Sigma_y) with class priors.
class GaussianClassModel
{
public:
  GaussianClassModel() = default;

  /// `covariances` holds one matrix (pooled) or one per class.
  GaussianClassModel(std::vector<std::string> labels, Eigen::MatrixXd means,
                     std::vector<Eigen::MatrixXd> covariances, Eigen::VectorXd priors,
                     CovarianceSpec spec)
      : labels_(std::move(labels)), means_(std::move(means)), covs_(std::move(covariances)),
        priors_(std::move(priors)), spec_(spec)
  {
    const auto C = static_cast<Eigen::Index>(labels_.size());
    if (C < 1 || means_.rows() != C || priors_.size() != C)
      throw InvalidArgument("GaussianClassModel: inconsistent class counts");
    const std::size_t want = spec_.pooling == CovariancePooling::pooled ? 1 : labels_.size();
    if (covs_.size() != want)
      throw InvalidArgument("GaussianClassModel: expected " + std::to_string(want) + " covariance(s)");
    if (std::abs(priors_.sum() - 1.0) > 1e-12 || (priors_.array() < 0.0).any())
      throw InvalidArgument("GaussianClassModel: priors must be a distribution");
    log_priors_ = priors_.array().log();
    for (Eigen::Index c = 0; c < C; ++c)
      gaussians_.emplace_back(means_.row(c).transpose(), covariance(static_cast<std::size_t>(c)));
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t num_classes() const noexcept { return labels_.size(); }
  Eigen::Index dim() const noexcept { return means_.cols(); }
  const Eigen::MatrixXd& means() const noexcept { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const noexcept { return covs_; }
  const Eigen::VectorXd& priors() const noexcept { return priors_; }
  const CovarianceSpec& spec() const noexcept { return spec_; }

  const Eigen::MatrixXd& covariance(std::size_t c) const
  {
    return spec_.pooling == CovariancePooling::pooled ? covs_.front() : covs_.at(c);
  }

  const Gaussian& gaussian(std::size_t c) const { return gaussians_.at(c); }

  std::size_t index_of(const std::string& label) const
  {
    for (std::size_t c = 0; c < labels_.size(); ++c)
      if (labels_[c] == label) return c;
    throw InvalidArgument("unknown label '" + label + "'");
  }

  double log_density(std::size_t c, const Eigen::VectorXd& z) const
  {
    if (c >= labels_.size()) throw InvalidArgument("class index out of range");
    if (!z.allFinite()) throw InvalidArgument("log_density: non-finite point");
    return gaussians_[c].log_pdf(z);
  }

  double log_density(const std::string& label, const Eigen::VectorXd& z) const
  {
    return log_density(index_of(label), z);
  }

  double log_prior(std::size_t c) const { return log_priors_(static_cast<Eigen::Index>(c)); }

private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd means_;
  std::vector<Eigen::MatrixXd> covs_;
  Eigen::VectorXd priors_;
  Eigen::VectorXd log_priors_;
  CovarianceSpec spec_;
  std::vector<Gaussian> gaussians_;
};

/// Fits class means, ML covariances (divide by n) and frequency priors.
/// `points` is n x l; `y` holds class indices into `labels`.
inline GaussianClassModel fit_class_gaussians(const Eigen::MatrixXd& points, const std::vector<int>& y,
                                              const std::vector<std::string>& labels,
                                              const CovarianceSpec& spec)
{
  spec.validate();
  const auto n = points.rows();
  const auto l = points.cols();
  const auto C = static_cast<Eigen::Index>(labels.size());
  if (l < 1) throw InvalidArgument("fit_class_gaussians: dimension must be >= 1");
  if (static_cast<Eigen::Index>(y.size()) != n) throw InvalidArgument("fit_class_gaussians: label count mismatch");
  if (!points.allFinite()) throw InvalidArgument("fit_class_gaussians: non-finite inputs");

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(C);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(C, l);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const int c = y[static_cast<std::size_t>(i)];
    if (c < 0 || c >= C) throw InvalidArgument("fit_class_gaussians: class index out of range");
    counts(c) += 1.0;
    means.row(c) += points.row(i);
  }
  const double min_count = spec.pooling == CovariancePooling::per_class ? 2.0 : 1.0;
  for (Eigen::Index c = 0; c < C; ++c)
  {
    if (counts(c) < min_count)
      throw InvalidArgument("class '" + labels[static_cast<std::size_t>(c)] + "' has " +
                            std::to_string(static_cast<int>(counts(c))) + " point(s); needs at least " +
                            std::to_string(static_cast<int>(min_count)));
    means.row(c) /= counts(c);
  }

  std::vector<Eigen::MatrixXd> scatter(static_cast<std::size_t>(C), Eigen::MatrixXd::Zero(l, l));
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const int c = y[static_cast<std::size_t>(i)];
    const Eigen::RowVectorXd dv = points.row(i) - means.row(c);
    scatter[static_cast<std::size_t>(c)].noalias() += dv.transpose() * dv;
  }

  std::vector<Eigen::MatrixXd> covs;
  if (spec.pooling == CovariancePooling::pooled)
  {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(l, l);
    for (const auto& s : scatter) total += s;
    covs.push_back(regularize_covariance(total / static_cast<double>(n), spec));
  }
  else
    for (Eigen::Index c = 0; c < C; ++c)
      covs.push_back(regularize_covariance(scatter[static_cast<std::size_t>(c)] / counts(c), spec));

  return GaussianClassModel(labels, std::move(means), std::move(covs), counts / static_cast<double>(n), spec);
}

/// Closed-form Bhattacharyya distance -log \int sqrt(f g) between two
/// Gaussians:
///   1/8 d^T S^-1 d + 1/2 log(det S / sqrt(det S1 det S2)),  S = (S1 + S2)/2.
inline double bhattacharyya(const Gaussian& a, const Gaussian& b)
{
  if (a.dim() != b.dim()) throw InvalidArgument("bhattacharyya: dimension mismatch");
  a.require_positive_definite();
  b.require_positive_definite();
  const Eigen::MatrixXd avg = 0.5 * (a.cov() + b.cov());
  Eigen::LLT<Eigen::MatrixXd> llt(avg);
  if (llt.info() != Eigen::Success)
    throw NumericalError("bhattacharyya: average covariance is singular (add a diagonal ridge)");
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0))
    throw NumericalError("bhattacharyya: average covariance is singular (add a diagonal ridge)");
  const double log_det_avg = 2.0 * diag.array().log().sum();
  const Eigen::VectorXd w = llt.matrixL().solve(a.mean() - b.mean());
  const double B = 0.125 * w.squaredNorm() + 0.5 * (log_det_avg - 0.5 * (a.log_det() + b.log_det()));
  return B > 0.0 ? B : 0.0;
}

/// Squared Hellinger distance \int (sqrt f - sqrt g)^2 = 2 (1 - exp(-B)).
inline double hellinger_sq(const Gaussian& a, const Gaussian& b)
{
  return -2.0 * std::expm1(-bhattacharyya(a, b));
}

/// Symmetric C x C matrix of Bhattacharyya distances between classes.
inline Eigen::MatrixXd bhattacharyya_matrix(const GaussianClassModel& model)
{
  const auto C = static_cast<Eigen::Index>(model.num_classes());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C, C);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = i + 1; j < C; ++j)
      D(i, j) = D(j, i) = bhattacharyya(model.gaussian(static_cast<std::size_t>(i)),
                                        model.gaussian(static_cast<std::size_t>(j)));
  return D;
}

} // namespace mood
