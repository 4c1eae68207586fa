#pragma once

// Review ratings through the emotion manifold: per-rating Gaussians on the
// projected documents, a Bayes-rule rating predictor and the curve of
// rating centroids.

#include "mood/classify.hpp"
#include "mood/features.hpp"
#include "mood/gaussian.hpp"
#include "mood/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace mood {

struct SentimentModel
{
  std::vector<int> levels; // ascending
  GaussianClassModel gaussians;
  ManifoldModel manifold;
  /// Set when every level mean coincides (e.g. identical documents).
  bool degenerate = false;
};

/// `data.classes` must be the decimal rating levels in ascending order, as
/// produced by make_dataset on a rating corpus. The manifold stays fixed.
inline SentimentModel fit_sentiment(const Dataset& data, const ManifoldModel& manifold, const CovarianceSpec& spec)
{
  if (data.num_classes() < 1) throw InvalidArgument("fit_sentiment: no rating levels");
  SentimentModel m;
  for (const auto& c : data.classes) m.levels.push_back(std::stoi(c));
  for (std::size_t i = 1; i < m.levels.size(); ++i)
    if (m.levels[i] <= m.levels[i - 1]) throw InvalidArgument("fit_sentiment: rating levels must ascend");
  const auto counts = data.class_counts();
  for (std::size_t r = 0; r < counts.size(); ++r)
    if (counts[r] < 2)
      throw InvalidArgument("rating level " + data.classes[r] + " has " + std::to_string(counts[r]) +
                            " document(s); needs at least 2");

  const Eigen::MatrixXd z = project_all(data.x, manifold);
  m.gaussians = fit_class_gaussians(z, data.y, data.classes, spec);
  m.manifold = manifold;

  const auto& mu = m.gaussians.means();
  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  m.degenerate = mu.rows() > 1;
  for (Eigen::Index r = 1; r < mu.rows() && m.degenerate; ++r)
    if ((mu.row(r) - mu.row(0)).norm() > 1e-12 * scale) m.degenerate = false;
  return m;
}

/// argmax_r [log p(r) + log N(z*; mu_r, Sigma_r)]; ties go to the lower rating.
inline int predict_rating(const SentimentModel& model, const SparseVector& x)
{
  const Eigen::VectorXd z = project(x, model.manifold);
  std::size_t best = 0;
  double best_s = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < model.levels.size(); ++r)
  {
    const double s = model.gaussians.log_prior(r) + model.gaussians.log_density(r, z);
    if (s > best_s)
    {
      best_s = s;
      best = r;
    }
  }
  return model.levels[best];
}

struct CurvePoint
{
  int rating = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Per-level mean projections on two manifold axes, by ascending rating.
inline std::vector<CurvePoint> rating_curve(const SentimentModel& model, std::size_t axis_x, std::size_t axis_y)
{
  const auto l = static_cast<std::size_t>(model.gaussians.dim());
  if (l < 2) throw InvalidArgument("rating_curve needs a manifold of dimension >= 2");
  if (axis_x >= l || axis_y >= l)
    throw InvalidArgument("rating_curve: axes out of range [0, " + std::to_string(l) + ")");
  std::vector<CurvePoint> out;
  for (std::size_t r = 0; r < model.levels.size(); ++r)
  {
    const auto row = static_cast<Eigen::Index>(r);
    out.push_back({model.levels[r], model.gaussians.means()(row, static_cast<Eigen::Index>(axis_x)),
                   model.gaussians.means()(row, static_cast<Eigen::Index>(axis_y))});
  }
  return out;
}

} // namespace mood
