#pragma once

// Bag-of-words baselines: one-vs-all L2-regularized logistic regression for
// emotions and ridge linear regression for ratings.

#include "mood/common.hpp"
#include "mood/features.hpp"
#include "mood/ridge.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mood {

struct LbfgsOptions
{
  double gradient_tolerance = 1e-6;
  int max_iterations = 5000;
  int memory = 10;
};

struct LbfgsResult
{
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::vector<double> history; // objective after each accepted step, starting at x0
};

/// Limited-memory BFGS with Armijo backtracking. `objective` returns f(x)
/// and writes the gradient. Every accepted step decreases f.
inline LbfgsResult minimize_lbfgs(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& objective,
                                  Eigen::VectorXd x0, const LbfgsOptions& opts = {})
{
  LbfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(res.x.size());
  double f = objective(res.x, g);
  res.history.push_back(f);
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;

  for (int it = 0; it < opts.max_iterations; ++it)
  {
    res.gradient_norm = g.norm();
    if (res.gradient_norm <= opts.gradient_tolerance)
    {
      res.value = f;
      res.iterations = it;
      return res;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (std::size_t k = S.size(); k-- > 0;)
    {
      alpha[k] = rho[k] * S[k].dot(q);
      q -= alpha[k] * Y[k];
    }
    if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t k = 0; k < S.size(); ++k)
    {
      const double beta = rho[k] * Y[k].dot(q);
      q += (alpha[k] - beta) * S[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0))
    {
      S.clear();
      Y.clear();
      rho.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = S.empty() ? std::min(1.0, 1.0 / res.gradient_norm) : 1.0;
    Eigen::VectorXd x_new, g_new(g.size());
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls)
    {
      x_new = res.x + step * dir;
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope)
      {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || !(f_new <= f))
    {
      // No further decrease representable; report where we stopped.
      res.value = f;
      res.iterations = it;
      res.gradient_norm = g.norm();
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm())
    {
      S.push_back(std::move(s));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory)
      {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    res.x = std::move(x_new);
    g = g_new;
    f = f_new;
    res.history.push_back(f);
  }
  res.value = f;
  res.gradient_norm = g.norm();
  res.iterations = opts.max_iterations;
  return res;
}

/// Mean binary logistic loss of (w, b) on labels s_i in {-1, +1} plus
/// reg/2 ||w||^2. The parameter vector is [w; b]; b is unpenalized.
class LogisticObjective
{
public:
  LogisticObjective(const SparseRows& X, Eigen::VectorXd signs, double reg)
      : X_(X), s_(std::move(signs)), reg_(reg)
  {}

  double operator()(const Eigen::VectorXd& p, Eigen::VectorXd& grad) const
  {
    const Eigen::Index d = X_.cols();
    const auto n = static_cast<double>(X_.rows());
    const auto w = p.head(d);
    const double b = p(d);
    const Eigen::VectorXd margin = ((X_ * w).array() + b).matrix().cwiseProduct(s_);
    double loss = 0.0;
    Eigen::VectorXd coef(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i)
    {
      const double m = margin(i);
      // log(1 + exp(-m)) and its derivative -sigma(-m), computed stably.
      if (m > 0)
      {
        const double e = std::exp(-m);
        loss += std::log1p(e);
        coef(i) = -s_(i) * e / (1.0 + e);
      }
      else
      {
        const double e = std::exp(m);
        loss += -m + std::log1p(e);
        coef(i) = -s_(i) / (1.0 + e);
      }
    }
    grad.resize(d + 1);
    grad.head(d) = (X_.transpose() * coef) / n + reg_ * w;
    grad(d) = coef.sum() / n;
    return loss / n + 0.5 * reg_ * w.squaredNorm();
  }

private:
  const SparseRows& X_;
  Eigen::VectorXd s_;
  double reg_;
};

struct LogRegOvaModel
{
  std::vector<std::string> labels;
  Eigen::MatrixXd weights; // d x C
  Eigen::VectorXd bias;    // C
  double reg = 1.0;
  std::uint64_t vocab_fingerprint = 0;
};

struct LogRegOptions
{
  double reg = 1e-2;
  LbfgsOptions lbfgs;
  std::size_t threads = 1;
};

struct LogRegDiagnostics
{
  std::vector<double> gradient_norms;
  std::vector<std::vector<double>> loss_histories;
};

/// One L2-regularized logistic regression per class (class vs. rest),
/// initialized at zero.
inline LogRegOvaModel fit_logreg_ova(const Dataset& data, std::uint64_t vocab_fingerprint, const LogRegOptions& opts,
                                     LogRegDiagnostics* diagnostics = nullptr)
{
  const std::size_t C = data.num_classes();
  if (C < 2) throw InvalidArgument("fit_logreg_ova needs at least 2 classes");
  if (!(opts.reg > 0.0) || !std::isfinite(opts.reg)) throw InvalidArgument("logistic regularization must be > 0");
  const SparseRows X = to_sparse_rows(data.x, data.dim);
  const auto d = static_cast<Eigen::Index>(data.dim);

  LogRegOvaModel model;
  model.labels = data.classes;
  model.weights = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(C));
  model.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(C));
  model.reg = opts.reg;
  model.vocab_fingerprint = vocab_fingerprint;

  std::vector<LbfgsResult> results(C);
  parallel_for(C, opts.threads, [&](std::size_t c) {
    Eigen::VectorXd signs(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      signs(i) = data.y[static_cast<std::size_t>(i)] == static_cast<int>(c) ? 1.0 : -1.0;
    const LogisticObjective obj(X, std::move(signs), opts.reg);
    results[c] = minimize_lbfgs(std::cref(obj), Eigen::VectorXd::Zero(d + 1), opts.lbfgs);
  });

  for (std::size_t c = 0; c < C; ++c)
  {
    const auto& r = results[c];
    if (r.gradient_norm > opts.lbfgs.gradient_tolerance)
      throw NumericalError("logistic regression for class '" + data.classes[c] +
                           "' did not converge (gradient norm " + std::to_string(r.gradient_norm) + ")");
    model.weights.col(static_cast<Eigen::Index>(c)) = r.x.head(d);
    model.bias(static_cast<Eigen::Index>(c)) = r.x(d);
    if (diagnostics)
    {
      diagnostics->gradient_norms.push_back(r.gradient_norm);
      diagnostics->loss_histories.push_back(r.history);
    }
  }
  return model;
}

inline Eigen::VectorXd logreg_scores(const LogRegOvaModel& model, const SparseVector& x)
{
  if (x.vocab_id != 0 && model.vocab_fingerprint != 0 && x.vocab_id != model.vocab_fingerprint)
    throw VocabularyMismatch("vocabulary fingerprint mismatch: input " + fingerprint_hex(x.vocab_id) + ", model " +
                             fingerprint_hex(model.vocab_fingerprint));
  Eigen::VectorXd s = model.bias;
  for (std::size_t k = 0; k < x.nnz(); ++k)
  {
    if (x.indices[k] >= model.weights.rows()) throw VocabularyMismatch("feature index beyond model vocabulary");
    s += x.values[k] * model.weights.row(x.indices[k]).transpose();
  }
  return s;
}

/// Class with the largest linear score; ties go to the smaller index.
inline std::size_t predict_logreg(const LogRegOvaModel& model, const SparseVector& x)
{
  const Eigen::VectorXd s = logreg_scores(model, x);
  std::size_t best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c)
    if (s(c) > s(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(c);
  return best;
}

struct LinRegModel
{
  Eigen::VectorXd weights;
  double bias = 0.0;
  double reg = 1.0;
  std::vector<int> levels; // ascending; predictions are clamped to [front, back]
  std::uint64_t vocab_fingerprint = 0;
};

/// Ridge regression of `data.targets` on the bag of words.
inline LinRegModel fit_linreg(const Dataset& data, std::uint64_t vocab_fingerprint, double reg,
                              RidgeMethod method = RidgeMethod::automatic)
{
  if (data.targets.size() != data.size()) throw InvalidArgument("fit_linreg needs numeric targets");
  Eigen::MatrixXd t(static_cast<Eigen::Index>(data.size()), 1);
  for (std::size_t i = 0; i < data.size(); ++i) t(static_cast<Eigen::Index>(i), 0) = data.targets[i];
  RidgeFit fit = fit_ridge(data.x, data.dim, t, reg, method);
  LinRegModel m;
  m.weights = fit.weights.col(0);
  m.bias = fit.intercept(0);
  m.reg = reg;
  for (const auto& c : data.classes) m.levels.push_back(std::stoi(c));
  std::sort(m.levels.begin(), m.levels.end());
  m.vocab_fingerprint = vocab_fingerprint;
  return m;
}

/// Continuous prediction clamped to the rating scale.
inline double predict_linreg_raw(const LinRegModel& model, const SparseVector& x)
{
  if (x.vocab_id != 0 && model.vocab_fingerprint != 0 && x.vocab_id != model.vocab_fingerprint)
    throw VocabularyMismatch("vocabulary fingerprint mismatch: input " + fingerprint_hex(x.vocab_id) + ", model " +
                             fingerprint_hex(model.vocab_fingerprint));
  double v = model.bias;
  for (std::size_t k = 0; k < x.nnz(); ++k)
  {
    if (x.indices[k] >= model.weights.size()) throw VocabularyMismatch("feature index beyond model vocabulary");
    v += x.values[k] * model.weights(x.indices[k]);
  }
  if (!model.levels.empty()) v = std::clamp(v, double(model.levels.front()), double(model.levels.back()));
  return v;
}

/// Nearest rating level (the lower one on a tie).
inline int nearest_level(const std::vector<int>& levels, double v)
{
  if (levels.empty()) throw InvalidArgument("no rating levels");
  int best = levels.front();
  for (int l : levels)
    if (std::abs(l - v) < std::abs(best - v)) best = l;
  return best;
}

inline int predict_linreg(const LinRegModel& model, const SparseVector& x)
{
  return nearest_level(model.levels, predict_linreg_raw(model, x));
}

} // namespace mood
