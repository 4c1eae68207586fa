#pragma once

// Evaluation metrics and the paired t-test.

#include "mood/common.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mood {

/// Counts with rows = truth and columns = prediction.
class ConfusionMatrix
{
public:
  explicit ConfusionMatrix(std::vector<std::string> labels)
      : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0)
  {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (!index_.emplace(labels_[i], i).second) throw InvalidArgument("duplicate label '" + labels_[i] + "'");
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::size_t index_of(const std::string& label) const
  {
    auto it = index_.find(label);
    if (it == index_.end()) throw InvalidArgument("unknown label '" + label + "'");
    return it->second;
  }

  void add(std::size_t truth, std::size_t pred)
  {
    if (truth >= size() || pred >= size()) throw InvalidArgument("confusion index out of range");
    ++counts_[truth * size() + pred];
  }

  std::size_t operator()(std::size_t truth, std::size_t pred) const { return counts_.at(truth * size() + pred); }

  std::size_t total() const
  {
    std::size_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  std::size_t row_sum(std::size_t r) const
  {
    std::size_t t = 0;
    for (std::size_t c = 0; c < size(); ++c) t += (*this)(r, c);
    return t;
  }

  std::size_t col_sum(std::size_t c) const
  {
    std::size_t t = 0;
    for (std::size_t r = 0; r < size(); ++r) t += (*this)(r, c);
    return t;
  }

private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> counts_;
};

/// Tallies predictions against truths over `labels` (default: the sorted
/// union of both lists).
inline ConfusionMatrix confusion(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                                 std::vector<std::string> labels = {})
{
  if (preds.size() != truths.size())
    throw InvalidArgument("confusion: " + std::to_string(preds.size()) + " predictions for " +
                          std::to_string(truths.size()) + " truths");
  if (labels.empty())
  {
    std::map<std::string, int> seen;
    for (const auto& p : preds) seen[p];
    for (const auto& t : truths) seen[t];
    for (const auto& [l, _] : seen) labels.push_back(l);
  }
  ConfusionMatrix cm(std::move(labels));
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(cm.index_of(truths[i]), cm.index_of(preds[i]));
  return cm;
}

enum class MacroAverage
{
  all_classes,      // every class of the matrix, absent ones scoring 0
  present_in_truth, // only classes with at least one true instance
};

struct Metrics
{
  double accuracy = 0.0;
  std::vector<double> f1; // per class, matrix order
  double macro_f1 = 0.0;
};

/// Accuracy, per-class F1 = 2PR/(P+R) (0 when P+R = 0) and their unweighted
/// mean.
inline Metrics metrics(const ConfusionMatrix& cm, MacroAverage avg = MacroAverage::all_classes)
{
  const std::size_t total = cm.total();
  if (total == 0) throw InvalidArgument("metrics: empty confusion matrix");
  Metrics m;
  std::size_t diag = 0;
  double sum_f1 = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < cm.size(); ++c)
  {
    const auto tp = static_cast<double>(cm(c, c));
    diag += cm(c, c);
    const auto pred = static_cast<double>(cm.col_sum(c));
    const auto truth = static_cast<double>(cm.row_sum(c));
    const double p = pred > 0 ? tp / pred : 0.0;
    const double r = truth > 0 ? tp / truth : 0.0;
    const double f = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    m.f1.push_back(f);
    if (avg == MacroAverage::all_classes || truth > 0)
    {
      sum_f1 += f;
      ++counted;
    }
  }
  m.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  m.macro_f1 = counted ? sum_f1 / static_cast<double>(counted) : 0.0;
  return m;
}

/// Mean absolute difference.
inline double l1_error(const std::vector<double>& preds, const std::vector<double>& truths)
{
  if (preds.size() != truths.size()) throw InvalidArgument("l1_error: length mismatch");
  if (preds.empty()) throw InvalidArgument("l1_error: empty lists");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - truths[i]);
  return s / static_cast<double>(preds.size());
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x)
{
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m)
  {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x)
{
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df)
{
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

struct TTestResult
{
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
  double mean_difference = 0.0;
};

/// Two-sided paired t-test on a - b with n - 1 degrees of freedom. When all
/// differences are equal: zero mean gives p = 1, otherwise p = 0.
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05)
{
  if (a.size() != b.size()) throw InvalidArgument("paired_t_test: length mismatch");
  if (a.size() < 2) throw InvalidArgument("paired_t_test: needs at least 2 pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    d[i] = a[i] - b[i];
    sum += d[i];
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  TTestResult r;
  r.mean_difference = mean;
  if (sd == 0.0)
  {
    if (mean == 0.0)
    {
      r.t = 0.0;
      r.p = 1.0;
    }
    else
    {
      r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
  }
  else
  {
    r.t = mean / (sd / std::sqrt(n));
    r.p = student_t_two_sided_p(r.t, n - 1.0);
  }
  r.significant = r.p < alpha;
  return r;
}

} // namespace mood
