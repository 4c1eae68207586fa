#pragma once

// Repeated random-split experiments: manifold classifiers against the
// one-vs-all logistic baseline, and rating prediction learning curves
// against ridge regression.

#include "mood/baselines.hpp"
#include "mood/classify.hpp"
#include "mood/corpus.hpp"
#include "mood/eval.hpp"
#include "mood/features.hpp"
#include "mood/manifold.hpp"
#include "mood/sentiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mood {

enum class Method
{
  logreg,
  lda_diag,
  lda_full,
  qda_diag,
  qda_full
};

inline const char* to_string(Method m)
{
  switch (m)
  {
  case Method::logreg: return "logreg";
  case Method::lda_diag: return "lda-diag";
  case Method::lda_full: return "lda-full";
  case Method::qda_diag: return "qda-diag";
  case Method::qda_full: return "qda-full";
  }
  return "?";
}

inline Method parse_method(const std::string& s)
{
  for (Method m : {Method::logreg, Method::lda_diag, Method::lda_full, Method::qda_diag, Method::qda_full})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown method '" + s + "' (expected logreg|lda-diag|lda-full|qda-diag|qda-full)");
}

inline std::vector<Method> all_methods()
{
  return {Method::logreg, Method::lda_diag, Method::lda_full, Method::qda_diag, Method::qda_full};
}

inline CovarianceSpec method_spec(Method m, double lambda)
{
  CovarianceSpec spec;
  spec.lambda = lambda;
  spec.structure = (m == Method::lda_diag || m == Method::qda_diag) ? CovarianceStructure::diagonal
                                                                     : CovarianceStructure::full;
  spec.pooling = (m == Method::qda_diag || m == Method::qda_full) ? CovariancePooling::per_class
                                                                   : CovariancePooling::pooled;
  return spec;
}

/// Rows of `data` at `idx`, sharing its class list.
inline Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx)
{
  Dataset out;
  out.classes = data.classes;
  out.dim = data.dim;
  for (auto i : idx)
  {
    out.x.push_back(data.x[i]);
    out.y.push_back(data.y[i]);
    if (!data.targets.empty()) out.targets.push_back(data.targets[i]);
  }
  return out;
}

/// Fold id per sample: each class's shuffled members are dealt round-robin.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t folds, std::uint64_t seed)
{
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  int C = 0;
  for (int v : y) C = std::max(C, v + 1);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(C));
  for (std::size_t i = 0; i < y.size(); ++i) members[static_cast<std::size_t>(y[i])].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size(), 0);
  std::size_t offset = 0;
  for (auto& m : members)
  {
    rng.shuffle(m.begin(), m.end());
    for (std::size_t r = 0; r < m.size(); ++r) fold[m[r]] = (offset + r) % folds;
    offset += m.size();
  }
  return fold;
}

/// Indices of one cross-validation fold (validation) and the rest (training).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold_indices(const std::vector<std::size_t>& fold,
                                                                                  std::size_t k)
{
  std::vector<std::size_t> tr, va;
  for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == k ? va : tr).push_back(i);
  return {tr, va};
}

/// Macro-F1 over classes present in `truth`.
inline Metrics evaluate_predictions(const std::vector<std::size_t>& pred, const std::vector<int>& truth,
                                    const std::vector<std::string>& classes)
{
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < pred.size(); ++i) cm.add(static_cast<std::size_t>(truth[i]), pred[i]);
  return metrics(cm, MacroAverage::present_in_truth);
}

struct ExperimentConfig
{
  std::vector<Method> methods = all_methods();
  std::size_t trials = 10;
  double train_fraction = 0.5;
  double alpha = 0.05;
  std::uint64_t seed = 0;

  std::uint64_t min_count = 1;
  TokenizerOptions tokenizer;
  Normalization normalization = Normalization::l1;
  ManifoldOptions manifold;

  /// Shrinkage weight; selected per method by cross-validation on each
  /// training split when `lambda_grid` has several entries.
  double lambda = 0.1;
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  /// Manifold regression ridge candidates, selected jointly with lambda.
  /// Empty means `manifold.ridge`.
  std::vector<double> ridge_grid = {1e-3, 1e-2, 1e-1, 1.0};
  double logreg_reg = 1e-2;
  std::vector<double> logreg_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::size_t cv_folds = 3;

  std::optional<BinaryTaskSpec> binary_task;
  /// For binary tasks: keep the manifold fit on the full label set and
  /// only refit the Gaussians on the two task classes.
  bool reuse_manifold = false;

  std::size_t threads = 1;
};

struct MethodTrial
{
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double hyperparameter = 0.0; // lambda or logistic regularization
  double ridge = 0.0;          // manifold ridge (manifold methods)
};

struct MethodSummary
{
  Method method = Method::logreg;
  double mean_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  std::optional<TTestResult> f1_vs_baseline;
  std::optional<TTestResult> accuracy_vs_baseline;
};

struct TrialReport
{
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<MethodTrial>> trials; // [trial][method]
  std::vector<MethodSummary> summary;
  double alpha = 0.05;
  std::string task = "multiclass";
  std::size_t num_classes = 0;
};

namespace detail {

inline std::vector<std::size_t> predict_all(const EmotionClassifier& clf, const Dataset& data)
{
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& x : data.x) out.push_back(predict_index(clf, x));
  return out;
}

inline std::vector<std::size_t> predict_all(const LogRegOvaModel& m, const Dataset& data)
{
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& x : data.x) out.push_back(predict_logreg(m, x));
  return out;
}

/// Mean validation macro-F1 of one covariance model on per-fold manifolds;
/// -inf when some fold cannot be fit.
inline double cv_score(const Dataset& train, Method m, double lambda, const std::vector<std::size_t>& fold,
                       std::size_t folds, const std::vector<ManifoldModel>& fold_manifolds)
{
  double score = 0.0;
  for (std::size_t k = 0; k < folds; ++k)
  {
    const auto [tr, va] = fold_indices(fold, k);
    const Dataset dtr = subset(train, tr), dva = subset(train, va);
    try
    {
      const auto clf = fit_on_manifold(fold_manifolds[k], dtr, method_spec(m, lambda));
      score += evaluate_predictions(predict_all(clf, dva), dva.y, dva.classes).macro_f1;
    }
    catch (const Error&)
    {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return score / static_cast<double>(folds);
}

inline double select_logreg_reg(const Dataset& train, std::uint64_t fp, const std::vector<double>& grid,
                                const std::vector<std::size_t>& fold, std::size_t folds)
{
  double best_reg = grid.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double reg : grid)
  {
    double score = 0.0;
    for (std::size_t k = 0; k < folds; ++k)
    {
      const auto [tr, va] = fold_indices(fold, k);
      const Dataset dtr = subset(train, tr), dva = subset(train, va);
      LogRegOptions o;
      o.reg = reg;
      const auto model = fit_logreg_ova(dtr, fp, o);
      score += evaluate_predictions(predict_all(model, dva), dva.y, dva.classes).macro_f1;
    }
    if (score > best_score)
    {
      best_score = score;
      best_reg = reg;
    }
  }
  return best_reg;
}

inline std::vector<double> grid_or(const std::vector<double>& grid, double fallback)
{
  return grid.empty() ? std::vector<double>{fallback} : grid;
}

inline std::vector<MethodTrial> run_trial(const Corpus& corpus, const ExperimentConfig& cfg, std::uint64_t seed)
{
  const bool reuse = cfg.binary_task && cfg.reuse_manifold;
  const auto parts = split(corpus, {cfg.train_fraction, seed});
  const Featurizer feat = make_featurizer(parts.train, cfg.min_count, cfg.tokenizer, cfg.normalization);
  const std::uint64_t fp = feat.vocab.fingerprint();

  Corpus train_c = parts.train, test_c = parts.test;
  std::optional<Dataset> full_label_train;
  if (cfg.binary_task)
  {
    if (reuse) full_label_train = make_dataset(parts.train, feat);
    train_c = make_binary_task(parts.train, *cfg.binary_task);
    test_c = make_binary_task(parts.test, *cfg.binary_task);
  }
  const Dataset train = make_dataset(train_c, feat);
  const Dataset test = make_dataset(test_c, feat, train.classes);

  // With a reused manifold every fold shares the one fit on all labels.
  auto provide = [&](const Dataset& d, double ridge) -> ManifoldModel {
    ManifoldOptions o = cfg.manifold;
    o.ridge = ridge;
    return fit_manifold(full_label_train ? *full_label_train : d, fp, o);
  };

  const bool any_manifold =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) { return m != Method::logreg; });
  const auto fold = stratified_folds(train.y, cfg.cv_folds, mix_seed(seed, 1));
  const auto ridges = grid_or(cfg.ridge_grid, cfg.manifold.ridge);
  const auto lambdas = grid_or(cfg.lambda_grid, cfg.lambda);
  const bool tune_manifold = ridges.size() > 1 || lambdas.size() > 1;

  std::vector<std::vector<ManifoldModel>> fold_manifolds(ridges.size()); // [ridge][fold]
  if (any_manifold && tune_manifold)
    for (std::size_t r = 0; r < ridges.size(); ++r)
      for (std::size_t k = 0; k < cfg.cv_folds; ++k)
        fold_manifolds[r].push_back(provide(subset(train, fold_indices(fold, k).first), ridges[r]));
  std::vector<std::optional<ManifoldModel>> manifolds(ridges.size());

  std::vector<MethodTrial> out;
  for (Method m : cfg.methods)
  {
    MethodTrial r;
    std::vector<std::size_t> pred;
    if (m == Method::logreg)
    {
      const auto grid = grid_or(cfg.logreg_grid, cfg.logreg_reg);
      const double reg = grid.size() > 1 ? select_logreg_reg(train, fp, grid, fold, cfg.cv_folds) : grid[0];
      LogRegOptions o;
      o.reg = reg;
      pred = predict_all(fit_logreg_ova(train, fp, o), test);
      r.hyperparameter = reg;
    }
    else
    {
      std::size_t best_r = 0, best_l = 0;
      if (tune_manifold)
      {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t ri = 0; ri < ridges.size(); ++ri)
          for (std::size_t li = 0; li < lambdas.size(); ++li)
          {
            const double s = cv_score(train, m, lambdas[li], fold, cfg.cv_folds, fold_manifolds[ri]);
            if (s > best)
            {
              best = s;
              best_r = ri;
              best_l = li;
            }
          }
      }
      if (!manifolds[best_r]) manifolds[best_r] = provide(train, ridges[best_r]);
      pred = predict_all(fit_on_manifold(*manifolds[best_r], train, method_spec(m, lambdas[best_l])), test);
      r.hyperparameter = lambdas[best_l];
      r.ridge = ridges[best_r];
    }
    const Metrics met = evaluate_predictions(pred, test.y, test.classes);
    r.accuracy = met.accuracy;
    r.macro_f1 = met.macro_f1;
    out.push_back(r);
  }
  return out;
}

} // namespace detail

/// For each trial: stratified split, vocabulary from the training part,
/// every method fit on train and scored on test. Methods are compared with
/// the logistic baseline by paired t-tests over trials.
inline TrialReport run_experiment(const Corpus& corpus, const ExperimentConfig& cfg)
{
  if (cfg.trials < 1) throw InvalidArgument("experiment needs at least one trial");
  if (cfg.methods.empty()) throw InvalidArgument("experiment needs at least one method");
  if (corpus.kind() != CorpusKind::emotion) throw InvalidArgument("run_experiment needs an emotion corpus");

  TrialReport rep;
  rep.methods = cfg.methods;
  rep.alpha = cfg.alpha;
  rep.task = cfg.binary_task ? cfg.binary_task->name : "multiclass";
  rep.num_classes = cfg.binary_task ? 2 : corpus.labels().size();
  for (std::size_t t = 0; t < cfg.trials; ++t) rep.seeds.push_back(mix_seed(cfg.seed, t));
  rep.trials.resize(cfg.trials);

  const Corpus& working = (cfg.binary_task && !cfg.reuse_manifold) ? make_binary_task(corpus, *cfg.binary_task) : corpus;
  ExperimentConfig trial_cfg = cfg;
  if (cfg.binary_task && !cfg.reuse_manifold) trial_cfg.binary_task.reset();

  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    try
    {
      rep.trials[t] = detail::run_trial(working, trial_cfg, rep.seeds[t]);
    }
    catch (const Error& e)
    {
      throw Error(e.kind(), "trial " + std::to_string(t) + " (seed " + std::to_string(rep.seeds[t]) + "): " + e.what());
    }
  });

  const auto base_it = std::find(cfg.methods.begin(), cfg.methods.end(), Method::logreg);
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
  {
    MethodSummary s;
    s.method = cfg.methods[mi];
    std::vector<double> f1, acc;
    for (const auto& tr : rep.trials)
    {
      f1.push_back(tr[mi].macro_f1);
      acc.push_back(tr[mi].accuracy);
    }
    for (std::size_t t = 0; t < f1.size(); ++t)
    {
      s.mean_macro_f1 += f1[t] / static_cast<double>(f1.size());
      s.mean_accuracy += acc[t] / static_cast<double>(acc.size());
    }
    if (base_it != cfg.methods.end() && cfg.methods[mi] != Method::logreg && cfg.trials >= 2)
    {
      const auto bi = static_cast<std::size_t>(base_it - cfg.methods.begin());
      std::vector<double> bf1, bacc;
      for (const auto& tr : rep.trials)
      {
        bf1.push_back(tr[bi].macro_f1);
        bacc.push_back(tr[bi].accuracy);
      }
      s.f1_vs_baseline = paired_t_test(f1, bf1, cfg.alpha);
      s.accuracy_vs_baseline = paired_t_test(acc, bacc, cfg.alpha);
    }
    rep.summary.push_back(s);
  }
  return rep;
}

/// A significant improvement: p < alpha and a positive mean difference.
inline bool improves(const std::optional<TTestResult>& t)
{
  return t && t->significant && t->mean_difference > 0.0;
}

namespace detail {

inline nlohmann::json ttest_json(const TTestResult& t)
{
  nlohmann::json j;
  j["t"] = std::isfinite(t.t) ? nlohmann::json(t.t) : nlohmann::json(t.t > 0 ? "inf" : "-inf");
  j["p"] = t.p;
  j["significant"] = t.significant;
  j["mean_difference"] = t.mean_difference;
  return j;
}

} // namespace detail

inline nlohmann::json to_json(const TrialReport& rep)
{
  nlohmann::json j;
  j["task"] = rep.task;
  j["num_classes"] = rep.num_classes;
  j["alpha"] = rep.alpha;
  j["seeds"] = rep.seeds;
  nlohmann::json methods = nlohmann::json::array();
  for (std::size_t mi = 0; mi < rep.methods.size(); ++mi)
  {
    nlohmann::json m;
    const auto& s = rep.summary[mi];
    m["method"] = to_string(rep.methods[mi]);
    m["mean_macro_f1"] = s.mean_macro_f1;
    m["mean_accuracy"] = s.mean_accuracy;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& tr : rep.trials)
      per.push_back({{"macro_f1", tr[mi].macro_f1}, {"accuracy", tr[mi].accuracy}, {"hyperparameter", tr[mi].hyperparameter}, {"ridge", tr[mi].ridge}});
    m["trials"] = per;
    if (s.f1_vs_baseline) m["macro_f1_vs_logreg"] = detail::ttest_json(*s.f1_vs_baseline);
    if (s.accuracy_vs_baseline) m["accuracy_vs_logreg"] = detail::ttest_json(*s.accuracy_vs_baseline);
    methods.push_back(m);
  }
  j["methods"] = methods;
  return j;
}

/// Plain-text table; '*' marks a significant improvement over logreg.
inline std::string format_table(const TrialReport& rep)
{
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "task: %s (%zu classes, %zu trials, alpha %.3g)\n", rep.task.c_str(),
                rep.num_classes, rep.trials.size(), rep.alpha);
  os << line;
  std::snprintf(line, sizeof line, "%-10s %10s %10s\n", "method", "macro-F1", "accuracy");
  os << line;
  for (const auto& s : rep.summary)
  {
    std::snprintf(line, sizeof line, "%-10s %9.4f%c %9.4f%c\n", to_string(s.method), s.mean_macro_f1,
                  improves(s.f1_vs_baseline) ? '*' : ' ', s.mean_accuracy, improves(s.accuracy_vs_baseline) ? '*' : ' ');
    os << line;
  }
  return os.str();
}

/// Stratified sample of exactly `n` documents (each rating level kept when
/// n permits), in corpus order.
inline Corpus sample_stratified(const Corpus& corpus, std::size_t n, std::uint64_t seed)
{
  if (n == 0 || n > corpus.size()) throw InvalidArgument("sample size outside [1, corpus size]");
  if (n == corpus.size()) return corpus;
  return split(corpus, {static_cast<double>(n) / static_cast<double>(corpus.size()), seed}).train;
}

struct RatingCurveConfig
{
  std::vector<std::size_t> train_sizes = {25, 50, 100, 250, 500, 1000, 2000};
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::uint64_t min_count = 1;
  TokenizerOptions tokenizer;
  Normalization normalization = Normalization::l1;
  ManifoldOptions manifold;
  CovarianceSpec sentiment_spec;
  std::vector<double> linreg_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::size_t cv_folds = 5;
  std::size_t threads = 1;
};

struct RatingCurvePoint
{
  std::size_t train_size = 0;
  std::vector<double> manifold_l1; // per trial
  std::vector<double> baseline_l1;
  double mean_manifold_l1 = 0.0;
  double mean_baseline_l1 = 0.0;
  TTestResult manifold_vs_baseline;
};

struct RatingCurveReport
{
  std::vector<RatingCurvePoint> points;
};

namespace detail {

inline double rating_l1(const std::vector<int>& pred, const Dataset& test)
{
  std::vector<double> p(pred.begin(), pred.end());
  return l1_error(p, test.targets);
}

inline double select_linreg_reg(const Dataset& train, std::uint64_t fp, const std::vector<double>& grid,
                                std::size_t folds, std::uint64_t seed)
{
  if (grid.size() == 1) return grid.front();
  folds = std::min(folds, train.size());
  const auto fold = stratified_folds(train.y, folds, seed);
  double best = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double reg : grid)
  {
    double err = 0.0;
    for (std::size_t k = 0; k < folds; ++k)
    {
      const auto [tr, va] = fold_indices(fold, k);
      if (tr.size() < 2 || va.empty()) continue;
      const Dataset dtr = subset(train, tr), dva = subset(train, va);
      const auto m = fit_linreg(dtr, fp, reg);
      std::vector<double> p;
      for (const auto& x : dva.x) p.push_back(predict_linreg_raw(m, x));
      err += l1_error(p, dva.targets) * static_cast<double>(va.size());
    }
    if (err < best_err)
    {
      best_err = err;
      best = reg;
    }
  }
  return best;
}

} // namespace detail

/// L1 rating error of manifold prediction and of bag-of-words ridge
/// regression as a function of the rating training-set size. The manifold
/// is fit once on `emotions`; rating training sets are stratified samples
/// of `pool`; every model is scored on `test`.
inline RatingCurveReport run_rating_curve(const Corpus& emotions, const Corpus& pool, const Corpus& test,
                                          const RatingCurveConfig& cfg)
{
  if (pool.kind() != CorpusKind::rating || test.kind() != CorpusKind::rating)
    throw InvalidArgument("rating curve needs rating corpora");
  const Featurizer emo_feat = make_featurizer(emotions, cfg.min_count, cfg.tokenizer, cfg.normalization);
  const ManifoldModel manifold = fit_manifold(make_dataset(emotions, emo_feat), emo_feat.vocab.fingerprint(), cfg.manifold);
  const auto levels = pool.keys();
  const Dataset test_on_manifold = make_dataset(test, emo_feat, levels);

  RatingCurveReport rep;
  rep.points.resize(cfg.train_sizes.size());
  for (std::size_t si = 0; si < cfg.train_sizes.size(); ++si)
  {
    auto& pt = rep.points[si];
    pt.train_size = cfg.train_sizes[si];
    pt.manifold_l1.assign(cfg.trials, 0.0);
    pt.baseline_l1.assign(cfg.trials, 0.0);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
      const std::uint64_t seed = mix_seed(cfg.seed, si * 1000003ULL + t);
      const Corpus train = sample_stratified(pool, pt.train_size, seed);

      const SentimentModel sm = fit_sentiment(make_dataset(train, emo_feat, levels), manifold, cfg.sentiment_spec);
      std::vector<int> pm;
      for (const auto& x : test_on_manifold.x) pm.push_back(predict_rating(sm, x));
      pt.manifold_l1[t] = detail::rating_l1(pm, test_on_manifold);

      const Featurizer bow = make_featurizer(train, cfg.min_count, cfg.tokenizer, cfg.normalization);
      const Dataset dtrain = make_dataset(train, bow, levels);
      const double reg = detail::select_linreg_reg(dtrain, bow.vocab.fingerprint(), cfg.linreg_grid, cfg.cv_folds,
                                                   mix_seed(seed, 7));
      const LinRegModel lm = fit_linreg(dtrain, bow.vocab.fingerprint(), reg);
      const Dataset dtest = make_dataset(test, bow, levels);
      std::vector<int> pb;
      for (const auto& x : dtest.x) pb.push_back(predict_linreg(lm, x));
      pt.baseline_l1[t] = detail::rating_l1(pb, dtest);
    });
    for (std::size_t t = 0; t < cfg.trials; ++t)
    {
      pt.mean_manifold_l1 += pt.manifold_l1[t] / static_cast<double>(cfg.trials);
      pt.mean_baseline_l1 += pt.baseline_l1[t] / static_cast<double>(cfg.trials);
    }
    if (cfg.trials >= 2) pt.manifold_vs_baseline = paired_t_test(pt.manifold_l1, pt.baseline_l1);
  }
  return rep;
}

inline nlohmann::json to_json(const RatingCurveReport& rep)
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : rep.points)
    j.push_back({{"train_size", p.train_size},
                 {"mean_manifold_l1", p.mean_manifold_l1},
                 {"mean_baseline_l1", p.mean_baseline_l1},
                 {"manifold_l1", p.manifold_l1},
                 {"baseline_l1", p.baseline_l1},
                 {"p_value", p.manifold_vs_baseline.p}});
  return j;
}

} // namespace mood
