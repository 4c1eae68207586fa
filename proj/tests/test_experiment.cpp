#include "mood/experiment.hpp"
#include "mood/synthetic.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace mood;

namespace {

Corpus flat_corpus(std::size_t classes, std::size_t docs, double background, std::uint64_t seed)
{
  FlatConfig cfg;
  cfg.classes = classes;
  cfg.docs = docs;
  cfg.background = background;
  return generate_synthetic(flat_classes(cfg, seed), 12, mix_seed(seed, 1));
}

/// Small grids so a full experiment runs in well under a second.
ExperimentConfig quick_config()
{
  ExperimentConfig cfg;
  cfg.trials = 3;
  cfg.seed = 11;
  cfg.lambda_grid = {0.1, 0.5};
  cfg.ridge_grid = {1e-2};
  cfg.logreg_grid = {1e-2};
  return cfg;
}

} // namespace

TEST(Method, NamesRoundTrip)
{
  for (Method m : all_methods()) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("svm"), InvalidArgument);
}

TEST(StratifiedFolds, BalanceEveryClassAcrossFolds)
{
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial)
  {
    const std::size_t folds = 2 + rng.below(4);
    std::vector<int> y;
    const auto n = 10 + rng.below(60);
    for (std::uint64_t i = 0; i < n; ++i) y.push_back(static_cast<int>(rng.below(4)));
    const auto f = stratified_folds(y, folds, 9);
    ASSERT_EQ(f.size(), y.size());
    std::map<int, std::vector<std::size_t>> per_class;
    std::vector<std::size_t> sizes(folds, 0);
    for (std::size_t i = 0; i < y.size(); ++i)
    {
      ASSERT_LT(f[i], folds);
      auto& v = per_class[y[i]];
      v.resize(folds, 0);
      ++v[f[i]];
      ++sizes[f[i]];
    }
    for (const auto& [c, v] : per_class) EXPECT_LE(*std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()), 1u);
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    EXPECT_EQ(stratified_folds(y, folds, 9), f);
  }
  EXPECT_THROW(stratified_folds({0, 1}, 1, 0), InvalidArgument);
}

TEST(Experiment, IsBitReproducibleAndThreadIndependent)
{
  const Corpus c = flat_corpus(3, 90, 0.85, 2);
  ExperimentConfig cfg = quick_config();
  const auto a = to_json(run_experiment(c, cfg)).dump();
  const auto b = to_json(run_experiment(c, cfg)).dump();
  cfg.threads = 3;
  const auto p = to_json(run_experiment(c, cfg)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, p);
  cfg.seed = 12;
  EXPECT_NE(a, to_json(run_experiment(c, cfg)).dump());
}

TEST(Experiment, ReportShape)
{
  const Corpus c = flat_corpus(3, 90, 0.85, 3);
  const auto rep = run_experiment(c, quick_config());
  const auto j = to_json(rep);
  EXPECT_EQ(j["task"], "multiclass");
  EXPECT_EQ(j["num_classes"], 3);
  ASSERT_EQ(j["methods"].size(), all_methods().size());
  for (const auto& m : j["methods"])
  {
    EXPECT_EQ(m["trials"].size(), 3u);
    EXPECT_EQ(m.contains("macro_f1_vs_logreg"), m["method"] != "logreg");
    for (const auto& t : m["trials"])
    {
      EXPECT_GE(t["macro_f1"].get<double>(), 0.0);
      EXPECT_LE(t["macro_f1"].get<double>(), 1.0);
    }
  }
  // Means agree with the per-trial numbers.
  for (std::size_t mi = 0; mi < rep.methods.size(); ++mi)
  {
    double s = 0;
    for (const auto& tr : rep.trials) s += tr[mi].macro_f1;
    EXPECT_NEAR(rep.summary[mi].mean_macro_f1, s / 3, 1e-12);
  }
  const auto table = format_table(rep);
  EXPECT_NE(table.find("qda-full"), std::string::npos);
}

TEST(Experiment, SeparableClassesSaturateWithoutSignificance)
{
  // No background mass: every word identifies its class.
  const Corpus c = flat_corpus(3, 90, 0.0, 4);
  const auto rep = run_experiment(c, quick_config());
  for (const auto& s : rep.summary)
  {
    EXPECT_EQ(s.mean_macro_f1, 1.0) << to_string(s.method);
    EXPECT_FALSE(improves(s.f1_vs_baseline));
  }
}

TEST(Experiment, BinaryTaskRelabels)
{
  const Corpus c = flat_corpus(4, 120, 0.85, 5);
  ExperimentConfig cfg = quick_config();
  cfg.binary_task = parse_binary_task("split", "class0,class1/class2,class3");
  const auto rep = run_experiment(c, cfg);
  EXPECT_EQ(rep.task, "split");
  EXPECT_EQ(rep.num_classes, 2u);
  cfg.reuse_manifold = true;
  const auto reused = run_experiment(c, cfg);
  EXPECT_EQ(reused.num_classes, 2u);
}

TEST(Experiment, RejectsBadConfigurations)
{
  const Corpus c = flat_corpus(3, 60, 0.5, 6);
  ExperimentConfig cfg = quick_config();
  cfg.trials = 0;
  EXPECT_THROW(run_experiment(c, cfg), InvalidArgument);
  cfg = quick_config();
  cfg.methods.clear();
  EXPECT_THROW(run_experiment(c, cfg), InvalidArgument);
}

TEST(SampleStratified, ExactSizeAndBounds)
{
  LatentSentimentConfig lc;
  const Corpus pool = latent_rating_corpus(lc, 200, 3, "r");
  for (std::size_t n : {5u, 25u, 100u, 200u})
  {
    const Corpus s = sample_stratified(pool, n, 1);
    EXPECT_EQ(s.size(), n);
    if (n >= 5)
    {
      EXPECT_EQ(s.keys().size(), pool.keys().size());
    }
  }
  EXPECT_THROW(sample_stratified(pool, 0, 1), InvalidArgument);
  EXPECT_THROW(sample_stratified(pool, 201, 1), InvalidArgument);
}

TEST(RatingCurve, ProducesFiniteErrorsPerSize)
{
  LatentSentimentConfig lc;
  lc.docs_per_class = 40;
  const Corpus emotions = latent_emotion_corpus(lc, 1);
  const Corpus pool = latent_rating_corpus(lc, 300, 2, "p");
  const Corpus test = latent_rating_corpus(lc, 100, 3, "t");
  RatingCurveConfig cfg;
  cfg.train_sizes = {30, 120};
  cfg.trials = 2;
  cfg.cv_folds = 3;
  cfg.manifold.dim = 2;
  const auto rep = run_rating_curve(emotions, pool, test, cfg);
  ASSERT_EQ(rep.points.size(), 2u);
  for (const auto& p : rep.points)
  {
    EXPECT_EQ(p.manifold_l1.size(), 2u);
    EXPECT_GE(p.mean_manifold_l1, 0.0);
    EXPECT_LE(p.mean_manifold_l1, 4.0);
    EXPECT_GE(p.mean_baseline_l1, 0.0);
    EXPECT_LE(p.mean_baseline_l1, 4.0);
  }
  EXPECT_EQ(to_json(rep).dump(), to_json(run_rating_curve(emotions, pool, test, cfg)).dump());
  EXPECT_THROW(run_rating_curve(emotions, emotions, test, cfg), InvalidArgument);
}
