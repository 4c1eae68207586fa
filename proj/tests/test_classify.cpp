#include "mood/classify.hpp"
#include "mood/sentiment.hpp"
#include "mood/synthetic.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace mood;
using mood::test::random_dataset;

namespace {

constexpr double pi = 3.14159265358979323846;

/// Identity manifold on d = l features with zero intercept, so z* = x.
ManifoldModel identity_manifold(std::vector<std::string> labels, Eigen::Index l)
{
  ManifoldModel m;
  m.labels = std::move(labels);
  m.theta = Eigen::MatrixXd::Identity(l, l);
  m.intercept = Eigen::VectorXd::Zero(l);
  m.mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.labels.size()), l);
  return m;
}

EmotionClassifier spherical_classifier(const Eigen::MatrixXd& means, const Eigen::VectorXd& priors)
{
  std::vector<std::string> labels;
  for (Eigen::Index c = 0; c < means.rows(); ++c) labels.push_back("c" + std::to_string(c));
  CovarianceSpec s;
  GaussianClassModel g(labels, means, {Eigen::MatrixXd::Identity(means.cols(), means.cols())}, priors, s);
  return {identity_manifold(labels, means.cols()), g};
}

SparseVector point(std::initializer_list<double> v)
{
  Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) e(i++) = x;
  return mood::test::sparse(e);
}

/// log p(y) + log N(z; mu_y, Sigma_y) with the density written out directly.
double posterior_oracle(const GaussianClassModel& g, std::size_t c, const Eigen::VectorXd& z)
{
  const Eigen::MatrixXd& S = g.covariance(c);
  const Eigen::VectorXd d = z - g.means().row(static_cast<Eigen::Index>(c)).transpose();
  return std::log(g.priors()(static_cast<Eigen::Index>(c))) - 0.5 * d.dot(S.inverse() * d) -
         0.5 * std::log(S.determinant()) - 0.5 * static_cast<double>(z.size()) * std::log(2 * pi);
}

Dataset rating_dataset(const Corpus& c, const Featurizer& f)
{
  return make_dataset(c, f);
}

/// Latent-grid emotion corpus (8 classes) with `per_class` documents each.
Corpus emotion_corpus(std::size_t per_class, std::uint64_t seed)
{
  LatentSentimentConfig cfg;
  cfg.docs_per_class = per_class;
  return latent_emotion_corpus(cfg, seed);
}

} // namespace

TEST(Predict, EqualPriorsAndSphericalCovarianceIsNearestMean)
{
  Eigen::MatrixXd mu(2, 2);
  mu << -1, 0, 2, 1;
  const auto clf = spherical_classifier(mu, Eigen::Vector2d(0.5, 0.5));
  Rng rng(2);
  for (int k = 0; k < 200; ++k)
  {
    const double x = 6 * rng.uniform() - 3, y = 6 * rng.uniform() - 3;
    const Eigen::Vector2d z(x, y);
    const std::size_t nearest = (z - mu.row(0).transpose()).norm() <= (z - mu.row(1).transpose()).norm() ? 0 : 1;
    EXPECT_EQ(predict_index(clf, point({x, y})), nearest);
  }
}

TEST(Predict, ExactTieGoesToTheFirstLabel)
{
  Eigen::MatrixXd mu(2, 1);
  mu << -1, 1;
  const auto clf = spherical_classifier(mu, Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(predict(clf, SparseVector{}), "c0");
}

TEST(Predict, MatchesBruteForcePosteriorOnASyntheticCorpus)
{
  const Corpus c = emotion_corpus(25, 5);
  const Featurizer f = make_featurizer(c, 2);
  const Dataset d = make_dataset(c, f);
  CovarianceSpec spec;
  spec.pooling = CovariancePooling::per_class;
  const auto clf = fit_emotion_classifier(d, f.vocab.fingerprint(), {}, spec);
  for (const auto& x : d.x)
  {
    const Eigen::VectorXd z = project(x, clf.manifold);
    Eigen::VectorXd oracle(static_cast<Eigen::Index>(clf.labels().size()));
    for (std::size_t k = 0; k < clf.labels().size(); ++k) oracle(static_cast<Eigen::Index>(k)) = posterior_oracle(clf.gaussians, k, z);
    EXPECT_EQ(predict_index(clf, x), argmax(oracle));
    EXPECT_LT((predict_scores(clf, x) - oracle).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PredictScores, NormalizeAndKeepTheArgmaxUnderShifts)
{
  Eigen::MatrixXd mu(3, 2);
  mu << 0, 0, 1, 1, -1, 2;
  const auto clf = spherical_classifier(mu, Eigen::Vector3d(0.2, 0.3, 0.5));
  const auto x = point({0.4, 0.9});
  const Eigen::VectorXd s = predict_scores(clf, x);
  EXPECT_NEAR(softmax(s).sum(), 1.0, 1e-12);
  EXPECT_EQ(argmax(s), argmax(Eigen::VectorXd(s.array() + 123.0)));
  EXPECT_EQ(argmax(softmax(s)), predict_index(clf, x));
}

TEST(PredictScores, HandComputedOneDimensionalValues)
{
  // N(0,1) with prior 1/4 vs N(2,1) with prior 3/4, at z = 0.5.
  Eigen::MatrixXd mu(2, 1);
  mu << 0, 2;
  const auto clf = spherical_classifier(mu, Eigen::Vector2d(0.25, 0.75));
  const Eigen::VectorXd s = predict_scores(clf, point({0.5}));
  const double c = -0.5 * std::log(2 * pi);
  EXPECT_NEAR(s(0), std::log(0.25) + c - 0.125, 1e-14);
  EXPECT_NEAR(s(1), std::log(0.75) + c - 1.125, 1e-14);
}

TEST(Predict, PooledCovarianceGivesLinearBoundaries)
{
  const Dataset d = random_dataset(60, 12, 3, 44);
  CovarianceSpec spec;
  spec.pooling = CovariancePooling::pooled;
  const auto clf = fit_emotion_classifier(d, 0, {}, spec);
  Rng rng(1);
  for (int k = 0; k < 50; ++k)
  {
    // score differences along a line in z are affine: second differences vanish
    Eigen::VectorXd a(2), dir(2);
    a << rng.normal(), rng.normal();
    dir << rng.normal(), rng.normal();
    auto diff = [&](double t) {
      const Eigen::VectorXd z = a + t * dir;
      return clf.gaussians.log_density(std::size_t{0}, z) - clf.gaussians.log_density(std::size_t{1}, z);
    };
    EXPECT_NEAR(diff(0) - 2 * diff(1) + diff(2), 0.0, 1e-8);
  }
}

TEST(Predict, DuplicatingEveryDocumentLeavesPredictionsUnchanged)
{
  const Dataset d = random_dataset(30, 10, 3, 8);
  Dataset twice = d;
  twice.x.insert(twice.x.end(), d.x.begin(), d.x.end());
  twice.y.insert(twice.y.end(), d.y.begin(), d.y.end());
  CovarianceSpec spec;
  const auto a = fit_emotion_classifier(d, 0, {}, spec);
  const auto b = fit_emotion_classifier(twice, 0, {}, spec);
  EXPECT_LT((a.gaussians.priors() - b.gaussians.priors()).cwiseAbs().maxCoeff(), 1e-15);
  const Dataset probes = random_dataset(40, 10, 3, 99);
  for (const auto& x : probes.x) EXPECT_EQ(predict_index(a, x), predict_index(b, x));
}

TEST(BinaryTask, RelabelsAndDrops)
{
  const Corpus c = mood::test::emotion_corpus(
      {{"happy", "a"}, {"sad", "b"}, {"amused", "c"}, {"calm", "d"}, {"cheerful", "e"}, {"annoyed", "f"},
       {"exhausted", "g"}});
  const Corpus t = make_binary_task(c, sentiment_task());
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.labels(), (std::vector<std::string>{"neg", "pos"}));
  EXPECT_EQ(*t[0].label, "pos");
  EXPECT_EQ(*t[1].label, "neg");
  EXPECT_EQ(engagement_task().positive, (std::set<std::string>{"bored", "sleepy", "tired"}));
  try
  {
    make_binary_task(c, engagement_task());
    FAIL();
  }
  catch (const InvalidArgument& e)
  {
    EXPECT_NE(std::string(e.what()).find("'bored'"), std::string::npos);
  }
  EXPECT_THROW(make_binary_task(c, {"x", {"happy"}, {"happy"}}), InvalidArgument);
  const auto parsed = parse_binary_task("custom", "happy,amused/sad");
  EXPECT_EQ(parsed.positive, (std::set<std::string>{"amused", "happy"}));
  EXPECT_EQ(parsed.negative, (std::set<std::string>{"sad"}));
  EXPECT_THROW(parse_binary_task("bad", "happy"), InvalidArgument);
}

TEST(Sentiment, MeansArePerLevelProjectionAverages)
{
  const Corpus emo = emotion_corpus(37, 1);
  const Featurizer f = make_featurizer(emo, 2);
  const ManifoldModel m = fit_manifold(make_dataset(emo, f), f.vocab.fingerprint());
  const Corpus reviews = latent_rating_corpus({}, 200, 3, "r");
  const Dataset r = rating_dataset(reviews, f);
  const SentimentModel s = fit_sentiment(r, m, {});
  EXPECT_FALSE(s.degenerate);
  EXPECT_EQ(s.levels, (std::vector<int>{1, 2, 3, 4, 5}));
  const Eigen::MatrixXd z = project_all(r.x, m);
  for (std::size_t lvl = 0; lvl < s.levels.size(); ++lvl)
  {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(z.cols());
    double n = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r.y[i] == static_cast<int>(lvl))
      {
        sum += z.row(static_cast<Eigen::Index>(i)).transpose();
        n += 1;
      }
    EXPECT_LT((s.gaussians.means().row(static_cast<Eigen::Index>(lvl)).transpose() - sum / n).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Sentiment, IdenticalDocumentsAreFlaggedDegenerate)
{
  const Corpus emo = emotion_corpus(12, 1);
  const Featurizer f = make_featurizer(emo, 1);
  const ManifoldModel m = fit_manifold(make_dataset(emo, f), f.vocab.fingerprint());
  std::vector<Document> docs;
  for (int i = 0; i < 6; ++i) docs.push_back({"r" + std::to_string(i), "same words here", std::nullopt, 1 + i % 3});
  const SentimentModel s = fit_sentiment(make_dataset(Corpus(CorpusKind::rating, docs), f), m, {});
  EXPECT_TRUE(s.degenerate);
}

TEST(Sentiment, LevelsNeedTwoDocumentsAndASingleLevelAlwaysWins)
{
  const Corpus emo = emotion_corpus(12, 1);
  const Featurizer f = make_featurizer(emo, 1);
  const ManifoldModel m = fit_manifold(make_dataset(emo, f), f.vocab.fingerprint());
  std::vector<Document> docs{{"a", "happy", std::nullopt, 4}, {"b", "sad", std::nullopt, 4}, {"c", "meh", std::nullopt, 2}};
  EXPECT_THROW(fit_sentiment(make_dataset(Corpus(CorpusKind::rating, docs), f), m, {}), InvalidArgument);
  docs.pop_back();
  const SentimentModel one = fit_sentiment(make_dataset(Corpus(CorpusKind::rating, docs), f), m, {});
  for (const auto& d : emo.docs()) EXPECT_EQ(predict_rating(one, f(d.text)), 4);
}

TEST(Sentiment, ModeOwnershipAndTiesToTheLowerRating)
{
  SentimentModel s;
  s.levels = {1, 2};
  s.manifold = identity_manifold({"1", "2"}, 1);
  Eigen::MatrixXd mu(2, 1);
  mu << -1, 1;
  s.gaussians = GaussianClassModel({"1", "2"}, mu, {Eigen::MatrixXd::Identity(1, 1)}, Eigen::Vector2d(0.5, 0.5), {});
  EXPECT_EQ(predict_rating(s, point({1.0})), 2);
  EXPECT_EQ(predict_rating(s, point({-1.0})), 1);
  EXPECT_EQ(predict_rating(s, SparseVector{}), 1);
}

TEST(Sentiment, BeatsAConstantMedianPredictorAndTracesAMonotoneCurve)
{
  const Corpus emo = emotion_corpus(75, 11);
  const Featurizer f = make_featurizer(emo, 2);
  const ManifoldModel m = fit_manifold(make_dataset(emo, f), f.vocab.fingerprint(), {2, 1e-3, RidgeMethod::automatic});
  const Corpus train = latent_rating_corpus({}, 500, 12, "tr");
  const Corpus test = latent_rating_corpus({}, 500, 13, "te");
  const SentimentModel s = fit_sentiment(make_dataset(train, f), m, {});
  double model_l1 = 0, median_l1 = 0;
  for (const auto& d : test.docs())
  {
    model_l1 += std::abs(predict_rating(s, f(d.text)) - *d.rating);
    median_l1 += std::abs(3 - *d.rating);
  }
  EXPECT_LT(model_l1, median_l1);

  const auto curve = rating_curve(s, 0, 1);
  ASSERT_EQ(curve.size(), 5u);
  for (std::size_t i = 0; i < curve.size(); ++i) EXPECT_EQ(curve[i].rating, static_cast<int>(i + 1));
  // The rating direction is the dominant axis; it may point either way.
  const double sign = curve.back().x > curve.front().x ? 1.0 : -1.0;
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GT(sign * (curve[i].x - curve[i - 1].x), 0.0) << i;
  EXPECT_THROW(rating_curve(s, 0, 2), InvalidArgument);
}

TEST(Sentiment, FitIsInvariantToDocumentOrder)
{
  const Corpus emo = emotion_corpus(25, 2);
  const Featurizer f = make_featurizer(emo, 2);
  const ManifoldModel m = fit_manifold(make_dataset(emo, f), f.vocab.fingerprint());
  const Corpus reviews = latent_rating_corpus({}, 100, 4, "r");
  std::vector<Document> rev(reviews.docs().rbegin(), reviews.docs().rend());
  const SentimentModel a = fit_sentiment(make_dataset(reviews, f), m, {});
  const SentimentModel b = fit_sentiment(make_dataset(Corpus(CorpusKind::rating, rev), f), m, {});
  EXPECT_LT((a.gaussians.means() - b.gaussians.means()).cwiseAbs().maxCoeff(), 1e-12);
  for (const auto& d : emo.docs()) EXPECT_EQ(predict_rating(a, f(d.text)), predict_rating(b, f(d.text)));
}
