#pragma once

// Emotion classification through the manifold: project a document to its
// most likely manifold point, then apply the Gaussian Bayes rule there.

#include "mood/corpus.hpp"
#include "mood/features.hpp"
#include "mood/gaussian.hpp"
#include "mood/manifold.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace mood {

/// A fitted manifold plus the class Gaussians living on it. The Gaussians'
/// labels are the classifier's output labels; they equal the manifold's
/// labels unless the Gaussians were refit on a relabeled task.
struct EmotionClassifier
{
  ManifoldModel manifold;
  GaussianClassModel gaussians;

  const std::vector<std::string>& labels() const { return gaussians.labels(); }
};

/// Projections theta^T x + b of every document, as rows.
inline Eigen::MatrixXd project_all(const std::vector<SparseVector>& x, const ManifoldModel& m)
{
  Eigen::MatrixXd z(static_cast<Eigen::Index>(x.size()), m.dim());
  for (std::size_t i = 0; i < x.size(); ++i) z.row(static_cast<Eigen::Index>(i)) = project(x[i], m).transpose();
  return z;
}

/// Fits Gaussians for `data`'s classes on an existing manifold.
inline EmotionClassifier fit_on_manifold(ManifoldModel manifold, const Dataset& data, const CovarianceSpec& spec)
{
  const Eigen::MatrixXd z = project_all(data.x, manifold);
  GaussianClassModel g = fit_class_gaussians(z, data.y, data.classes, spec);
  return {std::move(manifold), std::move(g)};
}

/// Full pipeline: centroids, MDS, regression, then Gaussians on the
/// projected training documents.
inline EmotionClassifier fit_emotion_classifier(const Dataset& data, std::uint64_t vocab_fingerprint,
                                                const ManifoldOptions& mopts, const CovarianceSpec& spec)
{
  return fit_on_manifold(fit_manifold(data, vocab_fingerprint, mopts), data, spec);
}

/// s_y = log p(y) + log N(z*; mu_y, Sigma_y), z* = project(x).
inline Eigen::VectorXd predict_scores(const EmotionClassifier& clf, const SparseVector& x)
{
  const Eigen::VectorXd z = project(x, clf.manifold);
  const auto C = static_cast<Eigen::Index>(clf.gaussians.num_classes());
  Eigen::VectorXd s(C);
  for (Eigen::Index c = 0; c < C; ++c)
    s(c) = clf.gaussians.log_prior(static_cast<std::size_t>(c)) +
           clf.gaussians.log_density(static_cast<std::size_t>(c), z);
  return s;
}

/// Index of the largest score; the first wins ties.
inline std::size_t argmax(const Eigen::VectorXd& s)
{
  std::size_t best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c)
    if (s(c) > s(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(c);
  return best;
}

/// exp(s - logsumexp(s)): the posterior over classes.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& s)
{
  const double m = s.maxCoeff();
  Eigen::VectorXd e = (s.array() - m).exp();
  return e / e.sum();
}

inline std::size_t predict_index(const EmotionClassifier& clf, const SparseVector& x)
{
  return argmax(predict_scores(clf, x));
}

inline const std::string& predict(const EmotionClassifier& clf, const SparseVector& x)
{
  return clf.labels()[predict_index(clf, x)];
}

struct BinaryTaskSpec
{
  std::string name;
  std::set<std::string> positive;
  std::set<std::string> negative;
};

/// Positive classes become "pos", negative ones "neg"; other documents are
/// dropped.
inline Corpus make_binary_task(const Corpus& corpus, const BinaryTaskSpec& spec)
{
  if (corpus.kind() != CorpusKind::emotion) throw InvalidArgument("binary tasks need an emotion corpus");
  if (spec.positive.empty() || spec.negative.empty())
    throw InvalidArgument("binary task '" + spec.name + "': both sides need labels");
  for (const auto& l : spec.positive)
    if (spec.negative.count(l))
      throw InvalidArgument("binary task '" + spec.name + "': label '" + l + "' on both sides");
  const auto present = corpus.labels();
  const std::set<std::string> have(present.begin(), present.end());
  for (const auto* side : {&spec.positive, &spec.negative})
    for (const auto& l : *side)
      if (!have.count(l)) throw InvalidArgument("binary task '" + spec.name + "': label '" + l + "' not in corpus");

  std::vector<Document> docs;
  for (const auto& d : corpus.docs())
  {
    if (spec.positive.count(*d.label)) docs.push_back({d.id, d.text, std::string("pos"), std::nullopt});
    else if (spec.negative.count(*d.label)) docs.push_back({d.id, d.text, std::string("neg"), std::nullopt});
  }
  if (docs.empty()) throw InvalidArgument("binary task '" + spec.name + "' selects no documents");
  return Corpus(CorpusKind::emotion, std::move(docs));
}

/// Parses "a,b,c/d,e" (positive before the slash).
inline BinaryTaskSpec parse_binary_task(const std::string& name, const std::string& text)
{
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw InvalidArgument("binary task must look like 'a,b/c,d'");
  auto parse_side = [](const std::string& s) {
    std::set<std::string> out;
    std::size_t start = 0;
    while (start <= s.size())
    {
      auto comma = s.find(',', start);
      if (comma == std::string::npos) comma = s.size();
      const auto item = s.substr(start, comma - start);
      if (!item.empty()) out.insert(item);
      start = comma + 1;
    }
    return out;
  };
  return {name, parse_side(text.substr(0, slash)), parse_side(text.substr(slash + 1))};
}

/// The sentiment and engagement tasks built from mood partitions.
inline BinaryTaskSpec sentiment_task()
{
  return {"sentiment", {"cheerful", "happy", "amused"}, {"sad", "annoyed", "exhausted"}};
}

inline BinaryTaskSpec engagement_task()
{
  return {"engagement", {"tired", "bored", "sleepy"}, {"determined", "thoughtful"}};
}

inline BinaryTaskSpec anger_task()
{
  return {"anger", {"annoyed", "aggravated"}, {"calm", "content"}};
}

} // namespace mood
