#pragma once

// Planted-structure corpus generators used by the CLI `synth` command and by
// the structural experiments: emotion classes grouped into super-topics,
// near-duplicate class pairs, and a 2D latent sentiment space shared by an
// emotion corpus and a review-rating corpus.

#include "mood/common.hpp"
#include "mood/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace mood {

inline std::string synthetic_word(const char* prefix, std::size_t i)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

namespace detail {

inline std::vector<double> random_weights(Rng& rng, std::size_t n)
{
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w)
  {
    x = 0.25 + rng.uniform();
    s += x;
  }
  for (auto& x : w) x /= s;
  return w;
}

inline std::vector<std::pair<std::string, double>> to_word_probs(const std::vector<std::string>& words,
                                                                 std::vector<double> p)
{
  double s = 0.0;
  for (double x : p) s += x;
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (p[i] > 0.0) out.emplace_back(words[i], p[i] / s);
  // Renormalize exactly so the sum check in generate_synthetic passes.
  double t = 0.0;
  for (auto& wp : out) t += wp.second;
  for (auto& wp : out) wp.second /= t;
  return out;
}

} // namespace detail

struct FlatConfig
{
  std::size_t classes = 3;
  std::size_t docs = 300; // total, spread as evenly as possible
  std::size_t class_words = 20;
  std::size_t background_words = 50;
  /// Mass every class spends on the shared background vocabulary.
  double background = 0.5;
};

/// Independent classes "class0", "class1", ... (zero-padded to sort
/// numerically), each with its own words over a shared background.
inline std::vector<ClassSpec> flat_classes(const FlatConfig& cfg, std::uint64_t seed)
{
  if (cfg.classes < 2) throw InvalidArgument("flat_classes: needs at least 2 classes");
  if (cfg.docs < cfg.classes) throw InvalidArgument("flat_classes: fewer documents than classes");
  if (!(cfg.background >= 0.0 && cfg.background < 1.0)) throw InvalidArgument("background mass must lie in [0,1)");
  Rng rng(seed);
  const std::size_t V = cfg.background_words + cfg.classes * cfg.class_words;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < V; ++i) words.push_back(synthetic_word("w", i));
  const auto bg = detail::random_weights(rng, cfg.background_words);
  const int width = static_cast<int>(std::to_string(cfg.classes - 1).size());

  std::vector<ClassSpec> out;
  for (std::size_t c = 0; c < cfg.classes; ++c)
  {
    std::vector<double> p(V, 0.0);
    for (std::size_t i = 0; i < cfg.background_words; ++i) p[i] = cfg.background * bg[i];
    const auto cw = detail::random_weights(rng, cfg.class_words);
    const std::size_t c0 = cfg.background_words + c * cfg.class_words;
    for (std::size_t i = 0; i < cfg.class_words; ++i) p[c0 + i] = (1.0 - cfg.background) * cw[i];
    char name[32];
    std::snprintf(name, sizeof name, "class%0*zu", width, c);
    const std::size_t n = cfg.docs / cfg.classes + (c < cfg.docs % cfg.classes ? 1 : 0);
    out.push_back({name, detail::to_word_probs(words, p), n});
  }
  return out;
}

struct SuperTopicConfig
{
  std::size_t topics = 4;
  std::size_t classes_per_topic = 3;
  /// Mass of each class distribution taken from its super-topic's distribution.
  double shared = 0.8;
  std::size_t topic_words = 40;
  std::size_t class_words = 15;
  std::size_t background_words = 60;
  /// Mass of the topic distribution spent on background words common to all.
  double background = 0.3;
  std::size_t docs_per_class = 80;
};

/// Classes named "t<topic>c<class>" whose word distributions mix a shared
/// super-topic distribution (weight `shared`) with a class-specific one.
inline std::vector<ClassSpec> super_topic_classes(const SuperTopicConfig& cfg, std::uint64_t seed)
{
  if (cfg.topics == 0 || cfg.classes_per_topic == 0) throw InvalidArgument("super_topic_classes: empty layout");
  if (!(cfg.shared >= 0.0 && cfg.shared <= 1.0)) throw InvalidArgument("shared mass must lie in [0,1]");
  Rng rng(seed);
  const std::size_t num_classes = cfg.topics * cfg.classes_per_topic;
  const std::size_t V = cfg.background_words + cfg.topics * cfg.topic_words + num_classes * cfg.class_words;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < V; ++i) words.push_back(synthetic_word("w", i));

  const auto bg = detail::random_weights(rng, cfg.background_words);
  std::vector<ClassSpec> out;
  for (std::size_t t = 0; t < cfg.topics; ++t)
  {
    std::vector<double> topic(V, 0.0);
    for (std::size_t i = 0; i < cfg.background_words; ++i) topic[i] = cfg.background * bg[i];
    const auto tw = detail::random_weights(rng, cfg.topic_words);
    const std::size_t t0 = cfg.background_words + t * cfg.topic_words;
    for (std::size_t i = 0; i < cfg.topic_words; ++i) topic[t0 + i] = (1.0 - cfg.background) * tw[i];

    for (std::size_t k = 0; k < cfg.classes_per_topic; ++k)
    {
      const std::size_t c = t * cfg.classes_per_topic + k;
      std::vector<double> p(V);
      for (std::size_t i = 0; i < V; ++i) p[i] = cfg.shared * topic[i];
      const auto cw = detail::random_weights(rng, cfg.class_words);
      const std::size_t c0 = cfg.background_words + cfg.topics * cfg.topic_words + c * cfg.class_words;
      for (std::size_t i = 0; i < cfg.class_words; ++i) p[c0 + i] += (1.0 - cfg.shared) * cw[i];
      char name[32];
      std::snprintf(name, sizeof name, "t%zuc%zu", t, k);
      out.push_back({name, detail::to_word_probs(words, p), cfg.docs_per_class});
    }
  }
  return out;
}

struct PlantedPairsConfig
{
  std::size_t pairs = 4;
  /// Probability mass on which the two members of a pair differ.
  double within_pair_difference = 0.02;
  std::size_t pair_words = 30;
  std::size_t background_words = 40;
  double background = 0.3;
  std::size_t docs_per_class = 60;
};

/// Classes "p<k>a" and "p<k>b" that share all but a sliver of their word
/// distribution; different pairs use disjoint vocabularies.
inline std::vector<ClassSpec> planted_pair_classes(const PlantedPairsConfig& cfg, std::uint64_t seed)
{
  Rng rng(seed);
  const std::size_t V = cfg.background_words + cfg.pairs * (cfg.pair_words + 2);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < V; ++i) words.push_back(synthetic_word("w", i));
  const auto bg = detail::random_weights(rng, cfg.background_words);

  std::vector<ClassSpec> out;
  for (std::size_t k = 0; k < cfg.pairs; ++k)
  {
    const auto pw = detail::random_weights(rng, cfg.pair_words);
    const std::size_t p0 = cfg.background_words + k * (cfg.pair_words + 2);
    for (int member = 0; member < 2; ++member)
    {
      std::vector<double> p(V, 0.0);
      for (std::size_t i = 0; i < cfg.background_words; ++i) p[i] = cfg.background * bg[i];
      const double own = 1.0 - cfg.background - cfg.within_pair_difference;
      for (std::size_t i = 0; i < cfg.pair_words; ++i) p[p0 + i] = own * pw[i];
      p[p0 + cfg.pair_words + static_cast<std::size_t>(member)] = cfg.within_pair_difference;
      char name[32];
      std::snprintf(name, sizeof name, "p%zu%c", k, member == 0 ? 'a' : 'b');
      out.push_back({name, detail::to_word_probs(words, p), cfg.docs_per_class});
    }
  }
  return out;
}

/// A 2D latent emotion space (sentiment s, engagement e in [-1,1]). Word
/// usage at a latent point is linear in it: four pole vocabularies
/// (positive, negative, engaged, calm) receive mass proportional to
/// (1+s)/2, (1-s)/2, (1+e)/2, (1-e)/2, and the rest goes to neutral words.
/// Review documents add non-emotional "argument" words whose polarity
/// tracks the rating directly.
struct LatentSentimentConfig
{
  std::size_t pole_words = 20;
  std::size_t neutral_words = 80;
  std::size_t argument_words = 20; // per polarity
  double sentiment_mass = 0.35;
  double engagement_mass = 0.25;
  std::size_t doc_length = 30;

  /// Emotion classes on a grid of sentiment x engagement positions.
  std::vector<double> class_sentiments = {-0.8, -0.3, 0.3, 0.8};
  std::vector<double> class_engagements = {-0.6, 0.6};
  double class_spread = 0.15;
  std::size_t docs_per_class = 150;

  /// Reviews: rating r in [1, levels] sits at sentiment (r - mid)/half * reach.
  int levels = 5;
  double review_reach = 0.8;
  double review_engagement = 0.3;
  double review_noise = 0.1;
  /// Fraction of review words drawn from the argument vocabulary.
  double argument_fraction = 0.05;
};

namespace detail {

struct LatentVocab
{
  std::vector<std::string> pos, neg, engaged, calm, neutral, arg_good, arg_bad;
};

inline LatentVocab latent_vocab(const LatentSentimentConfig& cfg)
{
  LatentVocab v;
  for (std::size_t i = 0; i < cfg.pole_words; ++i)
  {
    v.pos.push_back(synthetic_word("pos", i));
    v.neg.push_back(synthetic_word("neg", i));
    v.engaged.push_back(synthetic_word("act", i));
    v.calm.push_back(synthetic_word("qui", i));
  }
  for (std::size_t i = 0; i < cfg.neutral_words; ++i) v.neutral.push_back(synthetic_word("w", i));
  for (std::size_t i = 0; i < cfg.argument_words; ++i)
  {
    v.arg_good.push_back(synthetic_word("arggood", i));
    v.arg_bad.push_back(synthetic_word("argbad", i));
  }
  return v;
}

inline const std::string& pick(Rng& rng, const std::vector<std::string>& words)
{
  return words[rng.below(words.size())];
}

/// One word from the emotional distribution at (s, e).
inline const std::string& emotional_word(Rng& rng, const LatentVocab& v, const LatentSentimentConfig& cfg,
                                         double s, double e)
{
  const double ps = cfg.sentiment_mass * 0.5 * (1.0 + s);
  const double ns = cfg.sentiment_mass * 0.5 * (1.0 - s);
  const double pe = cfg.engagement_mass * 0.5 * (1.0 + e);
  const double ne = cfg.engagement_mass * 0.5 * (1.0 - e);
  double u = rng.uniform();
  if ((u -= ps) < 0) return pick(rng, v.pos);
  if ((u -= ns) < 0) return pick(rng, v.neg);
  if ((u -= pe) < 0) return pick(rng, v.engaged);
  if ((u -= ne) < 0) return pick(rng, v.calm);
  return pick(rng, v.neutral);
}

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

} // namespace detail

/// Emotion corpus over the latent grid; classes are named "s<i>e<j>".
inline Corpus latent_emotion_corpus(const LatentSentimentConfig& cfg, std::uint64_t seed)
{
  Rng rng(seed);
  const auto v = detail::latent_vocab(cfg);
  std::vector<Document> docs;
  char buf[48];
  for (std::size_t i = 0; i < cfg.class_sentiments.size(); ++i)
    for (std::size_t j = 0; j < cfg.class_engagements.size(); ++j)
    {
      std::snprintf(buf, sizeof buf, "s%zue%zu", i, j);
      const std::string label = buf;
      for (std::size_t k = 0; k < cfg.docs_per_class; ++k)
      {
        const double s = detail::clamp_unit(cfg.class_sentiments[i] + cfg.class_spread * rng.normal());
        const double e = detail::clamp_unit(cfg.class_engagements[j] + cfg.class_spread * rng.normal());
        std::string text;
        for (std::size_t t = 0; t < cfg.doc_length; ++t)
        {
          if (t) text += ' ';
          text += detail::emotional_word(rng, v, cfg, s, e);
        }
        std::snprintf(buf, sizeof buf, "emo-%06zu", docs.size());
        docs.push_back({buf, std::move(text), label, std::nullopt});
      }
    }
  return Corpus(CorpusKind::emotion, std::move(docs));
}

/// Review corpus with ratings drawn uniformly from 1..levels. `id_prefix`
/// keeps ids of separately generated pools distinct.
inline Corpus latent_rating_corpus(const LatentSentimentConfig& cfg, std::size_t num_docs, std::uint64_t seed,
                                   const std::string& id_prefix = "rev")
{
  if (cfg.levels < 2) throw InvalidArgument("latent_rating_corpus: needs at least 2 levels");
  if (num_docs == 0) throw InvalidArgument("latent_rating_corpus: zero documents");
  Rng rng(seed);
  const auto v = detail::latent_vocab(cfg);
  const double mid = 0.5 * (1.0 + cfg.levels);
  const double half = 0.5 * (cfg.levels - 1);
  std::vector<Document> docs;
  char buf[64];
  for (std::size_t k = 0; k < num_docs; ++k)
  {
    const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.levels)));
    const double polarity = (r - mid) / half; // in [-1, 1]
    const double s = detail::clamp_unit(cfg.review_reach * polarity + cfg.review_noise * rng.normal());
    const double e = detail::clamp_unit(cfg.review_engagement + 0.2 * rng.normal());
    std::string text;
    for (std::size_t t = 0; t < cfg.doc_length; ++t)
    {
      if (t) text += ' ';
      if (rng.uniform() < cfg.argument_fraction)
        text += rng.uniform() < 0.5 * (1.0 + polarity) ? detail::pick(rng, v.arg_good) : detail::pick(rng, v.arg_bad);
      else
        text += detail::emotional_word(rng, v, cfg, s, e);
    }
    std::snprintf(buf, sizeof buf, "%s-%06zu", id_prefix.c_str(), k);
    docs.push_back({buf, std::move(text), std::nullopt, r});
  }
  return Corpus(CorpusKind::rating, std::move(docs));
}

} // namespace mood
