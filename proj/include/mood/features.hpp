#pragma once

// Text featurization: tokenizer with negation merging, frozen vocabulary and
// sparse term-frequency vectors.

#include "mood/common.hpp"
#include "mood/corpus.hpp"
#include "mood/porter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mood {

struct TokenizerOptions
{
  bool stem = true;
  bool merge_negation = true;
  /// 1 = unigrams, 2 = unigrams plus adjacent-pair bigrams ("a_b").
  int ngram = 1;
};

namespace detail {

inline bool is_word_byte(unsigned char c)
{
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c >= 0x80;
}

inline bool is_negator(std::string_view w)
{
  return w == "no" || w == "not" || w == "never" || w == "cannot";
}

struct RawToken
{
  std::string text;
  bool negator = false;
};

inline std::vector<RawToken> split_words(std::string_view text)
{
  std::string lowered;
  lowered.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i)
  {
    // Typographic apostrophe U+2019 becomes ASCII.
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99)
    {
      lowered += '\'';
      i += 2;
      continue;
    }
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    lowered += c;
  }

  std::vector<RawToken> out;
  std::size_t i = 0;
  while (i < lowered.size())
  {
    while (i < lowered.size() && !is_word_byte(static_cast<unsigned char>(lowered[i]))) ++i;
    std::size_t j = i;
    while (j < lowered.size() && is_word_byte(static_cast<unsigned char>(lowered[j]))) ++j;
    if (j == i) break;
    std::string word = lowered.substr(i, j - i);
    i = j;

    while (!word.empty() && word.front() == '\'') word.erase(word.begin());
    while (!word.empty() && word.back() == '\'') word.pop_back();
    if (word.empty()) continue;

    bool clitic = false;
    if (word.size() >= 3 && word.compare(word.size() - 3, 3, "n't") == 0)
    {
      clitic = true;
      word.resize(word.size() - 3);
      if (word == "ca") word = "can";
      else if (word == "wo") word = "will";
      else if (word == "sha") word = "shall";
    }
    std::erase(word, '\'');
    if (!word.empty()) out.push_back({word, !clitic && is_negator(word)});
    if (clitic) out.push_back({"not", true});
  }
  return out;
}

} // namespace detail

/// Lower-cases, strips punctuation and stems. A negator (no, not, never,
/// cannot, or an "n't" clitic) is merged with the next non-negator token as
/// "not-<stem>"; a negator with no such successor is kept unmerged.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts = {})
{
  const auto raw = detail::split_words(text);
  auto stem = [&](const std::string& w) { return opts.stem ? porter_stem(w) : w; };

  std::vector<std::string> tokens;
  tokens.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
  {
    if (raw[i].negator && opts.merge_negation)
    {
      if (i + 1 < raw.size() && !raw[i + 1].negator)
      {
        tokens.push_back("not-" + stem(raw[i + 1].text));
        ++i;
      }
      else
        tokens.push_back(raw[i].text);
      continue;
    }
    tokens.push_back(raw[i].negator ? raw[i].text : stem(raw[i].text));
  }

  if (opts.ngram >= 2)
  {
    const std::size_t n = tokens.size();
    for (std::size_t i = 0; i + 1 < n; ++i) tokens.push_back(tokens[i] + "_" + tokens[i + 1]);
  }
  return tokens;
}

/// Dense term index with per-term corpus frequency. Immutable once built.
class Vocabulary
{
public:
  Vocabulary() = default;

  /// Entries are taken in index order.
  explicit Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries)
  {
    terms_.reserve(entries.size());
    freqs_.reserve(entries.size());
    for (auto& [term, freq] : entries)
    {
      if (!index_.emplace(term, static_cast<std::uint32_t>(terms_.size())).second)
        throw FormatError("vocabulary: duplicate term '" + term + "'");
      terms_.push_back(std::move(term));
      freqs_.push_back(freq);
    }
    fingerprint_ = compute_fingerprint();
  }

  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  std::uint64_t frequency(std::size_t i) const { return freqs_.at(i); }

  std::optional<std::uint32_t> find(const std::string& term) const
  {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// FNV-1a over the ordered (term, frequency) list. Never zero.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::vector<std::pair<std::string, std::uint64_t>> entries() const
  {
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (std::size_t i = 0; i < terms_.size(); ++i) out.emplace_back(terms_[i], freqs_[i]);
    return out;
  }

private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t fingerprint_ = 0;

  std::uint64_t compute_fingerprint() const
  {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](std::string_view s) {
      for (unsigned char c : s)
      {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (std::size_t i = 0; i < terms_.size(); ++i)
    {
      feed(terms_[i]);
      feed("\t");
      feed(std::to_string(freqs_[i]));
      feed("\n");
    }
    return h == 0 ? 1 : h;
  }
};

inline std::string fingerprint_hex(std::uint64_t fp)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

inline std::uint64_t parse_fingerprint_hex(const std::string& s)
{
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw FormatError("malformed vocabulary fingerprint '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

/// Accumulates token counts; `build` freezes them into a Vocabulary.
class VocabularyBuilder
{
public:
  void add(const std::vector<std::string>& tokens)
  {
    for (const auto& t : tokens) ++counts_[t];
  }

  /// Keeps terms with count >= min_count, ordered by descending count and
  /// then lexicographically.
  Vocabulary build(std::uint64_t min_count) const
  {
    if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto& [term, count] : counts_)
      if (count >= min_count) kept.emplace_back(term, count);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return Vocabulary(std::move(kept));
  }

private:
  std::map<std::string, std::uint64_t> counts_;
};

inline Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count,
                                   const TokenizerOptions& opts = {})
{
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
  VocabularyBuilder builder;
  for (const auto& d : corpus.docs()) builder.add(tokenize(d.text, opts));
  return builder.build(min_count);
}

enum class Normalization
{
  none,
  l1,
  l2
};

inline const char* to_string(Normalization n)
{
  switch (n)
  {
  case Normalization::none: return "none";
  case Normalization::l1: return "l1";
  case Normalization::l2: return "l2";
  }
  return "none";
}

inline Normalization parse_normalization(const std::string& s)
{
  if (s == "none") return Normalization::none;
  if (s == "l1") return Normalization::l1;
  if (s == "l2") return Normalization::l2;
  throw InvalidArgument("unknown normalization '" + s + "' (expected none|l1|l2)");
}

/// Sparse non-negative vector with strictly increasing indices and no stored
/// zeros. `vocab_id` is the fingerprint of the vocabulary the indices refer
/// to, or 0 when the vector is not bound to one.
struct SparseVector
{
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::uint64_t vocab_id = 0;

  std::size_t nnz() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }

  double sum() const
  {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }

  /// Builds from unordered (index, value) pairs; duplicates are summed and
  /// zeros dropped.
  static SparseVector from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs,
                                 std::uint64_t vocab_id = 0)
  {
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector v;
    v.vocab_id = vocab_id;
    for (const auto& [i, x] : pairs)
    {
      if (!v.indices.empty() && v.indices.back() == i)
        v.values.back() += x;
      else
      {
        v.indices.push_back(i);
        v.values.push_back(x);
      }
    }
    std::size_t w = 0;
    for (std::size_t r = 0; r < v.indices.size(); ++r)
      if (v.values[r] != 0.0)
      {
        v.indices[w] = v.indices[r];
        v.values[w] = v.values[r];
        ++w;
      }
    v.indices.resize(w);
    v.values.resize(w);
    return v;
  }
};

inline void normalize(SparseVector& v, Normalization norm)
{
  double scale = 0.0;
  if (norm == Normalization::l1)
    for (double x : v.values) scale += std::abs(x);
  else if (norm == Normalization::l2)
  {
    for (double x : v.values) scale += x * x;
    scale = std::sqrt(scale);
  }
  else
    return;
  if (scale > 0.0)
    for (double& x : v.values) x /= scale;
}

/// Term counts of in-vocabulary tokens, then optional normalization.
inline SparseVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                              Normalization norm = Normalization::l1)
{
  std::vector<std::pair<std::uint32_t, double>> pairs;
  pairs.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto idx = vocab.find(t)) pairs.emplace_back(*idx, 1.0);
  SparseVector v = SparseVector::from_pairs(std::move(pairs), vocab.fingerprint());
  normalize(v, norm);
  return v;
}

/// Vocabulary plus the tokenizer and normalization settings it was built with.
struct Featurizer
{
  Vocabulary vocab;
  TokenizerOptions tokenizer;
  Normalization normalization = Normalization::l1;

  SparseVector operator()(std::string_view text) const
  {
    return vectorize(tokenize(text, tokenizer), vocab, normalization);
  }

  std::size_t dim() const noexcept { return vocab.size(); }
};

inline Featurizer make_featurizer(const Corpus& corpus, std::uint64_t min_count,
                                  const TokenizerOptions& tok = {},
                                  Normalization norm = Normalization::l1)
{
  return Featurizer{build_vocabulary(corpus, min_count, tok), tok, norm};
}

/// A vectorized corpus: one sparse row and one class index per document.
/// `targets` holds the numeric ratings for rating corpora.
struct Dataset
{
  std::vector<std::string> classes;
  std::vector<SparseVector> x;
  std::vector<int> y;
  std::vector<double> targets;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return x.size(); }
  std::size_t num_classes() const noexcept { return classes.size(); }

  std::vector<std::size_t> class_counts() const
  {
    std::vector<std::size_t> c(classes.size(), 0);
    for (int yi : y) ++c[static_cast<std::size_t>(yi)];
    return c;
  }
};

/// Vectorizes every document. Class indices follow `classes` when given
/// (documents of other classes are an error), else the corpus's own keys.
inline Dataset make_dataset(const Corpus& corpus, const Featurizer& f,
                            std::vector<std::string> classes = {})
{
  Dataset ds;
  ds.classes = classes.empty() ? corpus.keys() : std::move(classes);
  ds.dim = f.dim();
  std::unordered_map<std::string, int> idx;
  for (std::size_t c = 0; c < ds.classes.size(); ++c)
    idx.emplace(ds.classes[c], static_cast<int>(c));
  ds.x.reserve(corpus.size());
  for (const auto& d : corpus.docs())
  {
    const auto key = corpus.key(d);
    auto it = idx.find(key);
    if (it == idx.end()) throw InvalidArgument("document '" + d.id + "' has unknown class '" + key + "'");
    ds.x.push_back(f(d.text));
    ds.y.push_back(it->second);
    if (d.rating) ds.targets.push_back(static_cast<double>(*d.rating));
  }
  return ds;
}

} // namespace mood
