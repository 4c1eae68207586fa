#pragma once

// Labeled corpora: JSONL loading and writing, stratified splitting and
// sampling of synthetic corpora from known word distributions.

#include "mood/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mood {

enum class CorpusKind
{
  emotion,
  rating
};

inline const char* to_string(CorpusKind kind)
{
  return kind == CorpusKind::emotion ? "emotion" : "rating";
}

inline CorpusKind parse_corpus_kind(const std::string& s)
{
  if (s == "emotion") return CorpusKind::emotion;
  if (s == "rating") return CorpusKind::rating;
  throw InvalidArgument("unknown corpus kind '" + s + "' (expected emotion|rating)");
}

struct Document
{
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::optional<int> rating;
};

/// An ordered, kind-consistent, non-empty list of documents with unique ids.
class Corpus
{
public:
  Corpus(CorpusKind kind, std::vector<Document> docs)
      : kind_(kind), docs_(std::move(docs))
  {
    if (docs_.empty()) throw CorpusError("corpus is empty");
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < docs_.size(); ++i)
    {
      const Document& d = docs_[i];
      check_kind(d, "document " + std::to_string(i));
      if (!ids.insert(d.id).second)
        throw CorpusError("duplicate id '" + d.id + "'");
    }
  }

  CorpusKind kind() const noexcept { return kind_; }
  const std::vector<Document>& docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }

  /// Distinct emotion labels in lexicographic order (emotion corpora).
  std::vector<std::string> labels() const
  {
    std::set<std::string> s;
    for (const auto& d : docs_)
      if (d.label) s.insert(*d.label);
    return {s.begin(), s.end()};
  }

  /// Distinct ratings in ascending order (rating corpora).
  std::vector<int> rating_levels() const
  {
    std::set<int> s;
    for (const auto& d : docs_)
      if (d.rating) s.insert(*d.rating);
    return {s.begin(), s.end()};
  }

  /// Class key of a document: its label, or its rating rendered as text.
  std::string key(const Document& d) const
  {
    return kind_ == CorpusKind::emotion ? *d.label : std::to_string(*d.rating);
  }

  /// Distinct class keys, ordered as labels() or rating_levels().
  std::vector<std::string> keys() const
  {
    if (kind_ == CorpusKind::emotion) return labels();
    std::vector<std::string> out;
    for (int r : rating_levels()) out.push_back(std::to_string(r));
    return out;
  }

  void check_kind(const Document& d, const std::string& where) const
  {
    if (kind_ == CorpusKind::emotion)
    {
      if (d.rating) throw CorpusError(where + ": mixed kinds (rating in an emotion corpus)");
      if (!d.label) throw CorpusError(where + ": missing \"label\" field");
    }
    else
    {
      if (d.label) throw CorpusError(where + ": mixed kinds (label in a rating corpus)");
      if (!d.rating) throw CorpusError(where + ": missing \"rating\" field");
    }
  }

private:
  CorpusKind kind_;
  std::vector<Document> docs_;
};

namespace detail {

inline Document parse_record(const std::string& line, CorpusKind kind, std::size_t lineno)
{
  const std::string where = "line " + std::to_string(lineno);
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(line);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw CorpusError(where + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw CorpusError(where + ": record is not a JSON object");

  Document d;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string())
    throw CorpusError(where + ": missing or non-string \"id\" field");
  d.id = id->get<std::string>();
  auto text = j.find("text");
  if (text == j.end() || !text->is_string())
    throw CorpusError(where + ": missing or non-string \"text\" field");
  d.text = text->get<std::string>();

  auto label = j.find("label");
  auto rating = j.find("rating");
  if (label != j.end() && rating != j.end())
    throw CorpusError(where + ": record has both \"label\" and \"rating\"");
  if (label != j.end())
  {
    if (!label->is_string() || label->get<std::string>().empty())
      throw CorpusError(where + ": \"label\" must be a non-empty string");
    d.label = label->get<std::string>();
  }
  if (rating != j.end())
  {
    if (rating->is_number_integer())
      d.rating = rating->get<int>();
    else if (rating->is_number_float() &&
             std::floor(rating->get<double>()) == rating->get<double>())
      d.rating = static_cast<int>(rating->get<double>());
    else
      throw CorpusError(where + ": \"rating\" must be an integer");
  }

  if (kind == CorpusKind::emotion)
  {
    if (d.rating) throw CorpusError(where + ": mixed kinds (rating in an emotion corpus)");
    if (!d.label) throw CorpusError(where + ": missing \"label\" field");
  }
  else
  {
    if (d.label) throw CorpusError(where + ": mixed kinds (label in a rating corpus)");
    if (!d.rating) throw CorpusError(where + ": missing \"rating\" field");
  }
  return d;
}

} // namespace detail

/// Streams JSONL records one at a time. Text is never held for more than the
/// current line, so callers can featurize corpora larger than memory.
inline std::size_t for_each_record(std::istream& in, CorpusKind kind,
                                   const std::function<void(Document&&)>& sink)
{
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Document d = detail::parse_record(line, kind, lineno);
    if (!ids.insert(d.id).second)
      throw CorpusError("line " + std::to_string(lineno) + ": duplicate id '" + d.id + "'");
    sink(std::move(d));
  }
  if (lineno == 0) throw CorpusError("corpus file is empty");
  return lineno;
}

inline Corpus read_corpus(std::istream& in, CorpusKind kind)
{
  std::vector<Document> docs;
  for_each_record(in, kind, [&](Document&& d) { docs.push_back(std::move(d)); });
  Corpus corpus(kind, std::move(docs));
  if (kind == CorpusKind::emotion && corpus.labels().size() < 2)
    throw CorpusError("emotion corpus needs at least 2 distinct labels");
  return corpus;
}

inline Corpus load_corpus(const std::string& path, CorpusKind kind)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  try
  {
    return read_corpus(in, kind);
  }
  catch (const CorpusError& e)
  {
    throw CorpusError(path + ": " + e.what());
  }
}

/// Canonical form: one compact object per line, keys in the order
/// id, text, label|rating, LF line endings.
inline void write_corpus(const Corpus& corpus, std::ostream& out)
{
  for (const auto& d : corpus.docs())
  {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["text"] = d.text;
    if (d.label) j["label"] = *d.label;
    if (d.rating) j["rating"] = *d.rating;
    out << j.dump() << '\n';
  }
}

inline void save_corpus(const Corpus& corpus, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
  write_corpus(corpus, out);
}

struct SplitSpec
{
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct SplitResult
{
  Corpus train;
  Corpus test;
};

/// Per-class train quotas summing to round(fraction * n). Each class first
/// gets floor(fraction * n_c), raised to 1 so it is present in train; the
/// total is then corrected by largest remainder (ties to the earlier class).
inline std::vector<std::size_t> stratified_quotas(const std::vector<std::size_t>& counts,
                                                  double fraction)
{
  std::size_t n = 0;
  for (auto c : counts) n += c;
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  std::vector<std::size_t> quota(counts.size());
  std::vector<double> remainder(counts.size());
  std::size_t sum = 0;
  for (std::size_t c = 0; c < counts.size(); ++c)
  {
    const double exact = fraction * static_cast<double>(counts[c]);
    quota[c] = std::min(counts[c], static_cast<std::size_t>(std::floor(exact)));
    remainder[c] = exact - static_cast<double>(quota[c]);
    if (quota[c] == 0 && counts[c] > 0) quota[c] = 1;
    sum += quota[c];
  }
  while (sum < target)
  {
    std::size_t best = counts.size();
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (quota[c] < counts[c] && (best == counts.size() || remainder[c] > remainder[best]))
        best = c;
    ++quota[best];
    remainder[best] -= 1.0;
    ++sum;
  }
  while (sum > target)
  {
    // Prefer classes that keep a train member after the decrement.
    std::size_t best = counts.size();
    for (int pass = 0; pass < 2 && best == counts.size(); ++pass)
      for (std::size_t c = 0; c < counts.size(); ++c)
      {
        const std::size_t floor_q = pass == 0 ? 1 : 0;
        if (quota[c] > floor_q && (best == counts.size() || remainder[c] < remainder[best]))
          best = c;
      }
    --quota[best];
    remainder[best] += 1.0;
    --sum;
  }
  return quota;
}

/// Stratified random split. Both parts keep the input's document order.
inline SplitResult split(const Corpus& corpus, const SplitSpec& spec)
{
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0,1), got " +
                          std::to_string(spec.train_fraction));
  const std::size_t n = corpus.size();
  const auto target =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (target == 0 || target == n)
    throw InvalidArgument("split of " + std::to_string(n) + " documents at fraction " +
                          std::to_string(spec.train_fraction) + " leaves one side empty");

  const auto keys = corpus.keys();
  std::map<std::string, std::size_t> key_index;
  for (std::size_t k = 0; k < keys.size(); ++k) key_index[keys[k]] = k;
  std::vector<std::vector<std::size_t>> members(keys.size());
  for (std::size_t i = 0; i < n; ++i) members[key_index.at(corpus.key(corpus[i]))].push_back(i);

  std::vector<std::size_t> counts;
  for (const auto& m : members) counts.push_back(m.size());
  const auto quota = stratified_quotas(counts, spec.train_fraction);

  Rng rng(spec.seed);
  std::vector<char> in_train(n, 0);
  for (std::size_t k = 0; k < keys.size(); ++k)
  {
    auto m = members[k];
    rng.shuffle(m.begin(), m.end());
    for (std::size_t r = 0; r < quota[k]; ++r) in_train[m[r]] = 1;
  }

  std::vector<Document> train, test;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : test).push_back(corpus[i]);
  return {Corpus(corpus.kind(), std::move(train)), Corpus(corpus.kind(), std::move(test))};
}

/// Documents whose class key is in `keep`, in corpus order.
inline Corpus filter_keys(const Corpus& corpus, const std::set<std::string>& keep)
{
  std::vector<Document> out;
  for (const auto& d : corpus.docs())
    if (keep.count(corpus.key(d))) out.push_back(d);
  return Corpus(corpus.kind(), std::move(out));
}

/// One class of a synthetic corpus: a categorical distribution over words.
struct ClassSpec
{
  std::string label;
  std::vector<std::pair<std::string, double>> word_probs;
  std::size_t doc_count = 0;
};

/// Draws from a categorical distribution by inverse CDF.
class CategoricalSampler
{
public:
  CategoricalSampler() = default;

  explicit CategoricalSampler(const std::vector<double>& probs)
  {
    double acc = 0.0;
    cdf_.reserve(probs.size());
    for (double p : probs)
    {
      acc += p;
      cdf_.push_back(acc);
    }
  }

  std::size_t operator()(Rng& rng) const
  {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto idx = static_cast<std::size_t>(it - cdf_.begin());
    if (idx >= cdf_.size()) idx = cdf_.size() - 1;
    return idx;
  }

private:
  std::vector<double> cdf_;
};

inline void validate_distribution(const std::vector<std::pair<std::string, double>>& probs,
                                  const std::string& what)
{
  if (probs.empty()) throw InvalidArgument(what + ": empty word distribution");
  double sum = 0.0;
  for (const auto& [w, p] : probs)
  {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InvalidArgument(what + ": invalid probability for word '" + w + "'");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgument(what + ": probabilities sum to " + std::to_string(sum) + ", not 1");
}

/// Samples documents i.i.d. from each class's word distribution, class by
/// class in the given order. Ids are "syn-000000", "syn-000001", ...
inline Corpus generate_synthetic(const std::vector<ClassSpec>& classes, std::size_t doc_length,
                                 std::uint64_t seed)
{
  if (classes.empty()) throw InvalidArgument("generate_synthetic: no classes");
  if (doc_length == 0) throw InvalidArgument("generate_synthetic: doc_length must be positive");
  for (const auto& c : classes)
  {
    validate_distribution(c.word_probs, "class '" + c.label + "'");
    if (c.doc_count == 0) throw InvalidArgument("class '" + c.label + "': zero doc-count");
  }

  Rng rng(seed);
  std::vector<Document> docs;
  char id[32];
  for (const auto& c : classes)
  {
    std::vector<double> p;
    for (const auto& wp : c.word_probs) p.push_back(wp.second);
    const CategoricalSampler sample(p);
    for (std::size_t k = 0; k < c.doc_count; ++k)
    {
      std::string text;
      for (std::size_t t = 0; t < doc_length; ++t)
      {
        if (t) text += ' ';
        text += c.word_probs[sample(rng)].first;
      }
      std::snprintf(id, sizeof id, "syn-%06zu", docs.size());
      docs.push_back(Document{id, std::move(text), c.label, std::nullopt});
    }
  }
  return Corpus(CorpusKind::emotion, std::move(docs));
}

} // namespace mood
