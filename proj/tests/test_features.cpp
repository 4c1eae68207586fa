#include "mood/corpus.hpp"
#include "mood/features.hpp"
#include "mood/porter.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace mood;

namespace {

using Tokens = std::vector<std::string>;

Corpus from_texts(const std::vector<std::pair<std::string, std::string>>& texts)
{
  std::vector<Document> docs;
  for (std::size_t i = 0; i < texts.size(); ++i)
    docs.push_back({"d" + std::to_string(i), texts[i].second, texts[i].first, std::nullopt});
  return Corpus(CorpusKind::emotion, std::move(docs));
}

} // namespace

TEST(Porter, MatchesFrozenReferenceOutput)
{
  std::ifstream in(std::string(MOOD_TEST_DATA_DIR) + "/porter_reference.txt");
  ASSERT_TRUE(in) << "missing reference data";
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
  {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word, stem;
    ls >> word >> stem;
    EXPECT_EQ(porter_stem(word), stem) << word;
    ++n;
  }
  EXPECT_GT(n, 400u);
}

TEST(Porter, ClassicCases)
{
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("ponies"), "poni");
  EXPECT_EQ(porter_stem("relational"), "relat");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("generalizations"), "gener");
  EXPECT_EQ(porter_stem("happy"), "happi");
  EXPECT_EQ(porter_stem("is"), "is");
  EXPECT_EQ(porter_stem(""), "");
}

TEST(Tokenize, MergesNegatorWithFollowingToken)
{
  EXPECT_EQ(tokenize("not good"), (Tokens{"not-good"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("Never again, never!"), (Tokens{"not-again", "never"}));
}

TEST(Tokenize, LowercasesStripsPunctuationAndStems)
{
  EXPECT_EQ(tokenize("I LOVED the Puppies!!!"), (Tokens{"i", "love", "the", "puppi"}));
  EXPECT_EQ(tokenize("'quoted' words"), (Tokens{"quot", "word"}));
}

TEST(Tokenize, SplitsClitics)
{
  EXPECT_EQ(tokenize("I don't care"), (Tokens{"i", "do", "not-care"}));
  EXPECT_EQ(tokenize("can't stop"), (Tokens{"can", "not-stop"}));
  EXPECT_EQ(tokenize("won\xE2\x80\x99t go"), (Tokens{"will", "not-go"}));
  EXPECT_EQ(tokenize("cannot"), (Tokens{"cannot"}));
}

TEST(Tokenize, ConsecutiveNegatorsMergeOnlyTheLast)
{
  EXPECT_EQ(tokenize("not never happy"), (Tokens{"not", "not-happi"}));
}

TEST(Tokenize, OptionsDisableStemmingAndNegation)
{
  TokenizerOptions raw;
  raw.stem = false;
  raw.merge_negation = false;
  EXPECT_EQ(tokenize("not good puppies", raw), (Tokens{"not", "good", "puppies"}));
  TokenizerOptions bi;
  bi.ngram = 2;
  EXPECT_EQ(tokenize("a b c", bi), (Tokens{"a", "b", "c", "a_b", "b_c"}));
}

TEST(Tokenize, IsIdempotentOnItsOwnOutputWithoutStemming)
{
  // Porter stems are not always fixed points (abus -> abu), so the property
  // is checked on the stemmer-free pipeline. Negation merging is off since
  // "not-x" contains a separator.
  TokenizerOptions o;
  o.stem = false;
  o.merge_negation = false;
  Rng rng(4);
  const std::vector<std::string> words{"Happy", "not", "sad", "don't", "never", "Cats,", "it's", "ok!", "'no'"};
  for (int trial = 0; trial < 200; ++trial)
  {
    std::string text;
    for (int i = 0; i < 8; ++i) text += words[rng.below(words.size())] + " ";
    const Tokens once = tokenize(text, o);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tokenize(joined, o), once) << text;
  }
}

TEST(Tokenize, StemmerIsIdempotentOnMostReferenceWords)
{
  std::ifstream in(std::string(MOOD_TEST_DATA_DIR) + "/porter_reference.txt");
  std::size_t total = 0, fixed = 0;
  for (std::string line; std::getline(in, line);)
  {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word, stem;
    ls >> word >> stem;
    ++total;
    if (porter_stem(stem) == stem) ++fixed;
  }
  EXPECT_GT(static_cast<double>(fixed) / static_cast<double>(total), 0.9);
}

TEST(Vocabulary, ThresholdsAndOrders)
{
  const Corpus c = from_texts({{"a", "dog dog cat"}, {"b", "dog"}});
  TokenizerOptions o;
  o.stem = false;
  const Vocabulary v2 = build_vocabulary(c, 2, o);
  ASSERT_EQ(v2.size(), 1u);
  EXPECT_EQ(v2.term(0), "dog");
  EXPECT_EQ(v2.frequency(0), 3u);
  const Vocabulary v1 = build_vocabulary(c, 1, o);
  EXPECT_EQ(v1.size(), 2u);
  EXPECT_THROW(build_vocabulary(c, 0, o), InvalidArgument);
}

TEST(Vocabulary, EqualFrequenciesOrderLexicographically)
{
  TokenizerOptions o;
  o.stem = false;
  const Corpus c = from_texts({{"a", "zeta beta alpha"}, {"b", "gamma gamma gamma"}});
  const Vocabulary v = build_vocabulary(c, 1, o);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.term(0), "gamma");
  EXPECT_EQ(v.term(1), "alpha");
  EXPECT_EQ(v.term(2), "beta");
  EXPECT_EQ(v.term(3), "zeta");
  EXPECT_EQ(build_vocabulary(c, 1, o).fingerprint(), v.fingerprint());
}

TEST(Vocabulary, FingerprintDependsOnContent)
{
  const Vocabulary a({{"x", 2}, {"y", 1}});
  const Vocabulary b({{"x", 2}, {"y", 2}});
  const Vocabulary c({{"y", 1}, {"x", 2}});
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
  EXPECT_EQ(parse_fingerprint_hex(fingerprint_hex(a.fingerprint())), a.fingerprint());
  EXPECT_THROW(parse_fingerprint_hex("xyz"), FormatError);
  EXPECT_THROW(Vocabulary({{"x", 1}, {"x", 2}}), FormatError);
}

TEST(Vectorize, CountsAndNormalizes)
{
  const Vocabulary v({{"a", 2}, {"b", 1}});
  const SparseVector none = vectorize({"a", "a", "b"}, v, Normalization::none);
  EXPECT_EQ(none.indices, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(none.values, (std::vector<double>{2.0, 1.0}));
  const SparseVector l1 = vectorize({"a", "a", "b"}, v, Normalization::l1);
  EXPECT_DOUBLE_EQ(l1.values[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(l1.values[1], 1.0 / 3.0);
  const SparseVector l2 = vectorize({"a", "a", "b"}, v, Normalization::l2);
  EXPECT_DOUBLE_EQ(l2.values[0], 2.0 / std::sqrt(5.0));
  EXPECT_TRUE(vectorize({"q", "r"}, v, Normalization::l1).empty());
  EXPECT_EQ(none.vocab_id, v.fingerprint());
}

TEST(Vectorize, RandomInputsKeepSortedIndicesAndUnitMass)
{
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (int i = 0; i < 50; ++i) entries.emplace_back("w" + std::to_string(i), 1);
  const Vocabulary v(entries);
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial)
  {
    std::vector<std::string> toks;
    const auto len = rng.below(30);
    for (std::uint64_t i = 0; i < len; ++i) toks.push_back("w" + std::to_string(rng.below(70)));
    const SparseVector x = vectorize(toks, v, Normalization::l1);
    for (std::size_t i = 1; i < x.nnz(); ++i) EXPECT_LT(x.indices[i - 1], x.indices[i]);
    for (double val : x.values) EXPECT_GT(val, 0.0);
    if (!x.empty()) { EXPECT_NEAR(x.sum(), 1.0, 1e-12); }
  }
}

TEST(SparseVector, FromPairsSumsDuplicatesAndDropsZeros)
{
  const auto v = SparseVector::from_pairs({{3, 1.0}, {1, 2.0}, {3, -1.0}, {1, 0.5}});
  EXPECT_EQ(v.indices, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(v.values, (std::vector<double>{2.5}));
}

TEST(MakeDataset, FollowsGivenClassOrderAndRejectsUnknownClasses)
{
  const Corpus c = from_texts({{"b", "x y"}, {"a", "x"}});
  const Featurizer f = make_featurizer(c, 1);
  const Dataset d = make_dataset(c, f);
  EXPECT_EQ(d.classes, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.y, (std::vector<int>{1, 0}));
  const Dataset r = make_dataset(c, f, {"b", "a"});
  EXPECT_EQ(r.y, (std::vector<int>{0, 1}));
  EXPECT_THROW(make_dataset(c, f, {"a", "z"}), InvalidArgument);
  EXPECT_EQ(parse_normalization("l2"), Normalization::l2);
  EXPECT_THROW(parse_normalization("l3"), InvalidArgument);
}
