#include "mood/corpus.hpp"
#include "mood/common.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace mood;

namespace {

Corpus read(const std::string& text, CorpusKind kind = CorpusKind::emotion)
{
  std::istringstream in(text);
  return read_corpus(in, kind);
}

std::string error_of(const std::string& text, CorpusKind kind = CorpusKind::emotion)
{
  try
  {
    read(text, kind);
  }
  catch (const CorpusError& e)
  {
    return e.what();
  }
  return "";
}

Corpus labeled(const std::vector<std::string>& labels)
{
  std::vector<Document> docs;
  for (std::size_t i = 0; i < labels.size(); ++i)
    docs.push_back({"d" + std::to_string(i), "text " + std::to_string(i), labels[i], std::nullopt});
  return Corpus(CorpusKind::emotion, std::move(docs));
}

} // namespace

TEST(Rng, MatchesTheMersenneTwisterReferenceStream)
{
  // 10000th output of mt19937_64 with the default seed, fixed by the C++ standard.
  Rng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Rng, BelowStaysInRangeAndShufflePermutes)
{
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.below(7)];
  for (int h : hits) EXPECT_GT(h, 800);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v.begin(), v.end());
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 10u);
  EXPECT_THROW(rng.below(0), InvalidArgument);
}

TEST(Rng, NormalHasUnitMoments)
{
  Rng rng(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i)
  {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndPropagatesErrors)
{
  std::vector<int> seen(101, 0);
  parallel_for(seen.size(), 4, [&](std::size_t i) { ++seen[i]; });
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericalError("boom");
                            }),
               NumericalError);
}

TEST(LoadCorpus, ParsesEmotionRecordsInFileOrder)
{
  const Corpus c = read("{\"id\":\"a\",\"text\":\"I am happy\",\"label\":\"happy\"}\n"
                        "{\"id\":\"b\",\"text\":\"so sad\",\"label\":\"sad\"}\n"
                        "{\"id\":\"c\",\"text\":\"yay\",\"label\":\"happy\"}\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].id, "a");
  EXPECT_EQ(c[2].text, "yay");
  EXPECT_EQ(c.labels(), (std::vector<std::string>{"happy", "sad"}));
}

TEST(LoadCorpus, ParsesRatings)
{
  const Corpus c = read("{\"id\":\"a\",\"text\":\"x\",\"rating\":3}\n{\"id\":\"b\",\"text\":\"y\",\"rating\":1}\n",
                        CorpusKind::rating);
  EXPECT_EQ(c.rating_levels(), (std::vector<int>{1, 3}));
  EXPECT_EQ(c.keys(), (std::vector<std::string>{"1", "3"}));
}

TEST(LoadCorpus, ReportsLineNumbers)
{
  const std::string good = "{\"id\":\"a\",\"text\":\"x\",\"label\":\"p\"}\n";
  EXPECT_NE(error_of(good + "{\"id\":\"b\",\"label\":\"q\"}\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(good + good.substr(0, 10) + "\n").find("line 2"), std::string::npos);
}

TEST(LoadCorpus, RejectsInvalidInput)
{
  const std::string a = "{\"id\":\"a\",\"text\":\"x\",\"label\":\"p\"}\n";
  const std::string b = "{\"id\":\"b\",\"text\":\"x\",\"label\":\"q\"}\n";
  EXPECT_NE(error_of(a + a + b).find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("").find("empty"), std::string::npos);
  EXPECT_NE(error_of(a + "{\"id\":\"r\",\"text\":\"x\",\"rating\":2}\n").find("mixed"), std::string::npos);
  EXPECT_NE(error_of(a + "{\"id\":\"r\",\"text\":\"x\",\"label\":\"q\",\"rating\":2}\n"), "");
  EXPECT_NE(error_of(a).find("label"), std::string::npos); // a single label is not a valid emotion corpus
  EXPECT_NE(error_of("{\"id\":\"r\",\"text\":\"x\",\"rating\":2.5}\n", CorpusKind::rating), "");
}

TEST(LoadCorpus, SerializationRoundTripsByteIdentically)
{
  const std::string text = "{\"id\":\"a\",\"text\":\"caf\\u00e9 \\\"quoted\\\"\",\"label\":\"happy\"}\n"
                           "{\"id\":\"b\",\"text\":\"line\\nbreak\",\"label\":\"sad\"}\n";
  const Corpus c = read(text);
  std::ostringstream once;
  write_corpus(c, once);
  std::ostringstream twice;
  write_corpus(read(once.str()), twice);
  EXPECT_EQ(once.str(), twice.str());
  EXPECT_EQ(read(once.str())[0].text, c[0].text);
}

TEST(LoadCorpus, FileLoadingErrorsNameThePath)
{
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl", CorpusKind::emotion), CorpusError);
}

TEST(Split, TenDocumentsHalfAndHalfIsDeterministic)
{
  const Corpus c = labeled({"A", "B", "A", "B", "A", "B", "A", "B", "A", "B"});
  const auto s1 = split(c, {0.5, 42});
  const auto s2 = split(c, {0.5, 42});
  EXPECT_EQ(s1.train.size(), 5u);
  EXPECT_EQ(s1.test.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(s1.train[i].id, s2.train[i].id);
}

TEST(Split, StratifiesSixAFourB)
{
  const Corpus c = labeled({"A", "A", "A", "A", "A", "A", "B", "B", "B", "B"});
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    const auto s = split(c, {0.5, seed});
    std::map<std::string, int> n;
    for (const auto& d : s.train.docs()) ++n[*d.label];
    EXPECT_EQ(n["A"], 3);
    EXPECT_EQ(n["B"], 2);
  }
}

TEST(Split, RejectsFractionsOutsideTheOpenUnitInterval)
{
  const Corpus c = labeled({"A", "B", "A", "B"});
  EXPECT_THROW(split(c, {1.1, 0}), InvalidArgument);
  EXPECT_THROW(split(c, {0.0, 0}), InvalidArgument);
  EXPECT_THROW(split(c, {1.0, 0}), InvalidArgument);
}

TEST(Split, IsAPartitionForRandomFractionsAndSeeds)
{
  Rng rng(8);
  std::vector<std::string> labels;
  for (int i = 0; i < 97; ++i) labels.push_back(std::string(1, static_cast<char>('A' + rng.below(5))));
  const Corpus c = labeled(labels);
  for (int trial = 0; trial < 50; ++trial)
  {
    const double f = 0.05 + 0.9 * rng.uniform();
    const auto s = split(c, {f, rng.next()});
    std::multiset<std::string> ids;
    for (const auto& d : s.train.docs()) ids.insert(d.id);
    for (const auto& d : s.test.docs()) ids.insert(d.id);
    std::multiset<std::string> all;
    for (const auto& d : c.docs()) all.insert(d.id);
    EXPECT_EQ(ids, all);
    EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(f * 97)));
    // every label appears in train
    EXPECT_EQ(s.train.labels().size(), c.labels().size());
  }
}

TEST(StratifiedQuotas, HitRoundedTotalAndKeepEveryClass)
{
  const auto q = stratified_quotas({6, 4}, 0.5);
  EXPECT_EQ(q, (std::vector<std::size_t>{3, 2}));
  const auto r = stratified_quotas({5, 3, 1}, 0.5);
  EXPECT_EQ(r[0] + r[1] + r[2], 5u);
  EXPECT_GE(r[2], 1u);
  // the rounded total wins when it is smaller than the number of classes
  const auto t = stratified_quotas({1, 1, 10}, 0.1);
  EXPECT_EQ(t[0] + t[1] + t[2], 1u);
}

TEST(GenerateSynthetic, IsReproducibleAndValidatesInput)
{
  const std::vector<ClassSpec> spec{{"x", {{"a", 0.5}, {"b", 0.5}}, 20}, {"y", {{"c", 1.0}}, 10}};
  std::ostringstream a, b;
  write_corpus(generate_synthetic(spec, 7, 99), a);
  write_corpus(generate_synthetic(spec, 7, 99), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(generate_synthetic(spec, 7, 99).size(), 30u);

  EXPECT_THROW(generate_synthetic({{"x", {{"a", 0.5}, {"b", 0.4}}, 2}, {"y", {{"c", 1.0}}, 1}}, 3, 0),
               InvalidArgument);
  EXPECT_THROW(generate_synthetic({{"x", {{"a", 1.0}}, 0}, {"y", {{"c", 1.0}}, 1}}, 3, 0), InvalidArgument);
}

TEST(GenerateSynthetic, WordFrequenciesFollowTheDistribution)
{
  const std::vector<ClassSpec> spec{{"x", {{"a", 0.2}, {"b", 0.3}, {"c", 0.5}}, 400}, {"y", {{"d", 1.0}}, 1}};
  const Corpus c = generate_synthetic(spec, 50, 5);
  std::map<std::string, double> n;
  double total = 0;
  for (const auto& d : c.docs())
  {
    if (*d.label != "x") continue;
    std::istringstream ws(d.text);
    for (std::string w; ws >> w;)
    {
      n[w] += 1;
      total += 1;
    }
  }
  // 20000 draws: binomial standard error below 0.004.
  EXPECT_NEAR(n["a"] / total, 0.2, 0.015);
  EXPECT_NEAR(n["b"] / total, 0.3, 0.015);
  EXPECT_NEAR(n["c"] / total, 0.5, 0.015);
}
