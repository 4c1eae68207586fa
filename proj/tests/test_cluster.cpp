#include "mood/cluster.hpp"
#include "mood/gaussian.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

using namespace mood;

namespace {

Eigen::MatrixXd three_items()
{
  Eigen::MatrixXd D(3, 3);
  D << 0, 1, 5, 1, 0, 6, 5, 6, 0;
  return D;
}

/// Naive agglomeration: cluster distance recomputed from member sets on the
/// original matrix every round. Returns (sorted member labels of the two
/// merged sides, height) per merge.
struct NaiveMerge
{
  std::vector<std::string> a, b;
  double height;
};

std::vector<NaiveMerge> naive_complete_linkage(const Eigen::MatrixXd& D, const std::vector<std::string>& labels)
{
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < labels.size(); ++i) clusters.push_back({i});
  auto min_label = [&](const std::vector<std::size_t>& c) {
    std::string m = labels[c[0]];
    for (auto i : c) m = std::min(m, labels[i]);
    return m;
  };
  auto names = [&](const std::vector<std::size_t>& c) {
    std::vector<std::string> n;
    for (auto i : c) n.push_back(labels[i]);
    std::sort(n.begin(), n.end());
    return n;
  };
  std::vector<NaiveMerge> out;
  while (clusters.size() > 1)
  {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = 0; j < clusters.size(); ++j)
      {
        if (i == j) continue;
        auto key = std::make_pair(min_label(clusters[i]), min_label(clusters[j]));
        if (!(key.first < key.second)) continue;
        double d = 0;
        for (auto p : clusters[i])
          for (auto q : clusters[j]) d = std::max(d, D(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)));
        if (d < best || (d == best && key < best_key))
        {
          best = d;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    out.push_back({names(clusters[bi]), names(clusters[bj]), best});
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return out;
}

std::vector<std::string> member_labels(const Dendrogram& t, std::size_t id)
{
  const auto members = cluster_members(t);
  std::vector<std::string> n;
  for (auto i : members[id]) n.push_back(t.leaves[i]);
  std::sort(n.begin(), n.end());
  return n;
}

GaussianClassModel spherical(const Eigen::MatrixXd& means, const std::vector<double>& variances,
                             std::vector<std::string> labels)
{
  CovarianceSpec s;
  s.pooling = CovariancePooling::per_class;
  std::vector<Eigen::MatrixXd> covs;
  for (double v : variances) covs.push_back(v * Eigen::MatrixXd::Identity(means.cols(), means.cols()));
  const auto C = static_cast<Eigen::Index>(labels.size());
  return GaussianClassModel(std::move(labels), means, covs, Eigen::VectorXd::Constant(C, 1.0 / static_cast<double>(C)), s);
}

} // namespace

TEST(Linkage, ThreeItemExample)
{
  const Dendrogram t = linkage_complete(three_items(), {"1", "2", "3"});
  ASSERT_EQ(t.merges.size(), 2u);
  EXPECT_EQ(t.merges[0].a, 0u);
  EXPECT_EQ(t.merges[0].b, 1u);
  EXPECT_EQ(t.merges[0].height, 1.0);
  EXPECT_EQ(t.merges[1].a, 3u);
  EXPECT_EQ(t.merges[1].b, 2u);
  EXPECT_EQ(t.merges[1].height, 6.0);
  EXPECT_EQ(to_newick(t), "((1:1,2:1):5,3:6);");
}

TEST(Linkage, AllTiesFollowTheLabelOrder)
{
  const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(4, 4, 2.0) - 2.0 * Eigen::MatrixXd::Identity(4, 4);
  const Dendrogram t = linkage_complete(D, {"d", "b", "a", "c"});
  // (a,b) first, then (a..,c), then (a..,d)
  EXPECT_EQ(member_labels(t, 4), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(member_labels(t, 5), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.leaves[t.merges[0].a], "a");
}

TEST(Linkage, MatchesNaiveAgglomerationOnRandomMatrices)
{
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial)
  {
    const auto C = 2 + static_cast<Eigen::Index>(rng.below(6));
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C, C);
    for (Eigen::Index i = 0; i < C; ++i)
      for (Eigen::Index j = i + 1; j < C; ++j)
        D(i, j) = D(j, i) = trial % 3 == 0 ? static_cast<double>(1 + rng.below(3)) : rng.uniform();
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < C; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
    rng.shuffle(labels.begin(), labels.end());

    const Dendrogram t = linkage_complete(D, labels);
    const auto oracle = naive_complete_linkage(D, labels);
    ASSERT_EQ(t.merges.size(), oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k)
    {
      EXPECT_EQ(member_labels(t, t.merges[k].a), oracle[k].a);
      EXPECT_EQ(member_labels(t, t.merges[k].b), oracle[k].b);
      EXPECT_EQ(t.merges[k].height, oracle[k].height);
      if (k) { EXPECT_GE(t.merges[k].height, t.merges[k - 1].height); }
    }
  }
}

TEST(Linkage, RejectsInvalidMatrices)
{
  Eigen::MatrixXd D = three_items();
  D(0, 1) = 2;
  EXPECT_THROW(linkage_complete(D, {"a", "b", "c"}), InvalidArgument);
  D = three_items();
  D(2, 2) = 1;
  EXPECT_THROW(linkage_complete(D, {"a", "b", "c"}), InvalidArgument);
  D = three_items();
  D(0, 2) = D(2, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(linkage_complete(D, {"a", "b", "c"}), InvalidArgument);
  EXPECT_THROW(linkage_complete(three_items(), {"a", "b"}), InvalidArgument);
  EXPECT_THROW(linkage_complete(three_items(), {"a", "a", "c"}), InvalidArgument);
}

TEST(Cut, EndpointsAndTheThreeItemExample)
{
  const Dendrogram t = linkage_complete(three_items(), {"1", "2", "3"});
  const auto all = cut(t, 3);
  EXPECT_EQ(std::set<std::size_t>({all.at("1"), all.at("2"), all.at("3")}).size(), 3u);
  const auto one = cut(t, 1);
  EXPECT_EQ(one.at("1"), one.at("3"));
  const auto two = cut(t, 2);
  EXPECT_EQ(two.at("1"), 0u);
  EXPECT_EQ(two.at("2"), 0u);
  EXPECT_EQ(two.at("3"), 1u);
  EXPECT_THROW(cut(t, 0), InvalidArgument);
  EXPECT_THROW(cut(t, 4), InvalidArgument);
}

TEST(Cut, IsAPartitionWithIdsOrderedBySmallestLabel)
{
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial)
  {
    const Eigen::Index C = 8;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C, C);
    for (Eigen::Index i = 0; i < C; ++i)
      for (Eigen::Index j = i + 1; j < C; ++j) D(i, j) = D(j, i) = rng.uniform();
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < C; ++i) labels.push_back("e" + std::to_string(i));
    const Dendrogram t = linkage_complete(D, labels);
    for (std::size_t k = 1; k <= 8; ++k)
    {
      const auto a = cut(t, k);
      EXPECT_EQ(a.size(), 8u);
      std::map<std::size_t, std::string> first;
      for (const auto& [lbl, id] : a)
      {
        EXPECT_LT(id, k);
        if (!first.count(id)) first[id] = lbl; // map iterates labels in order
      }
      EXPECT_EQ(first.size(), k);
      std::string prev;
      for (const auto& [id, lbl] : first)
      {
        EXPECT_LT(prev, lbl);
        prev = lbl;
      }
    }
  }
}

TEST(Newick, QuotesAwkwardNamesAndRoundTripsHeights)
{
  const Dendrogram t = linkage_complete(three_items() * 0.1, {"a b", "it's", "c"});
  const std::string s = to_newick(t);
  EXPECT_NE(s.find("'a b'"), std::string::npos);
  EXPECT_NE(s.find("'it''s'"), std::string::npos);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(to_newick(linkage_complete(Eigen::MatrixXd::Zero(1, 1), {"solo"})), "solo;");
}

TEST(Voronoi, SymmetricPairSplitsAtTheVerticalAxis)
{
  Eigen::MatrixXd mu(2, 2);
  mu << -1, 0, 1, 0;
  const auto m = spherical(mu, {1.0, 1.0}, {"left", "right"});
  const VoronoiGrid g = voronoi_grid(m, 0, 1, {-2, 2}, {-2, 2}, 40);
  for (std::size_t j = 0; j < 40; ++j)
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(g.at(i, j), g.x_at(i) < 0 ? 0u : 1u);
}

TEST(Voronoi, OneClassCoversTheGrid)
{
  const auto m = spherical(Eigen::MatrixXd::Zero(1, 2), {1.0}, {"only"});
  const VoronoiGrid g = voronoi_grid(m, 0, 1, {-1, 1}, {-1, 1}, 5);
  for (auto c : g.cells) EXPECT_EQ(c, 0u);
}

TEST(Voronoi, IgnoresPriors)
{
  Eigen::MatrixXd mu(2, 2);
  mu << -1, 0, 1, 0;
  CovarianceSpec s;
  const GaussianClassModel m({"a", "b"}, mu, {Eigen::MatrixXd::Identity(2, 2)}, Eigen::Vector2d(0.99, 0.01), s);
  const VoronoiGrid g = voronoi_grid(m, 0, 1, {-2, 2}, {-1, 1}, 20);
  EXPECT_EQ(g.at(19, 0), 1u);
}

TEST(Voronoi, UnequalVariancesMatchTheQuadraticDiscriminantRoots)
{
  // N(0, 1) vs N(2, 4): log N(x;0,1) = log N(x;2,4) solves 3x^2 + 4x - 4 - 8 ln 2 = 0.
  Eigen::MatrixXd mu(2, 1);
  mu << 0, 2;
  CovarianceSpec s;
  s.pooling = CovariancePooling::per_class;
  const GaussianClassModel m({"narrow", "wide"}, mu, {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 4.0)},
                             Eigen::Vector2d(0.5, 0.5), s);
  const double a = 3, b = 4, c = -4 - 8 * std::log(2.0);
  const double disc = std::sqrt(b * b - 4 * a * c);
  const double r1 = (-b - disc) / (2 * a), r2 = (-b + disc) / (2 * a);
  const VoronoiLine line = voronoi_line(m, 0, {-6, 6}, 1200);
  const double width = 12.0 / 1200;
  std::vector<double> boundaries;
  for (std::size_t i = 1; i < line.resolution; ++i)
    if (line.cells[i] != line.cells[i - 1]) boundaries.push_back(0.5 * (line.at(i) + line.at(i - 1)));
  ASSERT_EQ(boundaries.size(), 2u);
  EXPECT_NEAR(boundaries[0], r1, width);
  EXPECT_NEAR(boundaries[1], r2, width);
  EXPECT_EQ(line.cells[600], 0u);
  EXPECT_EQ(line.cells[0], 1u);
}

TEST(Voronoi, RelabelingPermutesTheOutput)
{
  Eigen::MatrixXd mu(3, 2);
  mu << 0, 0, 2, 1, -1, 2;
  const auto m = spherical(mu, {1.0, 0.5, 2.0}, {"a", "b", "c"});
  Eigen::MatrixXd pmu(3, 2);
  pmu << -1, 2, 0, 0, 2, 1; // order c, a, b
  const auto p = spherical(pmu, {2.0, 1.0, 0.5}, {"c", "a", "b"});
  const std::vector<std::size_t> to_p{1, 2, 0};
  const auto g = voronoi_grid(m, 0, 1, {-3, 3}, {-3, 3}, 30);
  const auto h = voronoi_grid(p, 0, 1, {-3, 3}, {-3, 3}, 30);
  for (std::size_t k = 0; k < g.cells.size(); ++k) EXPECT_EQ(to_p[g.cells[k]], h.cells[k]);
}

TEST(Voronoi, RejectsBadArguments)
{
  const auto m = spherical(Eigen::MatrixXd::Zero(2, 2), {1.0, 2.0}, {"a", "b"});
  EXPECT_THROW(voronoi_grid(m, 0, 0, {-1, 1}, {-1, 1}, 10), InvalidArgument);
  EXPECT_THROW(voronoi_grid(m, 0, 1, {1, 1}, {-1, 1}, 10), InvalidArgument);
  EXPECT_THROW(voronoi_grid(m, 0, 1, {-1, 1}, {-1, 1}, 1), InvalidArgument);
  const auto flat = spherical(Eigen::MatrixXd::Zero(2, 1), {1.0, 2.0}, {"a", "b"});
  EXPECT_THROW(voronoi_grid(flat, 0, 1, {-1, 1}, {-1, 1}, 10), InvalidArgument);
}
