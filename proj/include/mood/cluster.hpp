#pragma once

// Complete-linkage agglomerative clustering of emotions, dendrogram cuts and
// Newick export, and likelihood tessellations of the manifold.

#include "mood/common.hpp"
#include "mood/gaussian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

namespace mood {

struct Merge
{
  /// Cluster ids: 0..C-1 are leaves, C+k is the cluster formed by merge k.
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
};

struct Dendrogram
{
  std::vector<std::string> leaves;
  std::vector<Merge> merges;

  std::size_t num_leaves() const noexcept { return leaves.size(); }
};

inline void validate_distance_matrix(const Eigen::MatrixXd& d, std::size_t num_labels)
{
  if (d.rows() != d.cols()) throw InvalidArgument("distance matrix is not square");
  if (static_cast<std::size_t>(d.rows()) != num_labels)
    throw InvalidArgument("distance matrix size does not match label count");
  if (!d.allFinite()) throw InvalidArgument("distance matrix is not finite");
  for (Eigen::Index i = 0; i < d.rows(); ++i)
  {
    if (d(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal is not zero");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      if (d(i, j) != d(j, i)) throw InvalidArgument("distance matrix is not symmetric");
  }
}

/// Agglomerative clustering where the distance between clusters is the
/// largest member-to-member distance. Among equally close pairs, the pair
/// whose (smaller, larger) minimum member labels is lexicographically
/// smallest merges first. In each merge `a` holds the smaller minimum label.
inline Dendrogram linkage_complete(const Eigen::MatrixXd& distances, std::vector<std::string> labels)
{
  validate_distance_matrix(distances, labels.size());
  const std::size_t C = labels.size();
  if (C < 1) throw InvalidArgument("linkage needs at least one item");

  Dendrogram tree;
  tree.leaves = std::move(labels);

  // Active clusters: id, smallest member label, current row in `dist`.
  std::vector<std::size_t> id(C);
  std::vector<std::string> min_label = tree.leaves;
  std::iota(id.begin(), id.end(), std::size_t{0});
  Eigen::MatrixXd dist = distances;
  std::vector<char> alive(C, 1);

  for (std::size_t step = 0; step + 1 < C; ++step)
  {
    std::size_t bi = C, bj = C;
    for (std::size_t i = 0; i < C; ++i)
    {
      if (!alive[i]) continue;
      for (std::size_t j = 0; j < C; ++j)
      {
        if (j == i || !alive[j] || !(min_label[i] < min_label[j])) continue;
        if (bi == C)
        {
          bi = i;
          bj = j;
          continue;
        }
        const double cand = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double best = dist(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(bj));
        if (cand < best ||
            (cand == best && std::tie(min_label[i], min_label[j]) < std::tie(min_label[bi], min_label[bj])))
        {
          bi = i;
          bj = j;
        }
      }
    }
    // Equal labels would make the ordering ambiguous.
    if (bi == C) throw InvalidArgument("linkage labels must be distinct");

    const double h = dist(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(bj));
    tree.merges.push_back({id[bi], id[bj], h});
    for (std::size_t k = 0; k < C; ++k)
    {
      if (!alive[k] || k == bi || k == bj) continue;
      const auto ki = static_cast<Eigen::Index>(k);
      const double m = std::max(dist(static_cast<Eigen::Index>(bi), ki), dist(static_cast<Eigen::Index>(bj), ki));
      dist(static_cast<Eigen::Index>(bi), ki) = dist(ki, static_cast<Eigen::Index>(bi)) = m;
    }
    alive[bj] = 0;
    id[bi] = C + step;
    // min_label[bi] is already the smaller of the two.
  }
  return tree;
}

/// Leaf indices belonging to each cluster id of the dendrogram.
inline std::vector<std::vector<std::size_t>> cluster_members(const Dendrogram& tree)
{
  const std::size_t C = tree.num_leaves();
  std::vector<std::vector<std::size_t>> members(C + tree.merges.size());
  for (std::size_t i = 0; i < C; ++i) members[i] = {i};
  for (std::size_t k = 0; k < tree.merges.size(); ++k)
  {
    auto& m = members[C + k];
    m = members[tree.merges[k].a];
    m.insert(m.end(), members[tree.merges[k].b].begin(), members[tree.merges[k].b].end());
    std::sort(m.begin(), m.end());
  }
  return members;
}

/// Partition into k clusters by undoing the last k-1 merges. Cluster ids
/// 0..k-1 are ordered by each cluster's smallest member label.
inline std::map<std::string, std::size_t> cut(const Dendrogram& tree, std::size_t k)
{
  const std::size_t C = tree.num_leaves();
  if (k < 1 || k > C)
    throw InvalidArgument("cut: k = " + std::to_string(k) + " outside [1, " + std::to_string(C) + "]");
  if (tree.merges.size() + 1 != C) throw InvalidArgument("cut: dendrogram is incomplete");

  std::vector<std::size_t> parent(C);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  // Cluster id -> a representative leaf.
  std::vector<std::size_t> rep(C + tree.merges.size());
  std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(C), std::size_t{0});
  for (std::size_t s = 0; s < C - k; ++s)
  {
    const auto& m = tree.merges[s];
    const std::size_t ra = find(rep[m.a]), rb = find(rep[m.b]);
    parent[rb] = ra;
    rep[C + s] = ra;
  }

  std::map<std::size_t, std::string> root_min;
  for (std::size_t i = 0; i < C; ++i)
  {
    const std::size_t r = find(i);
    auto it = root_min.find(r);
    if (it == root_min.end() || tree.leaves[i] < it->second) root_min[r] = tree.leaves[i];
  }
  std::vector<std::pair<std::string, std::size_t>> order;
  for (const auto& [r, lbl] : root_min) order.emplace_back(lbl, r);
  std::sort(order.begin(), order.end());
  std::map<std::size_t, std::size_t> cid;
  for (std::size_t c = 0; c < order.size(); ++c) cid[order[c].second] = c;

  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < C; ++i) out[tree.leaves[i]] = cid.at(find(i));
  return out;
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string newick_name(const std::string& s)
{
  if (s.find_first_of(" ()[]':;,\t\n") == std::string::npos && !s.empty()) return s;
  std::string q = "'";
  for (char c : s)
  {
    if (c == '\'') q += '\'';
    q += c;
  }
  return q + "'";
}

} // namespace detail

/// Newick text with branch lengths equal to height differences.
inline std::string to_newick(const Dendrogram& tree)
{
  const std::size_t C = tree.num_leaves();
  if (tree.merges.size() + 1 != C) throw InvalidArgument("to_newick: dendrogram is incomplete");
  std::vector<double> height(C + tree.merges.size(), 0.0);
  for (std::size_t k = 0; k < tree.merges.size(); ++k) height[C + k] = tree.merges[k].height;

  std::function<std::string(std::size_t, double)> emit = [&](std::size_t node, double parent_h) {
    std::string s;
    if (node < C)
      s = detail::newick_name(tree.leaves[node]);
    else
    {
      const auto& m = tree.merges[node - C];
      s = "(" + emit(m.a, height[node]) + "," + emit(m.b, height[node]) + ")";
    }
    return s + ":" + format_double(parent_h - height[node]);
  };

  const std::size_t root = C + tree.merges.size() - 1;
  if (C == 1) return detail::newick_name(tree.leaves[0]) + ";";
  const auto& m = tree.merges.back();
  return "(" + emit(m.a, height[root]) + "," + emit(m.b, height[root]) + ");";
}

struct AxisRange
{
  double min = -1.0;
  double max = 1.0;
};

struct VoronoiGrid
{
  std::size_t axis_x = 0;
  std::size_t axis_y = 1;
  AxisRange x_range;
  AxisRange y_range;
  std::size_t resolution = 0;
  /// Winning class index per cell, row-major with x varying fastest.
  std::vector<std::size_t> cells;

  double x_at(std::size_t i) const
  {
    return x_range.min + (static_cast<double>(i) + 0.5) * (x_range.max - x_range.min) /
                             static_cast<double>(resolution);
  }
  double y_at(std::size_t j) const
  {
    return y_range.min + (static_cast<double>(j) + 0.5) * (y_range.max - y_range.min) /
                             static_cast<double>(resolution);
  }
  std::size_t at(std::size_t i, std::size_t j) const { return cells[j * resolution + i]; }
};

/// argmax_y p(z | Y = y) (no prior); ties go to the smaller class index.
inline std::size_t most_likely_class(const GaussianClassModel& model, const Eigen::VectorXd& z)
{
  std::size_t best = 0;
  double best_ll = model.log_density(std::size_t{0}, z);
  for (std::size_t c = 1; c < model.num_classes(); ++c)
  {
    const double ll = model.log_density(c, z);
    if (ll > best_ll)
    {
      best_ll = ll;
      best = c;
    }
  }
  return best;
}

/// Labels cell centres of a resolution x resolution grid over two manifold
/// axes; the remaining coordinates are held at 0.
inline VoronoiGrid voronoi_grid(const GaussianClassModel& model, std::size_t axis_x, std::size_t axis_y,
                                AxisRange x_range, AxisRange y_range, std::size_t resolution)
{
  const auto l = static_cast<std::size_t>(model.dim());
  if (l < 2) throw InvalidArgument("voronoi_grid needs a manifold of dimension >= 2");
  if (axis_x >= l || axis_y >= l || axis_x == axis_y) throw InvalidArgument("voronoi_grid: invalid axes");
  if (resolution < 2) throw InvalidArgument("voronoi_grid: resolution must be >= 2");
  if (!(x_range.max > x_range.min) || !(y_range.max > y_range.min) || !std::isfinite(x_range.min) ||
      !std::isfinite(x_range.max) || !std::isfinite(y_range.min) || !std::isfinite(y_range.max))
    throw InvalidArgument("voronoi_grid: degenerate bounds");

  VoronoiGrid g{axis_x, axis_y, x_range, y_range, resolution, {}};
  g.cells.resize(resolution * resolution);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l));
  for (std::size_t j = 0; j < resolution; ++j)
    for (std::size_t i = 0; i < resolution; ++i)
    {
      z(static_cast<Eigen::Index>(axis_x)) = g.x_at(i);
      z(static_cast<Eigen::Index>(axis_y)) = g.y_at(j);
      g.cells[j * resolution + i] = most_likely_class(model, z);
    }
  return g;
}

struct VoronoiLine
{
  std::size_t axis = 0;
  AxisRange range;
  std::size_t resolution = 0;
  std::vector<std::size_t> cells;

  double at(std::size_t i) const
  {
    return range.min + (static_cast<double>(i) + 0.5) * (range.max - range.min) / static_cast<double>(resolution);
  }
};

/// One-axis analogue of voronoi_grid; works for any manifold dimension.
inline VoronoiLine voronoi_line(const GaussianClassModel& model, std::size_t axis, AxisRange range,
                                std::size_t resolution)
{
  if (axis >= static_cast<std::size_t>(model.dim())) throw InvalidArgument("voronoi_line: invalid axis");
  if (resolution < 2) throw InvalidArgument("voronoi_line: resolution must be >= 2");
  if (!(range.max > range.min)) throw InvalidArgument("voronoi_line: degenerate bounds");
  VoronoiLine line{axis, range, resolution, std::vector<std::size_t>(resolution)};
  Eigen::VectorXd z = Eigen::VectorXd::Zero(model.dim());
  for (std::size_t i = 0; i < resolution; ++i)
  {
    z(static_cast<Eigen::Index>(axis)) = line.at(i);
    line.cells[i] = most_likely_class(model, z);
  }
  return line;
}

} // namespace mood
