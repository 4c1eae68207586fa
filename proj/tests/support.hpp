#pragma once

// Shared fixtures for the unit tests.

#include "mood/common.hpp"
#include "mood/corpus.hpp"
#include "mood/features.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mood::test {

/// n random non-negative sparse rows over `dim` features, labels cycling
/// through `classes` so every class is present.
inline Dataset random_dataset(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed,
                              double density = 0.3)
{
  Rng rng(seed);
  Dataset d;
  d.dim = dim;
  for (std::size_t c = 0; c < classes; ++c) d.classes.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i)
  {
    std::vector<std::pair<std::uint32_t, double>> pairs;
    for (std::size_t j = 0; j < dim; ++j)
      if (rng.uniform() < density) pairs.emplace_back(static_cast<std::uint32_t>(j), rng.uniform() + 0.1);
    if (pairs.empty()) pairs.emplace_back(static_cast<std::uint32_t>(rng.below(dim)), 1.0);
    d.x.push_back(SparseVector::from_pairs(std::move(pairs)));
    d.y.push_back(static_cast<int>(i % classes));
  }
  return d;
}

inline Eigen::MatrixXd dense(const std::vector<SparseVector>& rows, std::size_t dim)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].nnz(); ++k)
      m(static_cast<Eigen::Index>(i), rows[i].indices[k]) = rows[i].values[k];
  return m;
}

inline SparseVector sparse(const Eigen::VectorXd& v)
{
  std::vector<std::pair<std::uint32_t, double>> pairs;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v(j) != 0.0) pairs.emplace_back(static_cast<std::uint32_t>(j), v(j));
  return SparseVector::from_pairs(std::move(pairs));
}

inline Corpus emotion_corpus(const std::vector<std::pair<std::string, std::string>>& label_text)
{
  std::vector<Document> docs;
  for (std::size_t i = 0; i < label_text.size(); ++i)
    docs.push_back({"d" + std::to_string(i), label_text[i].second, label_text[i].first, std::nullopt});
  return Corpus(CorpusKind::emotion, std::move(docs));
}

} // namespace mood::test
