#pragma once

// JSON model files and CSV exports.

#include "mood/baselines.hpp"
#include "mood/classify.hpp"
#include "mood/cluster.hpp"
#include "mood/features.hpp"
#include "mood/gaussian.hpp"
#include "mood/manifold.hpp"
#include "mood/sentiment.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mood {

using ordered_json = nlohmann::ordered_json;

inline constexpr int model_format_version = 1;

enum class ModelType
{
  manifold,
  emotion_classifier,
  sentiment,
  logreg_ova,
  linreg
};

inline bool has_manifold(ModelType t)
{
  return t == ModelType::manifold || t == ModelType::emotion_classifier || t == ModelType::sentiment;
}

inline const char* to_string(ModelType t)
{
  switch (t)
  {
  case ModelType::manifold: return "manifold";
  case ModelType::emotion_classifier: return "emotion_classifier";
  case ModelType::sentiment: return "sentiment";
  case ModelType::logreg_ova: return "logreg_ova";
  case ModelType::linreg: return "linreg";
  }
  return "?";
}

inline ModelType parse_model_type(const std::string& s)
{
  for (ModelType t : {ModelType::manifold, ModelType::emotion_classifier, ModelType::sentiment, ModelType::logreg_ova,
                      ModelType::linreg})
    if (s == to_string(t)) return t;
  throw FormatError("unknown model_type '" + s + "'");
}

/// Everything needed to featurize new text and score it.
struct ModelFile
{
  ModelType type = ModelType::manifold;
  Featurizer featurizer;
  ManifoldModel manifold;                      // manifold-based types
  std::optional<GaussianClassModel> gaussians; // classifier and sentiment models
  bool degenerate = false;                     // sentiment only
  std::optional<LogRegOvaModel> logreg;
  std::optional<LinRegModel> linreg;
  ordered_json metadata = ordered_json::object();
};

namespace detail {

inline ordered_json matrix_json(const Eigen::MatrixXd& m)
{
  ordered_json data = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
  {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
    {
      if (!std::isfinite(m(r, c))) throw NumericalError("cannot serialize a non-finite matrix entry");
      row.push_back(m(r, c));
    }
    data.push_back(std::move(row));
  }
  return ordered_json{{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

inline ordered_json vector_json(const Eigen::VectorXd& v)
{
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    if (!std::isfinite(v(i))) throw NumericalError("cannot serialize a non-finite vector entry");
    a.push_back(v(i));
  }
  return a;
}

template <typename J>
const J& field(const J& j, const char* name)
{
  if (!j.is_object() || !j.contains(name)) throw FormatError(std::string("model file: missing field \"") + name + "\"");
  return j.at(name);
}

template <typename J>
Eigen::MatrixXd matrix_from_json(const J& j, const char* what)
{
  const auto& shape = field(j, "shape");
  const auto& data = field(j, "data");
  if (!shape.is_array() || shape.size() != 2 || !data.is_array())
    throw FormatError(std::string("model file: malformed matrix ") + what);
  const auto rows = shape[0].template get<Eigen::Index>();
  const auto cols = shape[1].template get<Eigen::Index>();
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows))
    throw FormatError(std::string("model file: matrix ") + what + " does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
  {
    const auto& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(cols))
      throw FormatError(std::string("model file: matrix ") + what + " row " + std::to_string(r) + " has wrong length");
    for (Eigen::Index c = 0; c < cols; ++c)
    {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError(std::string("model file: non-numeric entry in ") + what);
      m(r, c) = v.template get<double>();
    }
  }
  return m;
}

template <typename J>
Eigen::VectorXd vector_from_json(const J& j, const char* what)
{
  if (!j.is_array()) throw FormatError(std::string("model file: ") + what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
  {
    if (!j[i].is_number()) throw FormatError(std::string("model file: non-numeric entry in ") + what);
    v(static_cast<Eigen::Index>(i)) = j[i].template get<double>();
  }
  return v;
}

inline ordered_json spec_json(const CovarianceSpec& s)
{
  ordered_json j;
  j["structure"] = to_string(s.structure);
  j["pooling"] = to_string(s.pooling);
  j["lambda"] = s.lambda;
  j["epsilon"] = s.epsilon ? ordered_json(*s.epsilon) : ordered_json(nullptr);
  j["normalize_trace"] = s.normalize_trace;
  return j;
}

template <typename J>
CovarianceSpec spec_from_json(const J& j)
{
  CovarianceSpec s;
  s.structure = parse_structure(field(j, "structure").template get<std::string>());
  s.pooling = parse_pooling(field(j, "pooling").template get<std::string>());
  s.lambda = field(j, "lambda").template get<double>();
  const auto& eps = field(j, "epsilon");
  if (!eps.is_null()) s.epsilon = eps.template get<double>();
  s.normalize_trace = field(j, "normalize_trace").template get<bool>();
  s.validate();
  return s;
}

} // namespace detail

inline ordered_json to_json(const ModelFile& m)
{
  ordered_json j;
  j["format_version"] = model_format_version;
  j["model_type"] = to_string(m.type);

  const auto& f = m.featurizer;
  j["tokenizer"] = {{"stem", f.tokenizer.stem}, {"merge_negation", f.tokenizer.merge_negation}, {"ngram", f.tokenizer.ngram}};
  j["normalization"] = to_string(f.normalization);
  j["vocabulary_fingerprint"] = fingerprint_hex(f.vocab.fingerprint());
  ordered_json vocab = ordered_json::array();
  for (const auto& [term, freq] : f.vocab.entries()) vocab.push_back({term, freq});
  j["vocabulary"] = std::move(vocab);

  if (m.type == ModelType::logreg_ova)
  {
    if (!m.logreg) throw InvalidArgument("logreg_ova model file without a logistic model");
    const auto& lr = *m.logreg;
    j["baseline"] = {{"labels", lr.labels},
                     {"reg", lr.reg},
                     {"vocabulary_fingerprint", fingerprint_hex(lr.vocab_fingerprint)},
                     {"weights", detail::matrix_json(lr.weights)},
                     {"bias", detail::vector_json(lr.bias)}};
  }
  if (m.type == ModelType::linreg)
  {
    if (!m.linreg) throw InvalidArgument("linreg model file without a regression model");
    const auto& lr = *m.linreg;
    j["baseline"] = {{"levels", lr.levels},
                     {"reg", lr.reg},
                     {"vocabulary_fingerprint", fingerprint_hex(lr.vocab_fingerprint)},
                     {"weights", detail::matrix_json(lr.weights)},
                     {"bias", lr.bias}};
  }
  if (!has_manifold(m.type))
  {
    j["metadata"] = m.metadata;
    return j;
  }

  const auto& mf = m.manifold;
  ordered_json man;
  man["labels"] = mf.labels;
  man["ridge"] = mf.ridge;
  man["vocabulary_fingerprint"] = fingerprint_hex(mf.vocab_fingerprint);
  man["theta"] = detail::matrix_json(mf.theta);
  man["intercept"] = detail::vector_json(mf.intercept);
  man["centroids"] = detail::matrix_json(mf.mu);
  man["sigma_x"] = mf.sigma_x ? ordered_json(*mf.sigma_x) : ordered_json(nullptr);
  j["manifold"] = std::move(man);

  if (m.gaussians)
  {
    const auto& g = *m.gaussians;
    ordered_json gj;
    gj["labels"] = g.labels();
    gj["covariance_spec"] = detail::spec_json(g.spec());
    gj["priors"] = detail::vector_json(g.priors());
    gj["means"] = detail::matrix_json(g.means());
    ordered_json covs = ordered_json::array();
    for (const auto& c : g.covariances()) covs.push_back(detail::matrix_json(c));
    gj["covariances"] = std::move(covs);
    if (m.type == ModelType::sentiment) gj["degenerate"] = m.degenerate;
    j["gaussians"] = std::move(gj);
  }
  j["metadata"] = m.metadata;
  return j;
}

inline ModelFile model_from_json(const ordered_json& j)
{
  const auto& version = detail::field(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != model_format_version)
    throw FormatError("unsupported model format_version " + version.dump() + " (expected " +
                      std::to_string(model_format_version) + ")");
  ModelFile m;
  try
  {
    m.type = parse_model_type(detail::field(j, "model_type").get<std::string>());

    const auto& tok = detail::field(j, "tokenizer");
    m.featurizer.tokenizer.stem = detail::field(tok, "stem").get<bool>();
    m.featurizer.tokenizer.merge_negation = detail::field(tok, "merge_negation").get<bool>();
    m.featurizer.tokenizer.ngram = detail::field(tok, "ngram").get<int>();
    m.featurizer.normalization = parse_normalization(detail::field(j, "normalization").get<std::string>());
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (const auto& e : detail::field(j, "vocabulary"))
    {
      if (!e.is_array() || e.size() != 2) throw FormatError("model file: vocabulary entries must be [term, frequency]");
      entries.emplace_back(e[0].get<std::string>(), e[1].get<std::uint64_t>());
    }
    m.featurizer.vocab = Vocabulary(std::move(entries));
    const std::uint64_t stored = parse_fingerprint_hex(detail::field(j, "vocabulary_fingerprint").get<std::string>());
    if (stored != m.featurizer.vocab.fingerprint())
      throw VocabularyMismatch("model file vocabulary fingerprint mismatch: stored " + fingerprint_hex(stored) +
                               ", computed " + fingerprint_hex(m.featurizer.vocab.fingerprint()));

    if (!has_manifold(m.type))
    {
      const auto& b = detail::field(j, "baseline");
      if (parse_fingerprint_hex(detail::field(b, "vocabulary_fingerprint").get<std::string>()) != stored)
        throw VocabularyMismatch("baseline vocabulary fingerprint does not match the model vocabulary " +
                                 fingerprint_hex(stored));
      const Eigen::MatrixXd w = detail::matrix_from_json(detail::field(b, "weights"), "weights");
      if (w.rows() != static_cast<Eigen::Index>(m.featurizer.vocab.size()))
        throw FormatError("model file: baseline weights do not match the vocabulary size");
      if (m.type == ModelType::logreg_ova)
      {
        LogRegOvaModel lr;
        lr.labels = detail::field(b, "labels").get<std::vector<std::string>>();
        lr.reg = detail::field(b, "reg").get<double>();
        lr.vocab_fingerprint = stored;
        lr.weights = w;
        lr.bias = detail::vector_from_json(detail::field(b, "bias"), "bias");
        if (w.cols() != static_cast<Eigen::Index>(lr.labels.size()) || lr.bias.size() != w.cols())
          throw FormatError("model file: logistic weights do not match the label count");
        m.logreg = std::move(lr);
      }
      else
      {
        LinRegModel lr;
        lr.levels = detail::field(b, "levels").get<std::vector<int>>();
        lr.reg = detail::field(b, "reg").get<double>();
        lr.vocab_fingerprint = stored;
        if (w.cols() != 1) throw FormatError("model file: regression weights must have one column");
        lr.weights = w.col(0);
        lr.bias = detail::field(b, "bias").get<double>();
        m.linreg = std::move(lr);
      }
      m.metadata = j.contains("metadata") ? j.at("metadata") : ordered_json::object();
      return m;
    }

    const auto& man = detail::field(j, "manifold");
    auto& mf = m.manifold;
    mf.labels = detail::field(man, "labels").get<std::vector<std::string>>();
    mf.ridge = detail::field(man, "ridge").get<double>();
    mf.vocab_fingerprint = parse_fingerprint_hex(detail::field(man, "vocabulary_fingerprint").get<std::string>());
    if (mf.vocab_fingerprint != stored)
      throw VocabularyMismatch("manifold vocabulary fingerprint " + fingerprint_hex(mf.vocab_fingerprint) +
                               " does not match the model vocabulary " + fingerprint_hex(stored));
    mf.theta = detail::matrix_from_json(detail::field(man, "theta"), "theta");
    mf.intercept = detail::vector_from_json(detail::field(man, "intercept"), "intercept");
    mf.mu = detail::matrix_from_json(detail::field(man, "centroids"), "centroids");
    const auto& sx = detail::field(man, "sigma_x");
    if (!sx.is_null()) mf.sigma_x = sx.get<double>();
    if (mf.theta.rows() != static_cast<Eigen::Index>(m.featurizer.vocab.size()))
      throw FormatError("model file: theta has " + std::to_string(mf.theta.rows()) + " rows for a vocabulary of " +
                        std::to_string(m.featurizer.vocab.size()));
    if (mf.intercept.size() != mf.theta.cols() || mf.mu.cols() != mf.theta.cols() ||
        mf.mu.rows() != static_cast<Eigen::Index>(mf.labels.size()))
      throw FormatError("model file: inconsistent manifold dimensions");

    if (m.type != ModelType::manifold)
    {
      const auto& gj = detail::field(j, "gaussians");
      std::vector<Eigen::MatrixXd> covs;
      for (const auto& c : detail::field(gj, "covariances")) covs.push_back(detail::matrix_from_json(c, "covariance"));
      const Eigen::MatrixXd means = detail::matrix_from_json(detail::field(gj, "means"), "means");
      if (means.cols() != mf.theta.cols()) throw FormatError("model file: Gaussian dimension differs from manifold");
      for (const auto& c : covs)
        if (c.rows() != means.cols() || c.cols() != means.cols())
          throw FormatError("model file: covariance dimension differs from manifold");
      m.gaussians.emplace(detail::field(gj, "labels").get<std::vector<std::string>>(), means, std::move(covs),
                          detail::vector_from_json(detail::field(gj, "priors"), "priors"),
                          detail::spec_from_json(detail::field(gj, "covariance_spec")));
      if (m.type == ModelType::sentiment)
      {
        m.degenerate = detail::field(gj, "degenerate").get<bool>();
        for (const auto& l : m.gaussians->labels())
          if (l.empty() || l.find_first_not_of("-0123456789") != std::string::npos)
            throw FormatError("model file: sentiment level '" + l + "' is not an integer");
      }
    }
    m.metadata = j.contains("metadata") ? j.at("metadata") : ordered_json::object();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return m;
}

inline std::string dump_model(const ModelFile& m) { return to_json(m).dump(1) + "\n"; }

inline void save_model(const ModelFile& m, const std::string& path)
{
  const std::string text = dump_model(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("io", "write failed for '" + path + "'");
}

inline ModelFile parse_model(const std::string& text)
{
  ordered_json j;
  try
  {
    j = ordered_json::parse(text);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline ModelFile load_model(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline EmotionClassifier as_classifier(const ModelFile& m)
{
  if (m.type != ModelType::emotion_classifier)
    throw InvalidArgument(std::string("expected an emotion_classifier model, got ") + to_string(m.type));
  return {m.manifold, *m.gaussians};
}

inline SentimentModel as_sentiment(const ModelFile& m)
{
  if (m.type != ModelType::sentiment)
    throw InvalidArgument(std::string("expected a sentiment model, got ") + to_string(m.type));
  SentimentModel s;
  for (const auto& l : m.gaussians->labels()) s.levels.push_back(std::stoi(l));
  s.gaussians = *m.gaussians;
  s.manifold = m.manifold;
  s.degenerate = m.degenerate;
  return s;
}

// ---------------------------------------------------------------- CSV

inline std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV line, honouring double-quoted fields.
inline std::vector<std::string> parse_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    const char c = line[i];
    if (quoted)
    {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
      {
        cur += '"';
        ++i;
      }
      else if (c == '"')
        quoted = false;
      else
        cur += c;
    }
    else if (c == '"')
      quoted = true;
    else if (c == ',')
    {
      out.push_back(std::move(cur));
      cur.clear();
    }
    else if (c != '\r')
      cur += c;
  }
  if (quoted) throw FormatError("unterminated quoted CSV field");
  out.push_back(std::move(cur));
  return out;
}

inline void write_centroids_csv(std::ostream& os, const std::vector<std::string>& labels, const Eigen::MatrixXd& mu)
{
  os << "label";
  for (Eigen::Index k = 0; k < mu.cols(); ++k) os << ",z" << (k + 1);
  os << '\n';
  for (Eigen::Index r = 0; r < mu.rows(); ++r)
  {
    os << csv_field(labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index k = 0; k < mu.cols(); ++k) os << ',' << format_double(mu(r, k));
    os << '\n';
  }
}

inline void write_distance_csv(std::ostream& os, const std::vector<std::string>& labels, const Eigen::MatrixXd& d)
{
  os << "label";
  for (const auto& l : labels) os << ',' << csv_field(l);
  os << '\n';
  for (Eigen::Index r = 0; r < d.rows(); ++r)
  {
    os << csv_field(labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < d.cols(); ++c) os << ',' << format_double(d(r, c));
    os << '\n';
  }
}

struct DistanceTable
{
  std::vector<std::string> labels;
  Eigen::MatrixXd distances;
};

inline DistanceTable read_distance_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) throw FormatError("distance CSV is empty");
  auto header = parse_csv_line(line);
  if (header.size() < 2) throw FormatError("distance CSV header needs at least one label");
  DistanceTable t;
  t.labels.assign(header.begin() + 1, header.end());
  const auto C = static_cast<Eigen::Index>(t.labels.size());
  t.distances.resize(C, C);
  Eigen::Index r = 0;
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r") continue;
    const auto cells = parse_csv_line(line);
    if (r >= C) throw FormatError("distance CSV has more rows than labels");
    if (cells.size() != static_cast<std::size_t>(C) + 1)
      throw FormatError("distance CSV row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(C + 1));
    if (cells[0] != t.labels[static_cast<std::size_t>(r)])
      throw FormatError("distance CSV row label '" + cells[0] + "' does not match column '" +
                        t.labels[static_cast<std::size_t>(r)] + "'");
    for (Eigen::Index c = 0; c < C; ++c)
    {
      const std::string& s = cells[static_cast<std::size_t>(c) + 1];
      std::size_t used = 0;
      double v = 0.0;
      try
      {
        v = std::stod(s, &used);
      }
      catch (const std::exception&)
      {
        used = 0;
      }
      if (used == 0 || used != s.size()) throw FormatError("distance CSV: non-numeric entry '" + s + "'");
      t.distances(r, c) = v;
    }
    ++r;
  }
  if (r != C) throw FormatError("distance CSV has " + std::to_string(r) + " rows for " + std::to_string(C) + " labels");
  validate_distance_matrix(t.distances, t.labels.size());
  return t;
}

inline void write_voronoi_csv(std::ostream& os, const VoronoiGrid& g, const std::vector<std::string>& labels)
{
  os << "x,y,label\n";
  for (std::size_t j = 0; j < g.resolution; ++j)
    for (std::size_t i = 0; i < g.resolution; ++i)
      os << format_double(g.x_at(i)) << ',' << format_double(g.y_at(j)) << ',' << csv_field(labels[g.at(i, j)]) << '\n';
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve, std::size_t ax, std::size_t ay)
{
  os << "rating,z" << (ax + 1) << ",z" << (ay + 1) << '\n';
  for (const auto& p : curve) os << p.rating << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

inline void write_assignments_csv(std::ostream& os, const std::map<std::string, std::size_t>& assignment)
{
  os << "label,cluster\n";
  for (const auto& [label, c] : assignment) os << csv_field(label) << ',' << c << '\n';
}

} // namespace mood
