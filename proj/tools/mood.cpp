// mood: command-line front end for fitting, exporting and evaluating mood
// manifold models.

#include "mood/mood.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using mood::ordered_json;

constexpr const char* tool_version = "1.0.0";

struct GlobalFlags
{
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct FeatureFlags
{
  std::uint64_t min_count = 1;
  bool no_stem = false;
  bool no_negation = false;
  int ngram = 1;
  std::string normalization = "l1";

  mood::TokenizerOptions tokenizer() const
  {
    mood::TokenizerOptions t;
    t.stem = !no_stem;
    t.merge_negation = !no_negation;
    t.ngram = ngram;
    return t;
  }
};

struct CovFlags
{
  std::string structure = "full";
  std::string pooling = "pooled";
  double lambda = 0.1;
  std::optional<double> epsilon;
  bool normalize_trace = false;

  mood::CovarianceSpec spec() const
  {
    mood::CovarianceSpec s;
    s.structure = mood::parse_structure(structure);
    s.pooling = mood::parse_pooling(pooling);
    s.lambda = lambda;
    s.epsilon = epsilon;
    s.normalize_trace = normalize_trace;
    s.validate();
    return s;
  }
};

void add_feature_flags(CLI::App* sub, FeatureFlags& f)
{
  sub->add_option("--min-count", f.min_count, "Drop terms seen fewer times")->capture_default_str();
  sub->add_flag("--no-stem", f.no_stem, "Disable Porter stemming");
  sub->add_flag("--no-negation", f.no_negation, "Do not merge negators with the next word");
  sub->add_option("--ngram", f.ngram, "1 = unigrams, 2 = add bigrams")->check(CLI::Range(1, 2))->capture_default_str();
  sub->add_option("--normalization", f.normalization, "none|l1|l2")->capture_default_str();
}

void add_cov_flags(CLI::App* sub, CovFlags& c)
{
  sub->add_option("--structure", c.structure, "full|diagonal")->capture_default_str();
  sub->add_option("--pooling", c.pooling, "pooled (LDA) | per-class (QDA)")->capture_default_str();
  sub->add_option("--lambda", c.lambda, "Shrinkage weight in [0,1]")->capture_default_str();
  sub->add_option("--epsilon", c.epsilon, "Diagonal ridge (default 1e-6 * trace / l)");
  sub->add_flag("--normalize-trace", c.normalize_trace, "Shrink towards trace/l instead of trace");
}

/// Output stream for a path, "-" meaning stdout.
class Output
{
public:
  explicit Output(const std::string& path)
  {
    if (path != "-")
    {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw mood::Error("io", "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close()
  {
    stream().flush();
    if (!stream()) throw mood::Error("io", "write failed");
  }

private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mood::Error("io", "cannot read '" + path + "'");
  return in;
}

mood::CorpusKind kind_of(const std::string& s) { return mood::parse_corpus_kind(s); }

ordered_json base_metadata(const std::string& command, const GlobalFlags& g)
{
  return ordered_json{{"tool", "mood"}, {"tool_version", tool_version}, {"command", command}, {"seed", g.seed}};
}

std::pair<std::size_t, std::size_t> parse_axes(const std::string& s)
{
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw mood::InvalidArgument("axes must be given as i,j");
  try
  {
    return {std::stoul(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
  }
  catch (const std::exception&)
  {
    throw mood::InvalidArgument("malformed axes '" + s + "'");
  }
}

std::optional<mood::AxisRange> parse_range(const std::string& s)
{
  if (s.empty()) return std::nullopt;
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw mood::InvalidArgument("range must be given as min,max");
  try
  {
    return mood::AxisRange{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  }
  catch (const std::exception&)
  {
    throw mood::InvalidArgument("malformed range '" + s + "'");
  }
}

/// Range covering every class mean on `axis` plus three standard deviations.
mood::AxisRange default_range(const mood::GaussianClassModel& g, std::size_t axis)
{
  const auto a = static_cast<Eigen::Index>(axis);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t c = 0; c < g.num_classes(); ++c)
  {
    const double m = g.means()(static_cast<Eigen::Index>(c), a);
    const double sd = std::sqrt(g.covariance(c)(a, a));
    lo = std::min(lo, m - 3.0 * sd);
    hi = std::max(hi, m + 3.0 * sd);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  return {lo, hi};
}

std::optional<mood::BinaryTaskSpec> task_from_flags(const std::string& task, const std::string& custom)
{
  if (!custom.empty()) return mood::parse_binary_task("custom", custom);
  if (task.empty() || task == "multiclass") return std::nullopt;
  if (task == "sentiment") return mood::sentiment_task();
  if (task == "engagement") return mood::engagement_task();
  if (task == "anger") return mood::anger_task();
  throw mood::InvalidArgument("unknown task '" + task + "' (expected multiclass|sentiment|engagement|anger)");
}

std::vector<double> parse_list(const std::string& s)
{
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    }
    catch (const std::exception&)
    {
      throw mood::InvalidArgument("malformed number '" + item + "' in list '" + s + "'");
    }
  }
  return out;
}

/// Featurized documents as written by `featurize`.
struct FeatureRecord
{
  std::string id;
  mood::SparseVector x;
};

std::vector<FeatureRecord> read_features(std::istream& in)
{
  std::vector<FeatureRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty()) continue;
    try
    {
      const auto j = nlohmann::json::parse(line);
      FeatureRecord r;
      r.id = j.at("id").get<std::string>();
      const auto idx = j.at("indices").get<std::vector<std::uint32_t>>();
      const auto val = j.at("values").get<std::vector<double>>();
      if (idx.size() != val.size()) throw mood::FormatError("indices and values differ in length");
      r.x.indices = idx;
      r.x.values = val;
      r.x.vocab_id = mood::parse_fingerprint_hex(j.at("vocabulary_fingerprint").get<std::string>());
      out.push_back(std::move(r));
    }
    catch (const nlohmann::json::exception& e)
    {
      throw mood::FormatError("features line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- commands

struct SynthFlags
{
  std::string preset = "flat";
  std::size_t classes = 3;
  std::size_t docs = 300;
  std::size_t length = 20;
  std::string out = "-";
};

void cmd_synth(const SynthFlags& f, const GlobalFlags& g)
{
  std::optional<mood::Corpus> corpus;
  if (f.preset == "flat")
  {
    mood::FlatConfig c;
    c.classes = f.classes;
    c.docs = f.docs;
    corpus = mood::generate_synthetic(mood::flat_classes(c, mood::mix_seed(g.seed, 0)), f.length, mood::mix_seed(g.seed, 1));
  }
  else if (f.preset == "super-topic")
  {
    mood::SuperTopicConfig c;
    corpus = mood::generate_synthetic(mood::super_topic_classes(c, mood::mix_seed(g.seed, 0)), f.length,
                                      mood::mix_seed(g.seed, 1));
  }
  else if (f.preset == "pairs")
  {
    mood::PlantedPairsConfig c;
    corpus = mood::generate_synthetic(mood::planted_pair_classes(c, mood::mix_seed(g.seed, 0)), f.length,
                                      mood::mix_seed(g.seed, 1));
  }
  else if (f.preset == "latent-emotion")
  {
    mood::LatentSentimentConfig c;
    corpus = mood::latent_emotion_corpus(c, g.seed);
  }
  else if (f.preset == "latent-rating")
  {
    mood::LatentSentimentConfig c;
    corpus = mood::latent_rating_corpus(c, f.docs, g.seed);
  }
  else
    throw mood::InvalidArgument("unknown preset '" + f.preset +
                                "' (expected flat|super-topic|pairs|latent-emotion|latent-rating)");
  Output out(f.out);
  mood::write_corpus(*corpus, out.stream());
  out.close();
}

struct CorpusFlags
{
  std::string corpus;
  std::string kind = "emotion";
};

struct FeaturizeFlags
{
  CorpusFlags in;
  FeatureFlags features;
  std::string model;
  std::string vocab_out;
  std::string out = "-";
};

void cmd_featurize(const FeaturizeFlags& f)
{
  const mood::Corpus corpus = mood::load_corpus(f.in.corpus, kind_of(f.in.kind));
  mood::Featurizer feat;
  if (!f.model.empty())
    feat = mood::load_model(f.model).featurizer;
  else
    feat = mood::make_featurizer(corpus, f.features.min_count, f.features.tokenizer(),
                                 mood::parse_normalization(f.features.normalization));
  const std::string fp = mood::fingerprint_hex(feat.vocab.fingerprint());
  Output out(f.out);
  for (const auto& d : corpus.docs())
  {
    const auto x = feat(d.text);
    ordered_json j;
    j["id"] = d.id;
    if (d.label) j["label"] = *d.label;
    if (d.rating) j["rating"] = *d.rating;
    j["vocabulary_fingerprint"] = fp;
    j["indices"] = x.indices;
    j["values"] = x.values;
    out.stream() << j.dump() << '\n';
  }
  out.close();
  if (!f.vocab_out.empty())
  {
    ordered_json v = ordered_json::array();
    for (const auto& [term, freq] : feat.vocab.entries()) v.push_back({term, freq});
    Output vo(f.vocab_out);
    vo.stream() << v.dump(1) << '\n';
    vo.close();
  }
}

struct FitManifoldFlags
{
  CorpusFlags in;
  FeatureFlags features;
  long dim = 0;
  double ridge = 1e-3;
  std::string out = "-";
};

mood::ModelFile fit_manifold_file(const mood::Corpus& corpus, const FeatureFlags& ff, long dim, double ridge)
{
  mood::ModelFile m;
  m.featurizer = mood::make_featurizer(corpus, ff.min_count, ff.tokenizer(), mood::parse_normalization(ff.normalization));
  const mood::Dataset data = mood::make_dataset(corpus, m.featurizer);
  mood::ManifoldOptions o;
  o.dim = dim;
  o.ridge = ridge;
  m.manifold = mood::fit_manifold(data, m.featurizer.vocab.fingerprint(), o);
  return m;
}

void cmd_fit_manifold(const FitManifoldFlags& f, const GlobalFlags& g)
{
  const mood::Corpus corpus = mood::load_corpus(f.in.corpus, mood::CorpusKind::emotion);
  mood::ModelFile m = fit_manifold_file(corpus, f.features, f.dim, f.ridge);
  m.type = mood::ModelType::manifold;
  m.metadata = base_metadata("fit-manifold", g);
  m.metadata["documents"] = corpus.size();
  Output out(f.out);
  out.stream() << mood::dump_model(m);
  out.close();
}

struct FitClassifierFlags
{
  CorpusFlags in;
  FeatureFlags features;
  CovFlags cov;
  std::string manifold;
  long dim = 0;
  double ridge = 1e-3;
  std::string task;
  std::string binary;
  std::string out = "-";
};

void cmd_fit_classifier(const FitClassifierFlags& f, const GlobalFlags& g)
{
  const mood::Corpus corpus = mood::load_corpus(f.in.corpus, mood::CorpusKind::emotion);
  const auto task = task_from_flags(f.task, f.binary);
  mood::ModelFile m;
  if (!f.manifold.empty())
  {
    const mood::ModelFile base = mood::load_model(f.manifold);
    m.featurizer = base.featurizer;
    m.manifold = base.manifold;
  }
  else if (task)
  {
    // A fresh manifold for a binary task is fit on the two task classes.
    const mood::Corpus relabeled = mood::make_binary_task(corpus, *task);
    m = fit_manifold_file(relabeled, f.features, f.dim, f.ridge);
  }
  else
    m = fit_manifold_file(corpus, f.features, f.dim, f.ridge);

  const mood::Corpus train = task ? mood::make_binary_task(corpus, *task) : corpus;
  const mood::Dataset data = mood::make_dataset(train, m.featurizer);
  auto clf = mood::fit_on_manifold(m.manifold, data, f.cov.spec());
  m.type = mood::ModelType::emotion_classifier;
  m.gaussians = std::move(clf.gaussians);
  m.metadata = base_metadata("fit-classifier", g);
  m.metadata["documents"] = train.size();
  m.metadata["task"] = task ? task->name : "multiclass";
  m.metadata["reused_manifold"] = !f.manifold.empty();
  Output out(f.out);
  out.stream() << mood::dump_model(m);
  out.close();
}

struct PredictFlags
{
  std::string model;
  std::string input;
  std::string features;
  std::string out = "-";
};

void cmd_predict(const PredictFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  const mood::EmotionClassifier clf = mood::as_classifier(m);
  if (f.input.empty() == f.features.empty()) throw mood::InvalidArgument("give exactly one of --input or --features");

  std::vector<FeatureRecord> records;
  if (!f.features.empty())
  {
    auto in = open_input(f.features);
    records = read_features(in);
  }
  else
  {
    auto in = open_input(f.input);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
      ++lineno;
      if (line.empty()) continue;
      try
      {
        const auto j = nlohmann::json::parse(line);
        records.push_back({j.at("id").get<std::string>(), m.featurizer(j.at("text").get<std::string>())});
      }
      catch (const nlohmann::json::exception& e)
      {
        throw mood::CorpusError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  Output out(f.out);
  for (const auto& r : records)
  {
    const Eigen::VectorXd p = mood::softmax(mood::predict_scores(clf, r.x));
    ordered_json j;
    j["id"] = r.id;
    j["label"] = clf.labels()[mood::argmax(p)];
    ordered_json scores = ordered_json::object();
    for (std::size_t c = 0; c < clf.labels().size(); ++c) scores[clf.labels()[c]] = p(static_cast<Eigen::Index>(c));
    j["scores"] = std::move(scores);
    out.stream() << j.dump() << '\n';
  }
  out.close();
}

struct DistancesFlags
{
  std::string model;
  std::string metric = "bhattacharyya";
  std::string out = "-";
};

void cmd_distances(const DistancesFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  if (!m.gaussians) throw mood::InvalidArgument("distances need a model with class Gaussians");
  Eigen::MatrixXd d = mood::bhattacharyya_matrix(*m.gaussians);
  if (f.metric == "hellinger")
    d = d.unaryExpr([](double b) { return -2.0 * std::expm1(-b); });
  else if (f.metric != "bhattacharyya")
    throw mood::InvalidArgument("unknown metric '" + f.metric + "' (expected bhattacharyya|hellinger)");
  Output out(f.out);
  mood::write_distance_csv(out.stream(), m.gaussians->labels(), d);
  out.close();
}

struct ClusterFlags
{
  std::string distances;
  std::size_t k = 0;
  std::string newick = "-";
  std::string assignments;
};

void cmd_cluster(const ClusterFlags& f)
{
  auto in = open_input(f.distances);
  const auto table = mood::read_distance_csv(in);
  const auto tree = mood::linkage_complete(table.distances, table.labels);
  Output out(f.newick);
  out.stream() << mood::to_newick(tree) << '\n';
  out.close();
  if (!f.assignments.empty())
  {
    if (f.k == 0) throw mood::InvalidArgument("--assignments needs --k");
    Output a(f.assignments);
    mood::write_assignments_csv(a.stream(), mood::cut(tree, f.k));
    a.close();
  }
}

struct VoronoiFlags
{
  std::string model;
  std::string axes = "0,1";
  std::string x_range;
  std::string y_range;
  std::size_t resolution = 200;
  std::string out = "-";
};

void cmd_voronoi(const VoronoiFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  if (!m.gaussians) throw mood::InvalidArgument("voronoi needs a model with class Gaussians");
  const auto [ax, ay] = parse_axes(f.axes);
  if (ax >= static_cast<std::size_t>(m.gaussians->dim()) || ay >= static_cast<std::size_t>(m.gaussians->dim()))
    throw mood::InvalidArgument("axes out of range for a " + std::to_string(m.gaussians->dim()) + "-dimensional manifold");
  const auto xr = parse_range(f.x_range).value_or(default_range(*m.gaussians, ax));
  const auto yr = parse_range(f.y_range).value_or(default_range(*m.gaussians, ay));
  const auto grid = mood::voronoi_grid(*m.gaussians, ax, ay, xr, yr, f.resolution);
  Output out(f.out);
  mood::write_voronoi_csv(out.stream(), grid, m.gaussians->labels());
  out.close();
}

struct FitSentimentFlags
{
  std::string manifold;
  std::string corpus;
  CovFlags cov;
  std::string out = "-";
};

void cmd_fit_sentiment(const FitSentimentFlags& f, const GlobalFlags& g)
{
  const mood::ModelFile base = mood::load_model(f.manifold);
  const mood::Corpus corpus = mood::load_corpus(f.corpus, mood::CorpusKind::rating);
  const mood::Dataset data = mood::make_dataset(corpus, base.featurizer);
  auto sm = mood::fit_sentiment(data, base.manifold, f.cov.spec());
  mood::ModelFile m;
  m.type = mood::ModelType::sentiment;
  m.featurizer = base.featurizer;
  m.manifold = base.manifold;
  m.gaussians = std::move(sm.gaussians);
  m.degenerate = sm.degenerate;
  m.metadata = base_metadata("fit-sentiment", g);
  m.metadata["documents"] = corpus.size();
  if (sm.degenerate) std::cerr << "warning: all rating levels share one mean; predictions follow the priors\n";
  Output out(f.out);
  out.stream() << mood::dump_model(m);
  out.close();
}

struct PredictRatingFlags
{
  std::string model;
  std::string input;
  std::string out = "-";
};

void cmd_predict_rating(const PredictRatingFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  const mood::SentimentModel sm = mood::as_sentiment(m);
  auto in = open_input(f.input);
  Output out(f.out);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty()) continue;
    std::string id, text;
    try
    {
      const auto j = nlohmann::json::parse(line);
      id = j.at("id").get<std::string>();
      text = j.at("text").get<std::string>();
    }
    catch (const nlohmann::json::exception& e)
    {
      throw mood::CorpusError("line " + std::to_string(lineno) + ": " + e.what());
    }
    ordered_json j;
    j["id"] = id;
    j["rating"] = mood::predict_rating(sm, m.featurizer(text));
    out.stream() << j.dump() << '\n';
  }
  out.close();
}

struct ExportCentroidsFlags
{
  std::string model;
  std::string out = "-";
};

void cmd_export_centroids(const ExportCentroidsFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  Output out(f.out);
  mood::write_centroids_csv(out.stream(), m.manifold.labels, m.manifold.mu);
  out.close();
}

struct ExportCurveFlags
{
  std::string model;
  std::string axes = "0,1";
  std::string out = "-";
};

void cmd_export_curve(const ExportCurveFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  const auto sm = mood::as_sentiment(m);
  const auto [ax, ay] = parse_axes(f.axes);
  Output out(f.out);
  mood::write_curve_csv(out.stream(), mood::rating_curve(sm, ax, ay), ax, ay);
  out.close();
}

struct TopWordsFlags
{
  std::string model;
  std::size_t axis = 0;
  std::size_t k = 10;
  std::string out = "-";
};

void cmd_top_words(const TopWordsFlags& f)
{
  const mood::ModelFile m = mood::load_model(f.model);
  const auto words = mood::axis_top_words(m.manifold, m.featurizer.vocab, f.axis, f.k);
  Output out(f.out);
  out.stream() << "side,rank,term,weight\n";
  for (std::size_t i = 0; i < words.negative.size(); ++i)
    out.stream() << "negative," << (i + 1) << ',' << mood::csv_field(words.negative[i].term) << ','
                 << mood::format_double(words.negative[i].weight) << '\n';
  for (std::size_t i = 0; i < words.positive.size(); ++i)
    out.stream() << "positive," << (i + 1) << ',' << mood::csv_field(words.positive[i].term) << ','
                 << mood::format_double(words.positive[i].weight) << '\n';
  out.close();
}

struct EvalFlags
{
  CorpusFlags in;
  FeatureFlags features;
  std::string mode = "classify";
  std::size_t trials = 10;
  double train_fraction = 0.5;
  double alpha = 0.05;
  std::string methods = "logreg,lda-diag,lda-full,qda-diag,qda-full";
  std::string lambda_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string ridge_grid = "0.001,0.01,0.1,1";
  std::string logreg_grid = "0.0001,0.001,0.01,0.1";
  std::size_t cv_folds = 3;
  long dim = 0;
  std::string task;
  std::string binary;
  bool reuse_manifold = false;
  // rating-curve mode
  std::string pool;
  std::string test;
  std::string train_sizes = "25,50,100,250,500,1000,2000";
  std::string linreg_grid = "0.0001,0.001,0.01,0.1,1";
  CovFlags cov;
  std::string json_out;
  std::string out = "-";
};

void cmd_eval(const EvalFlags& f, const GlobalFlags& g)
{
  const mood::Corpus corpus = mood::load_corpus(f.in.corpus, mood::CorpusKind::emotion);
  if (f.mode == "classify")
  {
    mood::ExperimentConfig cfg;
    cfg.methods.clear();
    std::stringstream ss(f.methods);
    for (std::string item; std::getline(ss, item, ',');) cfg.methods.push_back(mood::parse_method(item));
    cfg.trials = f.trials;
    cfg.train_fraction = f.train_fraction;
    cfg.alpha = f.alpha;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.min_count = f.features.min_count;
    cfg.tokenizer = f.features.tokenizer();
    cfg.normalization = mood::parse_normalization(f.features.normalization);
    cfg.manifold.dim = f.dim;
    cfg.lambda_grid = parse_list(f.lambda_grid);
    cfg.ridge_grid = parse_list(f.ridge_grid);
    cfg.logreg_grid = parse_list(f.logreg_grid);
    cfg.cv_folds = f.cv_folds;
    cfg.binary_task = task_from_flags(f.task, f.binary);
    cfg.reuse_manifold = f.reuse_manifold;
    const auto rep = mood::run_experiment(corpus, cfg);
    auto j = mood::to_json(rep);
    j["reused_manifold"] = cfg.binary_task && cfg.reuse_manifold;
    Output out(f.out);
    out.stream() << mood::format_table(rep);
    if (cfg.binary_task) out.stream() << "manifold: " << (cfg.reuse_manifold ? "reused from all labels" : "fit on task labels") << '\n';
    out.close();
    if (!f.json_out.empty())
    {
      Output jo(f.json_out);
      jo.stream() << j.dump(1) << '\n';
      jo.close();
    }
  }
  else if (f.mode == "rating-curve")
  {
    if (f.pool.empty() || f.test.empty()) throw mood::InvalidArgument("rating-curve mode needs --pool and --test");
    const mood::Corpus pool = mood::load_corpus(f.pool, mood::CorpusKind::rating);
    const mood::Corpus test = mood::load_corpus(f.test, mood::CorpusKind::rating);
    mood::RatingCurveConfig cfg;
    cfg.train_sizes.clear();
    for (double v : parse_list(f.train_sizes))
    {
      if (!(v >= 1.0) || v != std::floor(v)) throw mood::InvalidArgument("train sizes must be positive integers");
      cfg.train_sizes.push_back(static_cast<std::size_t>(v));
    }
    cfg.trials = f.trials;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.min_count = f.features.min_count;
    cfg.tokenizer = f.features.tokenizer();
    cfg.normalization = mood::parse_normalization(f.features.normalization);
    cfg.manifold.dim = f.dim;
    cfg.sentiment_spec = f.cov.spec();
    cfg.linreg_grid = parse_list(f.linreg_grid);
    const auto rep = mood::run_rating_curve(corpus, pool, test, cfg);
    Output out(f.out);
    char line[160];
    std::snprintf(line, sizeof line, "%10s %12s %12s %10s\n", "train", "manifold-L1", "ridge-L1", "p");
    out.stream() << line;
    for (const auto& p : rep.points)
    {
      std::snprintf(line, sizeof line, "%10zu %12.4f %12.4f %10.3g\n", p.train_size, p.mean_manifold_l1,
                    p.mean_baseline_l1, p.manifold_vs_baseline.p);
      out.stream() << line;
    }
    out.close();
    if (!f.json_out.empty())
    {
      Output jo(f.json_out);
      jo.stream() << mood::to_json(rep).dump(1) << '\n';
      jo.close();
    }
  }
  else
    throw mood::InvalidArgument("unknown eval mode '" + f.mode + "' (expected classify|rating-curve)");
}

std::string one_line(std::string s)
{
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Mood manifold models: fit, export and evaluate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.set_version_flag("--version", tool_version);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Maximum worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto add_corpus = [](CLI::App* sub, CorpusFlags& c, bool with_kind) {
    sub->add_option("--corpus", c.corpus, "JSONL corpus")->required();
    if (with_kind) sub->add_option("--kind", c.kind, "emotion|rating")->capture_default_str();
  };

  SynthFlags synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic JSONL corpus");
  s_synth->add_option("--preset", synth.preset, "flat|super-topic|pairs|latent-emotion|latent-rating")->capture_default_str();
  s_synth->add_option("--classes", synth.classes, "Number of classes (flat)")->capture_default_str();
  s_synth->add_option("--docs", synth.docs, "Number of documents (flat, latent-rating)")->capture_default_str();
  s_synth->add_option("--length", synth.length, "Words per document")->capture_default_str();
  s_synth->add_option("--out", synth.out, "Output path, - for stdout")->capture_default_str();

  FeaturizeFlags feat;
  auto* s_feat = app.add_subcommand("featurize", "Vectorize a corpus as sparse JSONL");
  add_corpus(s_feat, feat.in, true);
  add_feature_flags(s_feat, feat.features);
  s_feat->add_option("--model", feat.model, "Reuse the vocabulary of a model file");
  s_feat->add_option("--vocab-out", feat.vocab_out, "Also write the vocabulary as JSON");
  s_feat->add_option("--out", feat.out, "Output path")->capture_default_str();

  FitManifoldFlags fm;
  auto* s_fm = app.add_subcommand("fit-manifold", "Fit the emotion manifold");
  add_corpus(s_fm, fm.in, false);
  add_feature_flags(s_fm, fm.features);
  s_fm->add_option("--dim", fm.dim, "Manifold dimension (0 = classes - 1)")->capture_default_str();
  s_fm->add_option("--ridge", fm.ridge, "Ridge penalty of the regression")->capture_default_str();
  s_fm->add_option("--out", fm.out, "Model file")->capture_default_str();

  FitClassifierFlags fc;
  auto* s_fc = app.add_subcommand("fit-classifier", "Fit class Gaussians on the manifold");
  add_corpus(s_fc, fc.in, false);
  add_feature_flags(s_fc, fc.features);
  add_cov_flags(s_fc, fc.cov);
  s_fc->add_option("--manifold", fc.manifold, "Reuse the manifold (and vocabulary) of this model file");
  s_fc->add_option("--dim", fc.dim, "Manifold dimension when fitting one")->capture_default_str();
  s_fc->add_option("--ridge", fc.ridge, "Ridge penalty when fitting a manifold")->capture_default_str();
  s_fc->add_option("--task", fc.task, "multiclass|sentiment|engagement|anger");
  s_fc->add_option("--binary", fc.binary, "Custom binary task: pos1,pos2/neg1,neg2");
  s_fc->add_option("--out", fc.out, "Model file")->capture_default_str();

  PredictFlags pr;
  auto* s_pr = app.add_subcommand("predict", "Predict emotion labels with normalized scores");
  s_pr->add_option("--model", pr.model, "Classifier model file")->required();
  s_pr->add_option("--input", pr.input, "JSONL documents with id and text");
  s_pr->add_option("--features", pr.features, "Featurized JSONL from `featurize`");
  s_pr->add_option("--out", pr.out, "Output path")->capture_default_str();

  DistancesFlags di;
  auto* s_di = app.add_subcommand("distances", "Pairwise class distances as CSV");
  s_di->add_option("--model", di.model, "Model with class Gaussians")->required();
  s_di->add_option("--metric", di.metric, "bhattacharyya|hellinger")->capture_default_str();
  s_di->add_option("--out", di.out, "Output path")->capture_default_str();

  ClusterFlags cl;
  auto* s_cl = app.add_subcommand("cluster", "Complete-linkage clustering of a distance CSV");
  s_cl->add_option("--distances", cl.distances, "Distance CSV")->required();
  s_cl->add_option("--k", cl.k, "Number of clusters for --assignments");
  s_cl->add_option("--newick", cl.newick, "Dendrogram output")->capture_default_str();
  s_cl->add_option("--assignments", cl.assignments, "Cluster assignment CSV output");

  VoronoiFlags vo;
  auto* s_vo = app.add_subcommand("voronoi", "Most likely class over a 2D grid, as CSV");
  s_vo->add_option("--model", vo.model, "Model with class Gaussians")->required();
  s_vo->add_option("--axes", vo.axes, "Manifold axes i,j")->capture_default_str();
  s_vo->add_option("--x-range", vo.x_range, "min,max (default: means +- 3 sd)");
  s_vo->add_option("--y-range", vo.y_range, "min,max (default: means +- 3 sd)");
  s_vo->add_option("--resolution", vo.resolution, "Cells per axis")->capture_default_str();
  s_vo->add_option("--out", vo.out, "Output path")->capture_default_str();

  FitSentimentFlags fs;
  auto* s_fs = app.add_subcommand("fit-sentiment", "Fit per-rating Gaussians on a fixed manifold");
  s_fs->add_option("--manifold", fs.manifold, "Model file providing the manifold")->required();
  s_fs->add_option("--corpus", fs.corpus, "Rating JSONL corpus")->required();
  add_cov_flags(s_fs, fs.cov);
  s_fs->add_option("--out", fs.out, "Model file")->capture_default_str();

  PredictRatingFlags prr;
  auto* s_prr = app.add_subcommand("predict-rating", "Predict ratings");
  s_prr->add_option("--model", prr.model, "Sentiment model file")->required();
  s_prr->add_option("--input", prr.input, "JSONL documents with id and text")->required();
  s_prr->add_option("--out", prr.out, "Output path")->capture_default_str();

  ExportCentroidsFlags ec;
  auto* s_ec = app.add_subcommand("export-centroids", "Embedded class centroids as CSV");
  s_ec->add_option("--model", ec.model, "Model file")->required();
  s_ec->add_option("--out", ec.out, "Output path")->capture_default_str();

  ExportCurveFlags ecu;
  auto* s_ecu = app.add_subcommand("export-curve", "Per-rating mean positions as CSV");
  s_ecu->add_option("--model", ecu.model, "Sentiment model file")->required();
  s_ecu->add_option("--axes", ecu.axes, "Manifold axes i,j")->capture_default_str();
  s_ecu->add_option("--out", ecu.out, "Output path")->capture_default_str();

  TopWordsFlags tw;
  auto* s_tw = app.add_subcommand("top-words", "Words with the most extreme weights on one axis");
  s_tw->add_option("--model", tw.model, "Model file")->required();
  s_tw->add_option("--axis", tw.axis, "Manifold axis")->capture_default_str();
  s_tw->add_option("--k", tw.k, "Words per side")->capture_default_str();
  s_tw->add_option("--out", tw.out, "Output path")->capture_default_str();

  EvalFlags ev;
  auto* s_ev = app.add_subcommand("eval", "Repeated-split evaluation against the baselines");
  add_corpus(s_ev, ev.in, false);
  add_feature_flags(s_ev, ev.features);
  add_cov_flags(s_ev, ev.cov);
  s_ev->add_option("--mode", ev.mode, "classify|rating-curve")->capture_default_str();
  s_ev->add_option("--trials", ev.trials, "Random splits")->capture_default_str();
  s_ev->add_option("--train-fraction", ev.train_fraction, "Training share of each split")->capture_default_str();
  s_ev->add_option("--alpha", ev.alpha, "Significance level")->capture_default_str();
  s_ev->add_option("--methods", ev.methods, "Comma-separated methods")->capture_default_str();
  s_ev->add_option("--lambda-grid", ev.lambda_grid, "Shrinkage candidates")->capture_default_str();
  s_ev->add_option("--ridge-grid", ev.ridge_grid, "Manifold ridge candidates")->capture_default_str();
  s_ev->add_option("--logreg-grid", ev.logreg_grid, "Logistic penalty candidates")->capture_default_str();
  s_ev->add_option("--cv-folds", ev.cv_folds, "Cross-validation folds")->capture_default_str();
  s_ev->add_option("--dim", ev.dim, "Manifold dimension (0 = classes - 1)")->capture_default_str();
  s_ev->add_option("--task", ev.task, "multiclass|sentiment|engagement|anger");
  s_ev->add_option("--binary", ev.binary, "Custom binary task: pos1,pos2/neg1,neg2");
  s_ev->add_flag("--reuse-manifold", ev.reuse_manifold, "Binary tasks: keep the manifold fit on all labels");
  s_ev->add_option("--pool", ev.pool, "Rating training pool (rating-curve)");
  s_ev->add_option("--test", ev.test, "Rating test set (rating-curve)");
  s_ev->add_option("--train-sizes", ev.train_sizes, "Rating training sizes (rating-curve)")->capture_default_str();
  s_ev->add_option("--linreg-grid", ev.linreg_grid, "Ridge baseline candidates (rating-curve)")->capture_default_str();
  s_ev->add_option("--json", ev.json_out, "Also write the report as JSON");
  s_ev->add_option("--out", ev.out, "Table output")->capture_default_str();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::CallForAllHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::CallForVersion& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n' << app.help();
    return 2;
  }

  try
  {
    if (*s_synth) cmd_synth(synth, g);
    else if (*s_feat) cmd_featurize(feat);
    else if (*s_fm) cmd_fit_manifold(fm, g);
    else if (*s_fc) cmd_fit_classifier(fc, g);
    else if (*s_pr) cmd_predict(pr);
    else if (*s_di) cmd_distances(di);
    else if (*s_cl) cmd_cluster(cl);
    else if (*s_vo) cmd_voronoi(vo);
    else if (*s_fs) cmd_fit_sentiment(fs, g);
    else if (*s_prr) cmd_predict_rating(prr);
    else if (*s_ec) cmd_export_centroids(ec);
    else if (*s_ecu) cmd_export_curve(ecu);
    else if (*s_tw) cmd_top_words(tw);
    else if (*s_ev) cmd_eval(ev, g);
  }
  catch (const mood::Error& e)
  {
    std::cerr << "error: " << e.kind() << ": " << one_line(e.what()) << '\n';
    return 1;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
