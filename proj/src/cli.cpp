#include "topiclens/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "topiclens/assoc.hpp"
#include "topiclens/bow.hpp"
#include "topiclens/config.hpp"
#include "topiclens/corpus.hpp"
#include "topiclens/error.hpp"
#include "topiclens/eval.hpp"
#include "topiclens/lda.hpp"
#include "topiclens/text.hpp"
#include "topiclens/topic_space.hpp"
#include "topiclens/version.hpp"
#include "topiclens/vis.hpp"

namespace topiclens::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace artifact {
constexpr const char* docs = "docs.jsonl";
constexpr const char* ingest_report = "ingest.json";
constexpr const char* vocab = "vocab.tsv";
constexpr const char* matrix = "dtm.txt";
constexpr const char* model = "model.json";
constexpr const char* theta = "theta.tsv";
constexpr const char* topics = "topics.tsv";
constexpr const char* sweep = "sweep.tsv";
constexpr const char* evaluation = "evaluation.json";
constexpr const char* topic_space = "topic_space.json";
constexpr const char* relevance = "relevance.tsv";
constexpr const char* correlations_tsv = "correlations.tsv";
constexpr const char* correlations_json = "correlations.json";
constexpr const char* vis = "vis.json";
constexpr const char* run_times = "run_times.json";
}  // namespace artifact

namespace {

struct Context {
  PipelineConfig cfg;
  std::string provenance;
  std::ostream& out;

  fs::path at(const std::string& name) const { return cfg.output_dir / name; }

  json provenance_json() const {
    return {{"tool", std::string(kToolName)}, {"version", std::string(kVersion)}, {"config_hash", cfg.hash_hex()}};
  }
};

std::string heatmap_name(GroupLevel level) { return level == GroupLevel::band ? "heatmap_band.tsv" : "heatmap_album.tsv"; }

void require(const Context& ctx, const std::string& name, const std::string& producer) {
  if (!fs::exists(ctx.at(name))) {
    throw DataError("missing artifact " + ctx.at(name).string() + "; run `" + producer + "` first");
  }
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::string num(double v) { return json(v).dump(); }

void record_time(const Context& ctx, const std::string& subcommand) {
  json times = json::object();
  if (fs::exists(ctx.at(artifact::run_times))) {
    try {
      auto in = open_in(ctx.at(artifact::run_times));
      times = json::parse(in);
    } catch (const std::exception&) {
      times = json::object();
    }
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  times[subcommand] = buf;
  auto out = open_out(ctx.at(artifact::run_times));
  out << times.dump(2) << '\n';
}

std::vector<CleanDocument> read_docs(const Context& ctx) {
  require(ctx, artifact::docs, "ingest");
  auto in = open_in(ctx.at(artifact::docs));
  return parse_clean_corpus(in);
}

Vocabulary read_vocab(const Context& ctx) {
  require(ctx, artifact::vocab, "ingest");
  auto in = open_in(ctx.at(artifact::vocab));
  return read_vocabulary(in);
}

DocTermMatrix read_dtm(const Context& ctx) {
  require(ctx, artifact::matrix, "ingest");
  std::vector<std::string> ids;
  for (auto& d : read_docs(ctx)) ids.push_back(std::move(d.id));
  auto in = open_in(ctx.at(artifact::matrix));
  return read_matrix(in, std::move(ids));
}

LdaModel read_model_artifact(const Context& ctx) {
  require(ctx, artifact::model, "train");
  auto in = open_in(ctx.at(artifact::model));
  return read_model(in);
}

std::pair<std::vector<std::string>, DenseMatrix> read_theta(const Context& ctx) {
  require(ctx, artifact::theta, "train");
  auto in = open_in(ctx.at(artifact::theta));
  std::string line;
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t cols = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, '\t')) fields.push_back(field);
    if (!header) {
      if (fields.empty() || fields.front() != "id") throw DataError("theta.tsv: bad header");
      cols = fields.size() - 1;
      header = true;
      continue;
    }
    if (fields.size() != cols + 1) throw DataError("theta.tsv: ragged row");
    ids.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(std::stod(fields[k]));
  }
  DenseMatrix theta(ids.size(), cols);
  theta.data() = std::move(values);
  return {std::move(ids), std::move(theta)};
}

LdaConfig lda_config(const PipelineConfig& cfg) {
  LdaConfig c = cfg.lda;
  c.seed = cfg.lda_seed();
  return c;
}

// ---------------------------------------------------------------- subcommands

void cmd_ingest(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.corpus.empty()) throw UsageError("config: paths.corpus is not set");
  const auto raw = load_corpus(cfg.corpus);
  const MetaStoplist meta = cfg.meta_stoplist.empty() ? MetaStoplist{} : MetaStoplist(read_phrase_file(cfg.meta_stoplist));
  const StopwordList stopwords = cfg.stopwords.empty() ? StopwordList{} : StopwordList(read_phrase_file(cfg.stopwords));
  std::unordered_set<std::string> function_words;
  if (cfg.english_filter) {
    if (cfg.function_words.empty()) throw UsageError("config: english_filter needs paths.function_words");
    for (auto& w : read_phrase_file(cfg.function_words)) function_words.insert(std::move(w));
  }

  std::vector<CleanDocument> clean(raw.size());
  std::vector<char> keep(raw.size(), 1);
  const auto n = static_cast<std::int64_t>(raw.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto d = static_cast<std::size_t>(i);
    clean[d] = scrub_meta(raw[d], meta);
    if (cfg.english_filter) keep[d] = english_heuristic(clean[d], function_words, cfg.english_threshold) ? 1 : 0;
  }
  std::vector<CleanDocument> kept;
  std::size_t dropped_lines = 0;
  for (std::size_t d = 0; d < clean.size(); ++d) {
    dropped_lines += clean[d].dropped_spans.size();
    if (keep[d]) kept.push_back(std::move(clean[d]));
  }

  std::vector<TokenStream> streams(kept.size());
  const PipelineOptions popts{cfg.min_token_length, cfg.stemming};
  const auto m = static_cast<std::int64_t>(kept.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < m; ++i) {
    const auto d = static_cast<std::size_t>(i);
    streams[d] = preprocess(kept[d].id, kept[d].text, stopwords, popts);
  }
  const auto vocab = build_vocabulary(streams, cfg.min_df, cfg.max_df_fraction);
  const auto dtm = vectorize(streams, vocab);

  fs::create_directories(cfg.output_dir);
  {
    auto out = open_out(ctx.at(artifact::docs));
    out << "# " << ctx.provenance << '\n';
    write_clean_corpus(out, kept);
  }
  {
    auto out = open_out(ctx.at(artifact::vocab));
    write_vocabulary(out, vocab, ctx.provenance);
  }
  {
    auto out = open_out(ctx.at(artifact::matrix));
    write_matrix(out, dtm, ctx.provenance);
  }
  {
    std::vector<std::string> empty_ids;
    for (std::size_t d : dtm.empty_rows) empty_ids.push_back(dtm.doc_ids[d]);
    json report = {{"provenance", ctx.provenance_json()},
                   {"documents_read", raw.size()},
                   {"documents_kept", kept.size()},
                   {"dropped_non_english", raw.size() - kept.size()},
                   {"dropped_meta_lines", dropped_lines},
                   {"english_filter", cfg.english_filter},
                   {"vocabulary_size", vocab.size()},
                   {"total_tokens", dtm.total_tokens},
                   {"empty_documents", empty_ids}};
    auto out = open_out(ctx.at(artifact::ingest_report));
    out << report.dump(2) << '\n';
  }
  ctx.out << "ingest: " << kept.size() << " documents, V=" << vocab.size() << ", N=" << dtm.total_tokens << '\n';
}

void cmd_train(Context& ctx) {
  const auto vocab = read_vocab(ctx);
  const auto dtm = read_dtm(ctx);
  if (dtm.vocab_size != vocab.size()) throw DataError("dtm.txt and vocab.tsv disagree on V; rerun `ingest`");
  const auto cfg = lda_config(ctx.cfg);
  const auto fitted = fit(dtm, cfg);
  const auto model = make_model(fitted, cfg, dtm, vocab);
  {
    auto out = open_out(ctx.at(artifact::model));
    write_model(out, model, ctx.provenance);
  }
  const std::size_t K = model.estimates.num_topics();
  {
    auto out = open_out(ctx.at(artifact::theta));
    out << "# " << ctx.provenance << '\n' << "id";
    for (std::size_t k = 0; k < K; ++k) out << "\ttopic_" << (k + 1);
    out << '\n';
    for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
      out << dtm.doc_ids[d];
      for (std::size_t k = 0; k < K; ++k) out << '\t' << num(model.estimates.theta(d, k));
      out << '\n';
    }
  }
  {
    const auto weights = topic_weights(std::span<const std::int64_t>(model.topic_total));
    auto out = open_out(ctx.at(artifact::topics));
    out << "# " << ctx.provenance << '\n' << "topic\tweight\ttop_terms\n";
    const std::size_t n = std::min<std::size_t>(10, vocab.size());
    for (std::size_t k = 0; k < K; ++k) {
      out << (k + 1) << '\t' << num(weights[k]) << '\t';
      const auto terms = top_terms(model.estimates, vocab, static_cast<int>(k), n);
      for (std::size_t i = 0; i < terms.size(); ++i) out << (i ? ", " : "") << vocab.term(static_cast<std::size_t>(terms[i]));
      out << '\n';
    }
  }
  ctx.out << "train: K=" << K << ", " << fitted.samples_averaged << " samples averaged, workers=" << cfg.workers << '\n';
}

void cmd_sweep(Context& ctx) {
  const auto vocab = read_vocab(ctx);
  const auto dtm = read_dtm(ctx);
  SweepOptions opts{ctx.cfg.test_fraction, ctx.cfg.top_m, ctx.cfg.fold_in_sweeps};
  const auto reports = sweep_k(dtm, vocab, ctx.cfg.k_grid, lda_config(ctx.cfg), opts);
  auto out = open_out(ctx.at(artifact::sweep));
  write_sweep_table(out, reports, ctx.provenance);
  ctx.out << "sweep: " << reports.size() << " models evaluated\n";
}

void cmd_evaluate(Context& ctx) {
  const auto model = read_model_artifact(ctx);
  const auto vocab = read_vocab(ctx);
  const auto dtm = read_dtm(ctx);
  if (model.vocab_hash != vocab.hash()) throw DataError("model.json was trained on a different vocabulary; rerun `train`");
  SweepOptions opts{ctx.cfg.test_fraction, ctx.cfg.top_m, ctx.cfg.fold_in_sweeps};
  LdaConfig cfg = lda_config(ctx.cfg);
  cfg.num_topics = model.config.num_topics;
  const auto held_out = sweep_k(dtm, vocab, {cfg.num_topics}, cfg, opts).front();
  const auto coherence = umass_coherence(dtm, model.estimates, vocab, ctx.cfg.top_m);
  double mean = 0.0;
  for (double c : coherence) mean += c;
  mean /= static_cast<double>(coherence.size());
  json report = {{"provenance", ctx.provenance_json()},
                 {"K", model.config.num_topics},
                 {"protocol",
                  "held-out: refit on a hash-of-id train split, fold-in theta on the test split; "
                  "coherence: UMass over top-M terms on the full corpus; natural log (nats/token)"},
                 {"held_out",
                  {{"log_perplexity", held_out.log_perplexity},
                   {"perplexity", held_out.perplexity},
                   {"train_docs", held_out.train_docs},
                   {"test_docs", held_out.test_docs},
                   {"umass_coherence_train_split", held_out.umass_coherence}}},
                 {"trained_model", {{"umass_coherence", mean}, {"per_topic_coherence", coherence}, {"top_m", ctx.cfg.top_m}}}};
  auto out = open_out(ctx.at(artifact::evaluation));
  out << report.dump(2) << '\n';
  ctx.out << "evaluate: perplexity " << held_out.perplexity << ", mean UMass " << mean << '\n';
}

void cmd_project(Context& ctx) {
  const auto model = read_model_artifact(ctx);
  const auto vocab = read_vocab(ctx);
  const auto weights = topic_weights(std::span<const std::int64_t>(model.topic_total));
  const auto space = build_topic_space(model.estimates.phi, weights);
  const std::size_t K = weights.size();
  json coords = json::array();
  for (std::size_t k = 0; k < K; ++k) {
    coords.push_back(std::vector<double>(space.mds.coords.row(k).begin(), space.mds.coords.row(k).end()));
  }
  json jsd = json::array();
  for (std::size_t k = 0; k < K; ++k) jsd.push_back(std::vector<double>(space.jsd.row(k).begin(), space.jsd.row(k).end()));
  json report = {{"provenance", ctx.provenance_json()},
                 {"K", K},
                 {"distance", "jsd"},
                 {"jsd_log_base", 2},
                 {"weights", weights},
                 {"coords", coords},
                 {"eigenvalues", space.mds.eigenvalues},
                 {"spectrum", space.mds.spectrum},
                 {"negative_eigenvalue_mass", space.mds.negative_mass},
                 {"jsd", jsd}};
  {
    auto out = open_out(ctx.at(artifact::topic_space));
    out << report.dump(2) << '\n';
  }
  const auto rankings = term_relevance(model.estimates.phi, vocab, ctx.cfg.lambda, ctx.cfg.top_r, weights);
  auto out = open_out(ctx.at(artifact::relevance));
  out << "# " << ctx.provenance << '\n' << "# lambda=" << num(ctx.cfg.lambda) << '\n';
  out << "topic\trank\tterm\tphi\trelevance\tsaliency\n";
  for (const auto& r : rankings) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      out << (r.topic + 1) << '\t' << (i + 1) << '\t' << vocab.term(static_cast<std::size_t>(e.term)) << '\t' << num(e.phi)
          << '\t' << num(e.relevance) << '\t' << num(e.saliency) << '\n';
    }
  }
  ctx.out << "project: K=" << K << ", negative eigenvalue mass " << space.mds.negative_mass << '\n';
}

void cmd_aggregate(Context& ctx) {
  const auto [ids, theta] = read_theta(ctx);
  std::map<std::string, DocMetadata> meta;
  for (const auto& d : read_docs(ctx)) meta.emplace(d.id, DocMetadata{d.band, d.album, d.year});
  const auto profiles = aggregate_groups(theta, ids, meta, ctx.cfg.group_level);
  auto out = open_out(ctx.at(heatmap_name(ctx.cfg.group_level)));
  write_heatmap(out, profiles, ctx.cfg.group_level, ctx.provenance);
  ctx.out << "aggregate: " << profiles.size() << " groups\n";
}

void cmd_correlate(Context& ctx) {
  const auto [ids, theta] = read_theta(ctx);
  if (ctx.cfg.features.empty()) throw UsageError("no feature table: set paths.features or pass --features");
  const auto features = load_feature_csv(ctx.cfg.features);
  CorrelateOptions opts;
  opts.sample_size = ctx.cfg.sample;
  opts.seed = ctx.cfg.sample_seed();
  opts.alpha = ctx.cfg.alpha;
  opts.permutations = ctx.cfg.p_method == "permutation" ? ctx.cfg.permutations : 0;
  const auto report = correlate(theta, ids, features, opts);
  {
    auto out = open_out(ctx.at(artifact::correlations_tsv));
    write_report_tsv(out, report, ctx.provenance);
  }
  {
    auto out = open_out(ctx.at(artifact::correlations_json));
    write_report_json(out, report, ctx.provenance);
  }
  std::size_t corrected = 0;
  for (const auto& e : report.entries) corrected += e.significant_corrected ? 1 : 0;
  ctx.out << "correlate: n=" << report.n << ", " << report.m_tests << " tests, corrected alpha " << report.corrected_alpha
          << ", " << corrected << " significant after correction\n";
}

void cmd_export_vis(Context& ctx) {
  require(ctx, artifact::topic_space, "project");
  const auto model = read_model_artifact(ctx);
  const auto vocab = read_vocab(ctx);
  json space_json;
  {
    auto in = open_in(ctx.at(artifact::topic_space));
    space_json = json::parse(in);
  }
  TopicSpace space;
  space.weights = space_json.at("weights").get<std::vector<double>>();
  const auto coords = space_json.at("coords").get<std::vector<std::vector<double>>>();
  const std::size_t dims = coords.empty() ? 0 : coords.front().size();
  space.mds.coords = DenseMatrix(coords.size(), dims);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    for (std::size_t c = 0; c < dims; ++c) space.mds.coords(k, c) = coords[k][c];
  }
  VisMetadata meta{model.config.num_topics, ctx.cfg.seed, ctx.cfg.hash_hex(), std::string(kVersion)};
  const auto payload = make_vis_payload(space, model.estimates.phi, vocab, ctx.cfg.top_r, ctx.cfg.lambda, meta);
  if (auto problem = validate_vis_payload(payload); !problem.empty()) throw NumericError("vis payload invalid: " + problem);
  auto out = open_out(ctx.at(artifact::vis));
  out << payload.dump(1) << '\n';
  ctx.out << "export-vis: " << ctx.at(artifact::vis).string() << '\n';
}

void cmd_all(Context& ctx) {
  cmd_ingest(ctx);
  cmd_train(ctx);
  cmd_sweep(ctx);
  cmd_evaluate(ctx);
  cmd_project(ctx);
  cmd_aggregate(ctx);
  if (ctx.cfg.features.empty()) {
    ctx.out << "correlate: skipped (no feature table configured)\n";
  } else {
    cmd_correlate(ctx);
  }
  cmd_export_vis(ctx);
}

struct Options {
  std::string config = "topiclens.toml";
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<std::size_t> sample;
  std::optional<int> iters;
  std::optional<int> workers;
  std::optional<std::string> features;
  std::optional<std::string> out_dir;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyrics topic-model analytics: ingest, LDA, evaluation, topic space, correlation", "topiclens"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  Options opts;

  const std::vector<std::pair<std::string, std::function<void(Context&)>>> commands = {
      {"ingest", cmd_ingest},       {"train", cmd_train},         {"sweep", cmd_sweep},
      {"evaluate", cmd_evaluate},   {"project", cmd_project},     {"aggregate", cmd_aggregate},
      {"correlate", cmd_correlate}, {"export-vis", cmd_export_vis}, {"all", cmd_all},
  };
  const std::map<std::string, std::string> help = {
      {"ingest", "Load, scrub and tokenize the corpus; build vocabulary and document-term matrix"},
      {"train", "Fit LDA by collapsed Gibbs sampling"},
      {"sweep", "Fit and evaluate one model per K in eval.k_grid"},
      {"evaluate", "Held-out perplexity and UMass coherence at the configured K"},
      {"project", "Jensen-Shannon topic distances, MDS map and term relevance"},
      {"aggregate", "Mean topic distribution per album or band"},
      {"correlate", "Spearman correlation of topic shares with feature columns"},
      {"export-vis", "Write the topic explorer payload"},
      {"all", "Run the full chain"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("-c,--config", opts.config, "Configuration file")->capture_default_str();
    sub->add_option("--seed", opts.seed, "Override the top-level seed");
    sub->add_option("--k", opts.k, "Override lda.k")->check(CLI::PositiveNumber);
    sub->add_option("--sample", opts.sample, "Override correlate.sample (0 = all)");
    sub->add_option("--iters", opts.iters, "Override lda.iterations")->check(CLI::PositiveNumber);
    sub->add_option("--workers", opts.workers, "Override lda.workers")->check(CLI::PositiveNumber);
    sub->add_option("--features", opts.features, "Override paths.features");
    sub->add_option("--out", opts.out_dir, "Override paths.output_dir");
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    Context ctx{load_config(opts.config), {}, out};
    auto& cfg = ctx.cfg;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.k) cfg.lda.num_topics = *opts.k;
    if (opts.sample) cfg.sample = *opts.sample;
    if (opts.workers) cfg.lda.workers = *opts.workers;
    if (opts.iters) {
      cfg.lda.iterations = *opts.iters;
      if (cfg.lda.burn_in >= cfg.lda.iterations) cfg.lda.burn_in = cfg.lda.iterations / 2;
    }
    if (opts.features) cfg.features = fs::absolute(*opts.features).lexically_normal();
    if (opts.out_dir) cfg.output_dir = fs::absolute(*opts.out_dir).lexically_normal();
    cfg.lda.validate();
    ctx.provenance = std::string(kToolName) + " " + std::string(kVersion) + " config=" + cfg.hash_hex();

    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (subs[i]->parsed()) {
        fs::create_directories(cfg.output_dir);
        commands[i].second(ctx);
        record_time(ctx, commands[i].first);
      }
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
}

}  // namespace topiclens::cli
