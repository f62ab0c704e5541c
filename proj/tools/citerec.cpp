// citerec: command-line driver for the citation recommendation pipeline.
//
// Stages write into <artifacts>/<stage>-<hash>/ where the hash covers the
// stage's parameters and its parent stage's hash, so changing any upstream
// input or setting moves every downstream artifact to a fresh directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "citerec.hpp"
#include "citerec/stopwords.hpp"

namespace fs = std::filesystem;
using namespace citerec;

namespace {

struct Options {
  std::string corpus;
  std::string authorities;
  std::string artifacts = "artifacts";
  std::vector<std::string> reporters = AuthorityIndex::default_reporters();
  std::vector<double> ratios = {0.72, 0.18, 0.10};
  std::string scheme = "binary";
  std::vector<std::string> features = {"year", "issue_area", "vlj"};
  std::string model = "cf";
  std::string protocol;  // empty: the model's natural protocol
  bool fusion = false;
  std::string citations;
  std::string text;
  std::string text_file;
  int year = 0, issue_area = 0, vlj = 0;
  std::size_t export_epochs = 1;
  std::string export_split = "train";
  PipelineConfig cfg;
};

class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::string& stage, const fs::path& dir)
      : Error("missing artifacts of stage '" + stage + "' (expected " + dir.string() + "); run `citerec " +
              stage + "` first") {}
};

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw Error("write failed: " + p.string());
}

// A stage identity: "<name>-<hash>" where the hash covers parent and params.
struct Stage {
  std::string name;
  std::string id;
  std::vector<std::pair<std::string, std::string>> params;

  Stage(std::string stage, const Stage* parent, std::vector<std::pair<std::string, std::string>> ps)
      : name(std::move(stage)), params(std::move(ps)) {
    std::string canon = "stage=" + name + "\n";
    if (parent) canon += "parent=" + parent->id + "\n";
    for (const auto& [k, v] : params) canon += k + "=" + v + "\n";
    id = name + "-" + hex64(fnv1a(canon));
    if (parent) params.insert(params.begin(), {"parent", parent->id});
  }
};

class Workspace {
 public:
  explicit Workspace(const Options& o) : o_(o) {}

  const Stage& ingest() {
    if (!ingest_) {
      if (o_.corpus.empty() || o_.authorities.empty()) {
        throw InvalidArgument("--corpus and --authorities are required");
      }
      ingest_.emplace("ingest", nullptr,
                      std::vector<std::pair<std::string, std::string>>{
                          {"corpus_sha", hex64(fnv1a(read_file(o_.corpus)))},
                          {"authorities_sha", hex64(fnv1a(read_file(o_.authorities)))},
                          {"reporters", join(o_.reporters)}});
    }
    return *ingest_;
  }
  const Stage& split() {
    if (!split_) {
      const auto& c = o_.cfg;
      split_.emplace("split", &ingest(),
                     std::vector<std::pair<std::string, std::string>>{
                         {"ratios", num(c.ratios.train) + "," + num(c.ratios.validation) + "," +
                                        num(c.ratios.test)},
                         {"seed", std::to_string(c.seed)}});
    }
    return *split_;
  }
  const Stage& vocab() {
    if (!vocab_) {
      vocab_.emplace("vocab", &split(),
                     std::vector<std::pair<std::string, std::string>>{
                         {"min_count", std::to_string(o_.cfg.min_count)}});
    }
    return *vocab_;
  }
  const Stage& cf() {
    if (!cf_) {
      cf_.emplace("train-cf", &vocab(),
                  std::vector<std::pair<std::string, std::string>>{
                      {"scheme", std::string(to_string(o_.cfg.scheme))},
                      {"K", std::to_string(o_.cfg.k)}});
    }
    return *cf_;
  }
  const Stage& context() {
    if (!context_) {
      const auto& c = o_.cfg;
      context_.emplace("train-context", &vocab(),
                       std::vector<std::pair<std::string, std::string>>{
                           {"max_terms", std::to_string(c.text.max_terms)},
                           {"min_df", std::to_string(c.text.min_df)},
                           {"context_len", std::to_string(c.context_len)},
                           {"cap", std::to_string(c.cap)},
                           {"seed", std::to_string(c.seed)}});
    }
    return *context_;
  }
  const Stage& model(ModelKind m) {
    switch (m) {
      case ModelKind::Cf: return cf();
      case ModelKind::Context: return context();
      case ModelKind::Majority: break;
    }
    return vocab();
  }
  const Stage& fusion(ModelKind m) {
    if (!fusion_) {
      const auto& c = o_.cfg;
      fusion_.emplace("train-fusion", &model(m),
                      std::vector<std::pair<std::string, std::string>>{
                          {"model", std::string(to_string(m))},
                          {"features", join(c.features.column_names())},
                          {"alpha", num(c.alpha)},
                          {"C", num(c.svm.c)},
                          {"epochs", std::to_string(c.svm.epochs)},
                          {"fusion_docs", std::to_string(c.fusion_docs)},
                          {"fusion_pool", std::to_string(c.fusion_pool)},
                          {"context_len", std::to_string(c.context_len)},
                          {"seed", std::to_string(c.seed)}});
    }
    return *fusion_;
  }

  fs::path dir(const Stage& s) const { return fs::path(o_.artifacts) / s.id; }

  // Directory of a stage whose outputs must already exist.
  fs::path require(const Stage& s) const {
    const auto d = dir(s);
    if (!fs::exists(d / "manifest.json")) throw MissingArtifact(s.name, d);
    return d;
  }

  // Fresh output directory with its manifest.
  fs::path create(const Stage& s) const {
    const auto d = dir(s);
    fs::create_directories(d);
    nlohmann::ordered_json m;
    m["stage"] = s.name;
    m["id"] = s.id;
    auto& p = m["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.params) p[k] = v;
    auto out = open_out(d / "manifest.json");
    out << m.dump(2) << '\n';
    close_checked(out, d / "manifest.json");
    return d;
  }

  // Loaders
  AuthorityIndex authorities() const {
    auto in = open_in(o_.authorities);
    return AuthorityIndex::from_csv(in, o_.reporters);
  }
  std::vector<NormalizedDocument> normalized() {
    auto in = open_in(require(ingest()) / "normalized.jsonl");
    return read_normalized_jsonl(in);
  }
  CorpusSplit load_split() {
    auto in = open_in(require(split()) / "split.json");
    return split_from_json(nlohmann::json::parse(in));
  }
  const CitationVocabulary& load_vocab() {
    if (!vocabulary_) {
      auto in = open_in(require(vocab()) / "vocab.tsv");
      vocabulary_ = CitationVocabulary::read_tsv(in);
    }
    return *vocabulary_;
  }
  const std::vector<Document>& documents() {
    if (!documents_) {
      auto in = open_in(require(vocab()) / "tokens.jsonl");
      documents_ = read_tokens_jsonl(in);
    }
    return *documents_;
  }
  std::vector<Document> split_documents(const std::vector<std::string>& ids) {
    return select_documents(documents(), ids);
  }

 private:
  const Options& o_;
  std::optional<Stage> ingest_, split_, vocab_, cf_, context_, fusion_;
  std::optional<CitationVocabulary> vocabulary_;
  std::optional<std::vector<Document>> documents_;
};

// Models loaded for one command. The members own what Models points at.
struct LoadedModels {
  std::optional<CfModel> cf;
  std::optional<TextVocabulary> tv;
  std::optional<ContextBank> bank;
  std::optional<FeatureScoreTable> table;
  std::optional<FusionWeights> fusion;
  Models view;
};

void load_models(Workspace& ws, const Options& o, ModelKind kind, bool with_fusion, LoadedModels& lm) {
  lm.view.vocab = &ws.load_vocab();
  if (kind == ModelKind::Cf) {
    auto in = open_in(ws.require(ws.cf()) / "cf.json");
    lm.cf = CfModel::load(in);
    lm.view.cf = &*lm.cf;
  } else if (kind == ModelKind::Context) {
    const auto d = ws.require(ws.context());
    auto tin = open_in(d / "text_vocab.tsv");
    lm.tv = TextVocabulary::read_tsv(tin);
    auto bin = open_in(d / "bank.json");
    lm.bank = ContextBank::load(bin);
    lm.view.text_vocab = &*lm.tv;
    lm.view.bank = &*lm.bank;
  }
  if (with_fusion) {
    auto in = open_in(ws.require(ws.fusion(kind)) / "fusion.json");
    lm.fusion = FusionWeights::load(in);
    if (lm.fusion->columns != o.cfg.features.column_names()) {
      throw InvalidArgument("fusion weights were trained with columns " + join(lm.fusion->columns));
    }
    lm.view.fusion = &*lm.fusion;
  }
  if (with_fusion || kind != ModelKind::Majority) {
    const auto train = ws.split_documents(ws.load_split().train);
    lm.table = FeatureScoreTable::build(train, lm.view.vocab->size(), o.cfg.alpha);
    lm.view.table = &*lm.table;
  }
}

// ---------------------------------------------------------------------------
// Commands

void cmd_ingest(Workspace& ws, const Options& o) {
  const auto index = ws.authorities();
  auto in = open_in(o.corpus);
  const auto raw = read_corpus_jsonl(in);
  std::vector<NormalizedDocument> norm;
  norm.reserve(raw.size());
  std::size_t cites = 0, unknown = 0;
  for (const auto& d : raw) {
    norm.push_back(normalize_document(d, index));
    for (const auto& t : norm.back().tokens) {
      if (!t.is_cite) continue;
      ++cites;
      if (t.citation.is_unknown()) ++unknown;
    }
  }
  const auto dir = ws.create(ws.ingest());
  auto out = open_out(dir / "normalized.jsonl");
  write_normalized_jsonl(out, norm);
  close_checked(out, dir / "normalized.jsonl");
  std::cout << "ingest: " << norm.size() << " documents, " << cites << " citations (" << unknown
            << " unresolved), " << index.size() << " authorities -> " << dir.string() << '\n';
}

void cmd_split(Workspace& ws, const Options& o) {
  std::vector<std::string> ids;
  for (const auto& d : ws.normalized()) ids.push_back(d.id);
  const auto s = split_corpus(std::move(ids), o.cfg.ratios, o.cfg.seed);
  const auto dir = ws.create(ws.split());
  auto out = open_out(dir / "split.json");
  out << to_json(s).dump(2) << '\n';
  close_checked(out, dir / "split.json");
  std::cout << "split: train " << s.train.size() << ", validation " << s.validation.size()
            << ", test " << s.test.size() << " in " << s.test_folds.size() << " folds -> "
            << dir.string() << '\n';
}

void cmd_vocab(Workspace& ws, const Options& o) {
  const auto norm = ws.normalized();
  const auto s = ws.load_split();
  const auto vocab = vocabulary_from_training(norm, s.train, o.cfg.min_count);
  const auto docs = index_documents(norm, vocab);
  const auto dir = ws.create(ws.vocab());
  auto vout = open_out(dir / "vocab.tsv");
  vocab.write_tsv(vout);
  close_checked(vout, dir / "vocab.tsv");
  auto tout = open_out(dir / "tokens.jsonl");
  write_tokens_jsonl(tout, docs);
  close_checked(tout, dir / "tokens.jsonl");
  std::cout << "vocab: " << vocab.size() << " entries (min_count " << o.cfg.min_count << ", UNK count "
            << vocab[vocab.unk_index()].count << ") -> " << (dir / "vocab.tsv").string() << '\n';
}

void cmd_train_cf(Workspace& ws, const Options& o) {
  const auto& vocab = ws.load_vocab();
  const auto train = ws.split_documents(ws.load_split().train);
  const auto model = CfModel::build(train, vocab, o.cfg.scheme, o.cfg.k);
  const auto dir = ws.create(ws.cf());
  auto out = open_out(dir / "cf.json");
  model.save(out);
  close_checked(out, dir / "cf.json");
  std::cout << "train-cf: " << train.size() << " training documents, scheme "
            << to_string(o.cfg.scheme) << ", K " << o.cfg.k << " -> " << (dir / "cf.json").string()
            << '\n';
}

void cmd_train_context(Workspace& ws, const Options& o) {
  const auto& vocab = ws.load_vocab();
  const auto train = ws.split_documents(ws.load_split().train);
  const auto tv = TextVocabulary::build(train, vocab.size(), english_stopwords(), o.cfg.text);
  const auto bank =
      ContextBank::build(train, tv, vocab.size(), vocab.unk_index(), o.cfg.bank_options());
  const auto dir = ws.create(ws.context());
  auto tout = open_out(dir / "text_vocab.tsv");
  tv.write_tsv(tout);
  close_checked(tout, dir / "text_vocab.tsv");
  auto bout = open_out(dir / "bank.json");
  bank.save(bout);
  close_checked(bout, dir / "bank.json");
  std::size_t contexts = 0;
  for (Index c = 0; c < bank.citation_count(); ++c) contexts += bank.k(c);
  std::cout << "train-context: " << tv.word_count() << " words, " << contexts << " contexts -> "
            << dir.string() << '\n';
}

void cmd_train_fusion(Workspace& ws, const Options& o) {
  const auto kind = model_kind_from_string(o.model);
  LoadedModels lm;
  load_models(ws, o, kind, false, lm);
  const auto train = ws.split_documents(ws.load_split().train);
  const auto fw = train_fusion(lm.view, kind, train, o.cfg);
  const auto dir = ws.create(ws.fusion(kind));
  auto out = open_out(dir / "fusion.json");
  fw.save(out);
  close_checked(out, dir / "fusion.json");
  std::cout << "train-fusion: model " << o.model << ", weights";
  for (std::size_t i = 0; i < fw.w.size(); ++i) std::cout << ' ' << fw.columns[i] << '=' << num(fw.w[i]);
  std::cout << " -> " << (dir / "fusion.json").string() << '\n';
}

Protocol protocol_for(const Options& o, ModelKind kind) {
  return o.protocol.empty() ? default_protocol(kind) : protocol_from_string(o.protocol);
}

Stage evaluate_stage(Workspace& ws, const Options& o, ModelKind kind, Protocol protocol) {
  const auto& c = o.cfg;
  std::string ks;
  for (auto k : c.ks) ks += (ks.empty() ? "" : ",") + std::to_string(k);
  const Stage& parent = o.fusion ? ws.fusion(kind) : ws.model(kind);
  return Stage("evaluate", &parent,
               {{"model", std::string(to_string(kind))},
                {"fusion", o.fusion ? "true" : "false"},
                {"protocol", std::string(to_string(protocol))},
                {"ks", ks},
                {"top_n", std::to_string(c.top_n)},
                {"max_prefixes", std::to_string(c.max_prefixes)},
                {"context_len", std::to_string(c.context_len)},
                {"forecast_len", std::to_string(c.forecast_len)},
                {"passes", std::to_string(c.eval_passes)},
                {"exhaustive", c.exhaustive ? "true" : "false"},
                {"seed", std::to_string(c.seed)}});
}

template <typename F>
void write_artifact(const fs::path& p, F&& body) {
  auto out = open_out(p);
  body(out);
  close_checked(out, p);
}

void cmd_evaluate(Workspace& ws, const Options& o) {
  const auto kind = model_kind_from_string(o.model);
  const auto protocol = protocol_for(o, kind);
  LoadedModels lm;
  load_models(ws, o, kind, o.fusion, lm);
  const auto s = ws.load_split();
  const auto test = ws.split_documents(s.test);
  const auto ev = evaluate(lm.view, kind, protocol, test, s, o.cfg, o.fusion);
  const auto dir = ws.create(evaluate_stage(ws, o, kind, protocol));
  write_artifact(dir / "report.json", [&](std::ostream& out) { out << to_json(ev.report).dump(2) << '\n'; });
  write_artifact(dir / "report.csv", [&](std::ostream& out) { write_report_csv(out, ev.report); });
  write_artifact(dir / "by_class.csv", [&](std::ostream& out) { ev.tables.by_class.write_csv(out); });
  write_artifact(dir / "by_year.csv", [&](std::ostream& out) { ev.tables.by_year.write_csv(out); });
  write_artifact(dir / "by_distance.csv", [&](std::ostream& out) { ev.tables.by_distance.write_csv(out); });
  write_artifact(dir / "per_citation.csv", [&](std::ostream& out) { ev.tables.per_citation.write_csv(out); });
  for (const auto& r : ev.report.recall) {
    std::cerr << "recall@" << r.k << ": " << detail::fmt_num(r.fold_mean) << " +/- " << detail::fmt_num(r.fold_stderr)
              << " (instances " << ev.report.instances << ")\n";
  }
  std::cout << (dir / "report.json").string() << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

void cmd_recommend(Workspace& ws, const Options& o) {
  const auto kind = model_kind_from_string(o.model);
  const bool have_cites = !o.citations.empty();
  const bool have_text = !o.text.empty() || !o.text_file.empty();
  if (have_cites == have_text) {
    throw InvalidArgument("recommend needs exactly one of --citations or --text/--text-file");
  }
  LoadedModels lm;
  load_models(ws, o, kind, o.fusion, lm);
  const auto& vocab = ws.load_vocab();

  Document query{"<query>", {}, {o.year, o.issue_area, o.vlj}};
  RecommendOptions ropts{.top_n = o.cfg.top_n,
                         .fusion = o.fusion,
                         .fusion_pool = o.cfg.fusion_pool,
                         .features = o.cfg.features};
  RankedList ranked;
  if (have_cites) {
    std::vector<Index> partial;
    for (const auto& key : split_list(o.citations)) {
      if (!vocab.contains(key)) std::cerr << "citerec: warning: '" << key << "' is not in the vocabulary\n";
      partial.push_back(vocab.lookup(key));
    }
    ranked = list_recommender(lm.view, kind, ropts)(partial, query);
  } else {
    std::string text = o.text;
    if (!o.text_file.empty()) {
      text = o.text_file == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                : read_file(o.text_file);
    }
    query.tokens = tokenize(text, vocab, ws.authorities());
    const auto window = preceding_window(query.tokens, query.tokens.size(), o.cfg.context_len);
    ranked = context_recommender(lm.view, kind, ropts)(window, query);
  }

  nlohmann::ordered_json j;
  j["model"] = std::string(to_string(kind)) + (o.fusion ? "+fusion" : "");
  auto& recs = j["recommendations"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& item = ranked[i];
    const auto& e = vocab[item.citation];
    nlohmann::ordered_json r;
    r["rank"] = i + 1;
    r["index"] = item.citation;
    r["key"] = e.citation.key;
    r["class"] = std::string(to_string(e.citation.cls));
    r["score"] = item.score;
    recs.push_back(std::move(r));
  }
  std::cout << j.dump(2) << '\n';
}

void cmd_export_windows(Workspace& ws, const Options& o) {
  const auto& vocab = ws.load_vocab();
  const auto s = ws.load_split();
  std::vector<Document> docs;
  if (o.export_split == "all") {
    docs = ws.documents();
  } else {
    const auto& ids = o.export_split == "train"        ? s.train
                      : o.export_split == "validation" ? s.validation
                                                       : s.test;
    docs = ws.split_documents(ids);
  }
  const auto& spec = o.cfg.export_spec;
  const Stage stage("export-windows", &ws.vocab(),
                    {{"context_len", std::to_string(spec.context_len)},
                     {"forecast_len", std::to_string(spec.forecast_len)},
                     {"epochs", std::to_string(o.export_epochs)},
                     {"split", o.export_split},
                     {"seed", std::to_string(o.cfg.seed)}});
  const auto dir = ws.create(stage);
  auto out = open_out(dir / "windows.jsonl");
  const auto n = export_instances(docs, spec, vocab.unk_index(), o.export_epochs, o.cfg.seed, out);
  close_checked(out, dir / "windows.jsonl");
  std::cout << "export-windows: " << n << " instances -> " << (dir / "windows.jsonl").string() << '\n';
}

FeatureSet feature_set(const std::vector<std::string>& names) {
  FeatureSet f{false, false, false};
  for (const auto& n : names) {
    if (n == "year") {
      f.year = true;
    } else if (n == "issue_area") {
      f.issue_area = true;
    } else if (n == "vlj") {
      f.vlj = true;
    } else if (n != "none") {
      throw InvalidArgument("unknown feature '" + n + "' (year|issue_area|vlj|none)");
    }
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Citation recommendation for veterans' appeals decisions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file (TOML/INI); flags override it");

  Options o;
  auto& c = o.cfg;
  std::string ks = "1,5,20";

  app.add_option("--corpus", o.corpus, "Corpus JSONL (id, text, year, issue_area, vlj)");
  app.add_option("--authorities", o.authorities, "Authority CSV");
  app.add_option("--artifacts", o.artifacts, "Artifact root directory")->capture_default_str();
  app.add_option("--reporters", o.reporters, "Indexed reporters")->delimiter(',')->capture_default_str();
  app.add_option("--ratios", o.ratios, "train,validation,test ratios")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--min-count", c.min_count, "Citation vocabulary threshold")->capture_default_str();
  app.add_option("--scheme", o.scheme, "CF weighting")
      ->check(CLI::IsMember({"binary", "tf", "tfidf"}))
      ->capture_default_str();
  app.add_option("-K,--neighbors", c.k, "CF neighbourhood size")->capture_default_str();
  app.add_option("--max-terms", c.text.max_terms, "Text vocabulary size")->capture_default_str();
  app.add_option("--min-df", c.text.min_df, "Minimum word document frequency")->capture_default_str();
  app.add_option("--context-len", c.context_len, "Context window l (tokens)")->capture_default_str();
  app.add_option("--cap", c.cap, "Stored contexts per citation")->capture_default_str();
  app.add_option("--forecast-len", c.forecast_len, "Forecast window w (tokens)")->capture_default_str();
  app.add_option("--k", ks, "Recall cutoffs, comma separated")->capture_default_str();
  app.add_option("--top-n", c.top_n, "Recommendations per query")->capture_default_str();
  app.add_option("--max-prefixes", c.max_prefixes, "Prefixes per document (0: all)")->capture_default_str();
  app.add_option("--passes", c.eval_passes, "Sampled instances per test document")->capture_default_str();
  app.add_flag("--exhaustive", c.exhaustive, "Evaluate every valid offset");
  app.add_option("--model", o.model, "Base model")
      ->check(CLI::IsMember({"cf", "context", "majority"}))
      ->capture_default_str();
  app.add_option("--protocol", o.protocol, "citation-list or context (default: by model)")
      ->check(CLI::IsMember({"citation-list", "context"}));
  app.add_flag("--fusion", o.fusion, "Rerank with metadata fusion weights");
  app.add_option("--features", o.features, "Fusion features (year,issue_area,vlj or none)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--alpha", c.alpha, "Laplace smoothing")->capture_default_str();
  app.add_option("--svm-c", c.svm.c, "SVM regularization C")->capture_default_str();
  app.add_option("--epochs", c.svm.epochs, "SVM epochs")->capture_default_str();
  app.add_option("--fusion-docs", c.fusion_docs, "Training documents sampled for fusion")
      ->capture_default_str();
  app.add_option("--fusion-pool", c.fusion_pool, "Candidates reranked")->capture_default_str();
  app.add_option("--export-context-len", c.export_spec.context_len, "Exported context length l")
      ->capture_default_str();
  app.add_option("--export-forecast-len", c.export_spec.forecast_len, "Exported forecast window w")
      ->capture_default_str();
  app.add_option("--export-epochs", o.export_epochs, "Instances per document")->capture_default_str();
  app.add_option("--export-split", o.export_split, "Documents to export")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}))
      ->capture_default_str();
  app.add_option("--citations", o.citations, "Query citation keys, comma separated");
  app.add_option("--text", o.text, "Query text");
  app.add_option("--text-file", o.text_file, "Query text file ('-' for stdin)");
  app.add_option("--year", o.year, "Query metadata: year");
  app.add_option("--issue-area", o.issue_area, "Query metadata: issue area");
  app.add_option("--vlj", o.vlj, "Query metadata: judge");

  using Command = void (*)(Workspace&, const Options&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"ingest", "Tokenize the corpus and cache normalized citations", cmd_ingest},
      {"split", "Seeded train/validation/test split with 6 test folds", cmd_split},
      {"vocab", "Build the citation vocabulary from training documents", cmd_vocab},
      {"train-cf", "Build the collaborative filtering model", cmd_train_cf},
      {"train-context", "Build the text context model", cmd_train_context},
      {"train-fusion", "Learn metadata fusion weights for --model", cmd_train_fusion},
      {"evaluate", "Recall@k on the test split", cmd_evaluate},
      {"recommend", "One-shot recommendation", cmd_recommend},
      {"export-windows", "Sample (context, target) windows as JSONL", cmd_export_windows},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    subs.emplace_back(sub, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    c.scheme = scheme_from_string(o.scheme);
    c.ratios = {o.ratios.at(0), o.ratios.at(1), o.ratios.at(2)};
    c.features = feature_set(o.features);
    c.svm.seed = c.seed;
    c.ks.clear();
    for (const auto& k : split_list(ks)) {
      try {
        c.ks.push_back(std::stoul(k));
      } catch (const std::exception&) {
        throw InvalidArgument("bad --k value '" + k + "'");
      }
    }
    c.validate();
    if (o.export_epochs < 1) throw InvalidArgument("export epochs must be >= 1");

    Workspace ws(o);
    for (const auto& [sub, fn] : subs) {
      if (sub->parsed()) fn(ws, o);
    }
  } catch (const MissingArtifact& e) {
    std::cerr << "citerec: error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "citerec: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
