// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/pipeline.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleclass/annotation.hpp"
#include "teleclass/augmentation.hpp"
#include "teleclass/classifier.hpp"
#include "teleclass/enrichment.hpp"
#include "teleclass/evaluation.hpp"
#include "teleclass/refinement.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kEnrichLlm: return "enrich-llm";
    case Stage::kAnnotate: return "annotate";
    case Stage::kEnrichCorpus: return "enrich-corpus";
    case Stage::kRefine: return "refine";
    case Stage::kGenerate: return "generate";
    case Stage::kTrain: return "train";
    case Stage::kPredict: return "predict";
    case Stage::kEvaluate: return "evaluate";
  }
  return "?";
}

std::optional<Stage> stage_from_string(std::string_view s) {
  for (Stage st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BackendError*>(&e)) return 4;
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const LookupError*>(&e)) return 2;
  return 3;
}

// --- lock -------------------------------------------------------------------

WorkdirLock::WorkdirLock(const fs::path& workdir) : file_(workdir / ".teleclass.lock") {
  for (int attempt = 0; attempt < 2; ++attempt) {
    int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      auto pid = std::to_string(::getpid());
      [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    if (errno != EEXIST) {
      throw ValidationError(fmt::format("cannot create lock {}: {}", file_.string(),
                                        std::strerror(errno)));
    }
    // A lock left behind by a dead process is reclaimed once.
    std::string holder;
    try {
      holder = std::string(trim(read_file(file_)));
    } catch (const Error&) {
    }
    long pid = 0;
    try {
      pid = std::stol(holder);
    } catch (const std::exception&) {
    }
    if (pid > 0 && ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH) {
      fs::remove(file_);
      continue;
    }
    break;
  }
  throw LockError(fmt::format("workdir {} is in use (lock file {})",
                              file_.parent_path().string(), file_.string()));
}

WorkdirLock::~WorkdirLock() {
  std::error_code ec;
  fs::remove(file_, ec);
}

// --- stage table -------------------------------------------------------------

namespace {

constexpr const char* kLlmTerms = "llm_terms.json";
constexpr const char* kInitialCores = "initial_cores.jsonl";
constexpr const char* kEnrichedTerms = "enriched_terms.json";
constexpr const char* kRefinedCores = "refined_cores.jsonl";
constexpr const char* kGenerated = "generated.jsonl";
constexpr const char* kModel = "model.json";
constexpr const char* kPredictions = "predictions.jsonl";
constexpr const char* kReport = "report.json";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kTimings = "timings.json";
constexpr const char* kVectorKeys = "vector_keys.txt";

struct Upstream {
  const char* file;
  Stage producer;
};

struct StageSpec {
  std::vector<std::string> config_keys;
  std::vector<std::string> inputs;  // config keys naming external files
  std::vector<Upstream> upstream;
  std::vector<std::string> outputs;
  bool uses_backend = false;
};

const std::vector<std::string> kBackendKeys = {"backend", "http_base_url", "http_model", "domain"};

StageSpec spec_of(Stage s) {
  auto with_backend = [](std::vector<std::string> keys) {
    keys.insert(keys.end(), kBackendKeys.begin(), kBackendKeys.end());
    return keys;
  };
  switch (s) {
    case Stage::kEnrichLlm:
      return {with_backend({"terms_per_class"}), {"taxonomy", "mock_rules", "mock_table"},
              {}, {kLlmTerms}, true};
    case Stage::kAnnotate:
      return {with_backend({"beam_base", "per_parent_beam", "document_word_budget"}),
              {"taxonomy", "corpus", "vectors", "mock_rules", "mock_table"},
              {{kLlmTerms, Stage::kEnrichLlm}},
              {kInitialCores},
              true};
    case Stage::kEnrichCorpus:
      return {{"k", "bm25_k1", "bm25_b", "ngram_max", "min_term_freq", "sibling_exclude_self"},
              {"taxonomy", "corpus", "vectors", "stopwords"},
              {{kLlmTerms, Stage::kEnrichLlm}, {kInitialCores, Stage::kAnnotate}},
              {kEnrichedTerms}};
    case Stage::kRefine:
      return {{"confidence_fraction", "candidates_only_refinement"},
              {"taxonomy", "corpus", "vectors"},
              {{kInitialCores, Stage::kAnnotate}, {kEnrichedTerms, Stage::kEnrichCorpus}},
              {kRefinedCores}};
    case Stage::kGenerate:
      return {with_backend({"q"}), {"taxonomy", "mock_rules", "mock_table"}, {}, {kGenerated},
              true};
    case Stage::kTrain:
      return {{"lr", "batch_size", "epochs", "weight_decay", "seed", "dim_h", "score_form"},
              {"taxonomy", "vectors", "generated_vectors"},
              {{kRefinedCores, Stage::kRefine}, {kGenerated, Stage::kGenerate}},
              {kModel}};
    case Stage::kPredict:
      return {{"threshold"},
              {"test_corpus", "vectors"},
              {{kModel, Stage::kTrain}},
              {kPredictions}};
    case Stage::kEvaluate:
      return {{}, {"taxonomy", "gold"}, {{kPredictions, Stage::kPredict}}, {kReport}};
  }
  return {};
}

std::string jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

Json read_json_file(const fs::path& p) {
  try {
    return Json::parse(read_file(p));
  } catch (const Json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

std::vector<Json> read_jsonl_file(const fs::path& p) {
  std::vector<Json> rows;
  for_each_jsonl(read_file(p), [&](std::size_t, const Json& obj) { rows.push_back(obj); });
  return rows;
}

std::vector<std::string> capped(std::vector<std::string> warnings, std::size_t limit = 50) {
  if (warnings.size() > limit) {
    const std::size_t extra = warnings.size() - limit;
    warnings.resize(limit);
    warnings.push_back(fmt::format("... and {} more", extra));
  }
  return warnings;
}

}  // namespace

// --- implementation ------------------------------------------------------------

struct Pipeline::Impl {
  const PipelineConfig& cfg;
  const Config& config;
  WorkdirLock lock;
  std::unique_ptr<CompletionBackend> backend;
  std::unique_ptr<CompletionCache> cache;
  std::unique_ptr<LlmGateway> gateway;

  std::optional<Taxonomy> taxonomy;
  std::optional<Corpus> corpus;
  std::optional<Corpus> test_corpus;
  std::optional<VectorStore> store;
  Json manifest;

  Impl(const PipelineConfig& c, const Config& raw, std::unique_ptr<CompletionBackend> b)
      : cfg(c), config(raw), lock(c.workdir), backend(std::move(b)) {
    const fs::path mf = cfg.workdir / kManifest;
    manifest = fs::exists(mf) ? read_json_file(mf) : Json{{"stages", Json::object()}};
    if (!manifest.contains("stages")) manifest["stages"] = Json::object();
  }

  fs::path out(const std::string& name) const { return cfg.workdir / name; }

  const Taxonomy& tax() {
    if (!taxonomy) taxonomy = Taxonomy::parse(read_file(cfg.taxonomy));
    return *taxonomy;
  }
  const Corpus& docs() {
    if (!corpus) corpus = Corpus::ingest(read_file(cfg.corpus));
    return *corpus;
  }
  const Corpus& test_docs() {
    if (cfg.test_corpus == cfg.corpus) return docs();
    if (!test_corpus) test_corpus = Corpus::ingest(read_file(cfg.test_corpus));
    return *test_corpus;
  }
  const VectorStore& vectors() {
    if (!store) {
      store = VectorStore::parse(read_file(cfg.vectors));
      if (!cfg.generated_vectors.empty()) {
        store->merge(VectorStore::parse(read_file(cfg.generated_vectors)));
      }
    }
    return *store;
  }

  void ensure_backend() {
    if (!backend) {
      if (cfg.backend == "http") {
        backend = std::make_unique<HttpBackend>(HttpBackendConfig{
            cfg.http_base_url, cfg.http_model, cfg.api_key_env, 0.0, 0.0, 1.0, cfg.http_timeout});
      } else {
        if (cfg.mock_rules.empty() && cfg.mock_table.empty()) {
          throw ValidationError("the mock backend needs mock_rules or mock_table");
        }
        std::unordered_map<std::string, std::string> table;
        if (!cfg.mock_table.empty()) table = MockBackend::parse_table(read_file(cfg.mock_table));
        std::optional<MockRules> rules;
        if (!cfg.mock_rules.empty()) {
          Json j = read_json_file(cfg.mock_rules);
          MockRules r;
          if (j.contains("doc_labels")) {
            r.doc_labels = j["doc_labels"]
                               .get<std::unordered_map<std::string, std::vector<std::string>>>();
          }
          if (j.contains("class_terms")) {
            r.class_terms = j["class_terms"]
                                .get<std::unordered_map<std::string, std::vector<std::string>>>();
          }
          rules = std::move(r);
        }
        backend = std::make_unique<MockBackend>(std::move(table), std::move(rules));
      }
    }
    if (!gateway) {
      cache = std::make_unique<CompletionCache>(cfg.cache);
      gateway = std::make_unique<LlmGateway>(
          *backend, *cache,
          GatewayOptions{cfg.max_retries, std::chrono::milliseconds(cfg.retry_delay_ms),
                         cfg.llm_concurrency});
    }
  }

  DomainProfile domain() const { return DomainProfile::preset(cfg.domain); }

  LlmTermTable llm_terms() { return llm_terms_from_json(tax(), read_json_file(out(kLlmTerms))); }

  std::vector<InitialCoreAssignment> initial_cores() {
    std::vector<InitialCoreAssignment> v;
    for (const auto& row : read_jsonl_file(out(kInitialCores))) {
      v.push_back(initial_assignment_from_json(row));
    }
    return v;
  }

  std::vector<EnrichedTermSet> enriched_terms() {
    std::vector<EnrichedTermSet> v;
    for (const auto& row : read_json_file(out(kEnrichedTerms))) {
      v.push_back(enriched_from_json(row));
    }
    return v;
  }

  // --- stages ---

  std::vector<std::string> enrich_llm() {
    ensure_backend();
    const Taxonomy& t = tax();
    PromptOptions po;
    po.terms_per_class = cfg.terms_per_class;
    LlmEnrichment r = llm_enrich_all(t, *gateway, domain(), po);
    if (r.backend_failures > 0 && r.backend_failures == r.prompts) {
      throw BackendError("every enrichment request failed: " + r.failures.front(), 0);
    }
    write_file_atomic(out(kLlmTerms), llm_terms_to_json(t, r.terms).dump(2) + "\n");
    return r.failures;
  }

  std::vector<std::string> annotate() {
    ensure_backend();
    const Taxonomy& t = tax();
    const LlmTermTable terms = llm_terms();
    SimilarityIndex index(t, terms, vectors());
    std::vector<std::string> warnings;
    if (!index.missing_terms().empty()) {
      warnings.push_back(fmt::format("{} enrichment terms have no vector",
                                     index.missing_terms().size()));
    }
    for (ClassId c : index.unusable_classes()) {
      warnings.push_back(fmt::format("class \"{}\" has no term with a vector", t.name(c)));
    }
    AnnotationOptions opts;
    opts.search.beam_base = cfg.beam_base;
    opts.search.per_parent = cfg.per_parent_beam;
    opts.prompt.terms_per_class = cfg.terms_per_class;
    opts.prompt.document_word_budget = cfg.document_word_budget;
    AnnotationResult r = annotate_corpus(docs(), t, index, vectors(), *gateway, domain(), opts);
    if (r.assignments.empty()) {
      if (r.backend_failures > 0) {
        throw BackendError("every annotation request failed: " + r.failures.front(), 0);
      }
      throw Error("no document received an initial core class set");
    }
    std::vector<Json> rows;
    for (const auto& a : r.assignments) rows.push_back(to_json(a));
    write_file_atomic(out(kInitialCores), jsonl(rows));
    if (r.fallbacks) warnings.push_back(fmt::format("{} documents used the fallback class", r.fallbacks));
    if (r.truncated_prompts) {
      warnings.push_back(fmt::format("{} documents were truncated in prompts", r.truncated_prompts));
    }
    warnings.insert(warnings.end(), r.failures.begin(), r.failures.end());
    return warnings;
  }

  std::vector<std::string> enrich_corpus() {
    const Taxonomy& t = tax();
    const Corpus& c = docs();
    StopwordList stop =
        cfg.stopwords.empty() ? StopwordList::english() : StopwordList::parse(read_file(cfg.stopwords));
    std::vector<std::string> surfaces;
    for (const auto& ct : extract_candidate_terms(c, cfg.ngram_max, cfg.min_term_freq, stop)) {
      surfaces.push_back(ct.surface);
    }
    EnrichmentOptions opts;
    opts.k = cfg.k;
    opts.bm25 = cfg.bm25;
    opts.sibling_exclude_self = cfg.sibling_exclude_self;
    EnrichmentContext ctx(c, t, collect_class_documents(initial_cores(), c, t), surfaces,
                          vectors(), opts);
    auto enriched = enrich_all(ctx, t, llm_terms(), cfg.workers);
    Json arr = Json::array();
    for (const auto& e : enriched) arr.push_back(to_json(e));
    write_file_atomic(out(kEnrichedTerms), arr.dump(1) + "\n");

    std::vector<std::string> warnings;
    if (!ctx.missing_term_vectors().empty()) {
      warnings.push_back(fmt::format("{} of {} candidate terms have no vector and were skipped",
                                     ctx.missing_term_vectors().size(), surfaces.size()));
    }
    for (ClassId cl : ctx.classes_without_name_vector()) {
      warnings.push_back(fmt::format("class \"{}\" has no name vector", t.name(cl)));
    }
    return warnings;
  }

  std::vector<std::string> refine() {
    const Taxonomy& t = tax();
    const Corpus& c = docs();
    auto initial = initial_cores();
    RepresentationSet reps = build_class_representations(collect_class_documents(initial, c, t),
                                                         enriched_terms(), c, vectors(), t);
    RefinementOptions opts;
    opts.confidence_fraction = cfg.confidence_fraction;
    opts.candidates_only = cfg.candidates_only_refinement;
    RefinementResult r = refine_corpus(c, initial, reps, vectors(), t, opts, cfg.workers);
    if (r.refined.empty()) throw Error("no document could be refined");
    std::unordered_set<std::string> selected;
    for (const auto& a : r.selected) selected.insert(a.doc_id);
    std::vector<Json> rows;
    for (const auto& a : r.refined) {
      Json row = to_json(a);
      row["selected"] = selected.count(a.doc_id) > 0;
      rows.push_back(std::move(row));
    }
    write_file_atomic(out(kRefinedCores), jsonl(rows));
    std::vector<std::string> warnings = r.warnings;
    for (ClassId cl : reps.excluded) {
      warnings.push_back(fmt::format("class \"{}\" has no representation", t.name(cl)));
    }
    return warnings;
  }

  std::vector<std::string> generate() {
    ensure_backend();
    GenerationResult r = build_generated_set(tax(), cfg.q, *gateway, domain());
    if (r.docs.empty() && r.backend_failures > 0) {
      throw BackendError("every generation request failed: " + r.failures.front(), 0);
    }
    std::vector<Json> rows;
    for (const auto& d : r.docs) rows.push_back(to_json(d));
    write_file_atomic(out(kGenerated), jsonl(rows));
    std::vector<std::string> warnings = r.failures;
    if (r.padded) warnings.push_back(fmt::format("{} generated documents are padding", r.padded));
    return warnings;
  }

  std::vector<std::string> train_stage() {
    const Taxonomy& t = tax();
    const VectorStore& vs = vectors();
    MatchingModel init = MatchingModel::initialize(
        t, vs, cfg.dim_h > 0 ? cfg.dim_h : static_cast<int>(vs.dim()), cfg.score_form);

    std::vector<TrainingExample> core, gen;
    for (const auto& row : read_jsonl_file(out(kRefinedCores))) {
      if (!row.value("selected", false)) continue;
      RefinedAssignment a = refined_from_json(row);
      const Vector* v = vs.find(VectorSpace::kDoc, a.doc_id);
      if (!v) throw LookupError("no vector for training document \"" + a.doc_id + "\"");
      TargetSets ts = build_targets_core(a.core, t);
      check_partition(ts, t);
      core.push_back(make_example(init, a.doc_id, *v, ts, false));
    }
    for (const auto& row : read_jsonl_file(out(kGenerated))) {
      GeneratedDocument d = generated_from_json(row, t);
      const Vector* v = vs.find(VectorSpace::kDoc, d.doc_id);
      if (!v) {
        throw PrerequisiteError(fmt::format(
            "no vector for generated document \"{}\"; export vectors for {} and set "
            "generated_vectors",
            d.doc_id, kGenerated));
      }
      TargetSets ts = build_targets_gen(d.path, t);
      check_partition(ts, t);
      gen.push_back(make_example(init, d.doc_id, *v, ts, true));
    }
    TrainResult r = train(std::move(init), core, gen, cfg.train);
    write_file_atomic(out(kModel), model_to_json(r.model, cfg.train, r.loss_history).dump() + "\n");
    std::vector<std::string> warnings;
    if (gen.empty()) warnings.push_back("no generated documents; trained on the corpus only");
    return warnings;
  }

  std::vector<std::string> predict_stage() {
    MatchingModel m = model_from_json(read_json_file(out(kModel)));
    const VectorStore& vs = vectors();
    std::vector<Json> rows;
    for (const auto& d : test_docs().docs()) {
      const Vector* v = vs.find(VectorSpace::kDoc, d.doc_id);
      if (!v) throw LookupError("no vector for test document \"" + d.doc_id + "\"");
      rows.push_back(to_json(d.doc_id, predict(m, *v, cfg.threshold)));
    }
    write_file_atomic(out(kPredictions), jsonl(rows));
    return {};
  }

  Json evaluate_stage() {
    if (cfg.gold.empty()) throw ValidationError("evaluate needs the gold config key");
    const Taxonomy& t = tax();
    LabelSets gold = load_gold(read_file(cfg.gold), t);
    LabelSets predicted;
    Rankings rankings;
    for (const auto& row : read_jsonl_file(out(kPredictions))) {
      const std::string id = row.at("doc_id").get<std::string>();
      ClassList pred, rank;
      for (const auto& v : row.at("predicted")) pred.push_back(class_id(v.get<std::size_t>()));
      for (const auto& pair : row.at("ranked")) rank.push_back(class_id(pair.at(0).get<std::size_t>()));
      predicted[id] = std::move(pred);
      rankings[id] = std::move(rank);
    }
    Json report = to_json(evaluate(gold, predicted, rankings));
    write_file_atomic(out(kReport), report.dump(2) + "\n");
    return report;
  }

  // --- bookkeeping ---

  std::map<std::string, std::string> input_digests(Stage s, const StageSpec& spec) {
    std::map<std::string, std::string> digests;
    for (const auto& key : spec.inputs) {
      fs::path p = config.path(key);
      if (key == "test_corpus" && p.empty()) p = cfg.corpus;
      if (key == "gold" && p.empty()) continue;
      if (p.empty()) continue;
      if (!fs::exists(p)) {
        throw ValidationError(fmt::format("{}: input {} = {} does not exist", to_string(s), key,
                                          p.string()));
      }
      digests[key] = sha256_file(p);
    }
    for (const auto& up : spec.upstream) {
      const fs::path p = out(up.file);
      if (!fs::exists(p)) {
        throw PrerequisiteError(fmt::format("{} needs {} from {}; run {} first", to_string(s),
                                            up.file, to_string(up.producer),
                                            to_string(up.producer)));
      }
      const std::string digest = sha256_file(p);
      if (!options_force) {
        const Json& stages = manifest["stages"];
        const std::string producer(to_string(up.producer));
        if (!stages.contains(producer) || !stages[producer]["outputs"].contains(up.file)) {
          throw PrerequisiteError(fmt::format(
              "{} is not recorded in the manifest; rerun {} or pass --force", up.file, producer));
        }
        if (stages[producer]["outputs"][up.file].get<std::string>() != digest) {
          throw PrerequisiteError(fmt::format(
              "{} changed after {} recorded it; rerun {} or pass --force", up.file, producer,
              producer));
        }
      }
      digests[up.file] = digest;
    }
    return digests;
  }

  bool up_to_date(Stage s, const StageSpec& spec, const std::string& config_hash,
                  const std::map<std::string, std::string>& inputs) const {
    const Json& stages = manifest["stages"];
    const std::string name(to_string(s));
    if (!stages.contains(name)) return false;
    const Json& entry = stages[name];
    if (entry.value("config_hash", "") != config_hash) return false;
    if (entry.value("inputs", Json::object()) != Json(inputs)) return false;
    for (const auto& o : spec.outputs) {
      const fs::path p = out(o);
      if (!fs::exists(p) || !entry["outputs"].contains(o)) return false;
      if (entry["outputs"][o].get<std::string>() != sha256_file(p)) return false;
    }
    return true;
  }

  void save_timing(Stage s, double seconds, bool skipped) {
    const fs::path p = out(kTimings);
    Json timings = fs::exists(p) ? read_json_file(p) : Json::object();
    timings[std::string(to_string(s))] = {{"seconds", seconds}, {"skipped", skipped}};
    write_file_atomic(p, timings.dump(2) + "\n");
  }

  void save_manifest() { write_file_atomic(out(kManifest), manifest.dump(2) + "\n"); }

  bool options_force = false;
};

Pipeline::Pipeline(Config config, PipelineOptions options,
                   std::unique_ptr<CompletionBackend> backend)
    : config_(std::move(config)), cfg_(PipelineConfig::from(config_)), options_(options) {
  fs::create_directories(cfg_.workdir);
  impl_ = std::make_unique<Impl>(cfg_, config_, std::move(backend));
  impl_->options_force = options_.force;
}

Pipeline::~Pipeline() = default;

Json Pipeline::manifest() const { return impl_->manifest; }

StageOutcome Pipeline::run_stage(Stage s) {
  current_ = s;
  const StageSpec spec = spec_of(s);
  const std::string name(to_string(s));
  std::vector<std::string> keys = spec.config_keys;
  const std::string config_hash = config_.hash_of(keys);
  const auto inputs = impl_->input_digests(s, spec);

  StageOutcome outcome;
  outcome.stage = s;
  const auto start = std::chrono::steady_clock::now();
  if (!options_.force && impl_->up_to_date(s, spec, config_hash, inputs)) {
    outcome.skipped = true;
    impl_->manifest["stages"][name]["status"] = "skipped";
    impl_->save_manifest();
    impl_->save_timing(s, 0.0, true);
    spdlog::info("{}: up to date, skipped", name);
    return outcome;
  }

  spdlog::info("{}: running", name);
  switch (s) {
    case Stage::kEnrichLlm: outcome.warnings = impl_->enrich_llm(); break;
    case Stage::kAnnotate: outcome.warnings = impl_->annotate(); break;
    case Stage::kEnrichCorpus: outcome.warnings = impl_->enrich_corpus(); break;
    case Stage::kRefine: outcome.warnings = impl_->refine(); break;
    case Stage::kGenerate: outcome.warnings = impl_->generate(); break;
    case Stage::kTrain: outcome.warnings = impl_->train_stage(); break;
    case Stage::kPredict: outcome.warnings = impl_->predict_stage(); break;
    case Stage::kEvaluate: impl_->evaluate_stage(); break;
  }
  outcome.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& w : outcome.warnings) spdlog::warn("{}: {}", name, w);

  Json outputs = Json::object();
  for (const auto& o : spec.outputs) outputs[o] = sha256_file(impl_->out(o));
  impl_->manifest["stages"][name] = {{"status", "complete"},
                                     {"config_hash", config_hash},
                                     {"inputs", inputs},
                                     {"outputs", outputs},
                                     {"warnings", capped(outcome.warnings)}};
  impl_->save_manifest();
  impl_->save_timing(s, outcome.seconds, false);
  spdlog::info("{}: done in {:.2f}s", name, outcome.seconds);
  return outcome;
}

Json Pipeline::run_all() {
  // Backend configuration problems surface before any stage runs.
  impl_->ensure_backend();
  for (Stage s : kAllStages) {
    if (s == Stage::kEvaluate && cfg_.gold.empty()) {
      spdlog::info("evaluate: no gold file configured, not run");
      break;
    }
    run_stage(s);
  }
  current_.reset();
  if (cfg_.gold.empty()) return nullptr;
  return read_json_file(impl_->out(kReport));
}

fs::path Pipeline::write_vector_keys() {
  const Taxonomy& t = impl_->tax();
  std::set<std::string> keys;
  auto add = [&](VectorSpace sp, const std::string& k) {
    keys.insert(std::string(prefix_of(sp)) + k);
  };
  for (ClassId c : t.classes()) {
    add(VectorSpace::kName, t.name(c));
    add(VectorSpace::kTerm, to_lower_ascii(t.name(c)));
  }
  for (const auto& d : impl_->docs().docs()) add(VectorSpace::kDoc, d.doc_id);
  for (const auto& d : impl_->test_docs().docs()) add(VectorSpace::kDoc, d.doc_id);
  StopwordList stop = cfg_.stopwords.empty() ? StopwordList::english()
                                             : StopwordList::parse(read_file(cfg_.stopwords));
  for (const auto& ct :
       extract_candidate_terms(impl_->docs(), cfg_.ngram_max, cfg_.min_term_freq, stop)) {
    add(VectorSpace::kTerm, ct.surface);
  }
  if (fs::exists(impl_->out(kLlmTerms))) {
    for (const auto& set : impl_->llm_terms()) {
      for (const auto& term : set.terms) add(VectorSpace::kTerm, term);
    }
  }
  if (fs::exists(impl_->out(kGenerated))) {
    for (const auto& row : read_jsonl_file(impl_->out(kGenerated))) {
      add(VectorSpace::kDoc, row.at("doc_id").get<std::string>());
    }
  }
  std::string text;
  for (const auto& k : keys) text += k + "\n";
  const fs::path p = impl_->out(kVectorKeys);
  write_file_atomic(p, text);
  return p;
}

}  // namespace teleclass
