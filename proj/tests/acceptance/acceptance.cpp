// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
//
// One line per acceptance criterion; exit status 1 if any line fails.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "teleclass/annotation.hpp"
#include "teleclass/classifier.hpp"
#include "teleclass/enrichment.hpp"
#include "teleclass/evaluation.hpp"
#include "teleclass/pipeline.hpp"
#include "teleclass/refinement.hpp"

namespace fs = std::filesystem;
using namespace teleclass;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// --- 1: metrics ----------------------------------------------------------------

Outcome metric_oracles() {
  // Six flat classes; hand-computed per-document values in the comments.
  Taxonomy t = Taxonomy::parse(
      R"({"nodes":[{"id":0,"name":"a"},{"id":1,"name":"b"},{"id":2,"name":"c"},)"
      R"({"id":3,"name":"d"},{"id":4,"name":"e"},{"id":5,"name":"f"}]})");
  auto L = [](std::initializer_list<int> ids) {
    ClassList out;
    for (int i : ids) out.push_back(class_id(i));
    return out;
  };
  LabelSets gold = {{"1", L({0, 1})}, {"2", L({2})}, {"3", L({0, 4, 5})}, {"4", L({1})},
                    {"5", L({3, 5})}};
  LabelSets pred = {{"1", L({0, 1})}, {"2", L({2, 3})}, {"3", L({4})}, {"4", L({})},
                    {"5", L({0, 3, 5})}};
  Rankings rank = {{"1", L({0, 1, 2, 3, 4, 5})},
                   {"2", L({3, 2, 0, 1, 4, 5})},
                   {"3", L({4, 0, 1, 5, 2, 3})},
                   {"4", L({0, 2, 3, 4, 5, 1})},
                   {"5", L({5, 3, 0, 1, 2, 4})}};
  (void)t;
  // F1 per doc: 1, 2/3, 1/2, 0, 4/5             -> 89/150
  // P@1:        1, 0, 1, 0, 1                   -> 3/5
  // P@3:        1, 1, 2/3, 0, 1                 -> 11/15
  // MRR:        3/4, 1/2, 7/12, 1/6, 3/4        -> 11/20
  const double want[] = {89.0 / 150.0, 3.0 / 5.0, 11.0 / 15.0, 11.0 / 20.0};
  const double got[] = {example_f1(gold, pred), precision_at_k(gold, rank, 1),
                        precision_at_k(gold, rank, 3), mrr(gold, rank)};
  const char* names[] = {"example_f1", "p@1", "p@3", "mrr"};
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    const double d = std::abs(want[i] - got[i]);
    worst = std::max(worst, d);
    if (d > 1e-12) {
      return fail(fmt::format("{} = {:.17g}, expected {:.17g}", names[i], got[i], want[i]));
    }
  }
  return {true, fmt::format("4 metrics on 5 documents, max |diff| {:.1e}", worst)};
}

// --- 2: candidate search -------------------------------------------------------

Outcome candidate_search_oracle() {
  std::mt19937_64 rng(2);
  std::size_t compared = 0;
  for (int draw = 0; draw < 100; ++draw) {
    oracle::RawDag g = oracle::random_dag(rng, 50, 3);
    Taxonomy t = Taxonomy::from_json(g.json());
    // Coarse values half of the time so ties have to be broken by name.
    const bool coarse = draw % 2 == 0;
    std::vector<double> sim(g.size());
    for (auto& s : sim) {
      s = coarse ? static_cast<double>(rng() % 5) / 4.0
                 : std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    auto expected = oracle::candidate_oracle(g, sim, 3);
    CandidateSet got = candidate_search(t, [&](ClassId c) { return sim[index_of(c)]; });
    std::set<int> got_ids;
    for (ClassId c : got.classes) got_ids.insert(static_cast<int>(index_of(c)));
    if (got_ids != expected) {
      return fail(fmt::format("draw {}: {} candidates, oracle has {}", draw, got_ids.size(),
                              expected.size()));
    }
    int best = *expected.begin();
    for (int v : expected) {
      if (sim[v] > sim[best] || (sim[v] == sim[best] && g.names[v] < g.names[best])) best = v;
    }
    if (static_cast<int>(index_of(got.best)) != best) {
      return fail(fmt::format("draw {}: best candidate differs", draw));
    }
    compared += expected.size();
  }
  return {true, fmt::format("100 random DAGs, {} candidate classes matched", compared)};
}

// --- 3: enrichment -------------------------------------------------------------

Outcome enrichment_oracle() {
  // sports -> {soccer, tennis}; arts on its own.
  oracle::RawDag g{{"sports", "arts", "soccer", "tennis"}, {{0, 2}, {0, 3}}};
  Taxonomy t = Taxonomy::from_json(g.json());
  const std::vector<std::pair<std::string, std::vector<int>>> docs = {
      {"soccer ball goal match striker goal", {2}},
      {"tennis racket serve match court", {3}},
      {"soccer goal keeper penalty kick", {2}},
      {"tennis court serve ace racket serve", {3}},
      {"painting canvas gallery brush", {1}},
      {"sculpture gallery museum clay", {1}},
      {"match day stadium goal crowd", {0}},
      {"training match fitness coach match", {0}},
      {"soccer tennis match court goal", {2, 3}},
      {"museum painting ticket gallery match", {1}},
  };
  std::vector<Document> ds;
  std::vector<InitialCoreAssignment> cores;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ds.push_back({fmt::format("d{}", i), docs[i].first, {}});
    InitialCoreAssignment a;
    a.doc_id = ds.back().doc_id;
    for (int c : docs[i].second) a.core.push_back(class_id(c));
    cores.push_back(a);
  }
  Corpus corpus = Corpus::from_documents(ds);

  std::vector<std::string> terms;
  for (const auto& ct : extract_candidate_terms(corpus, 2, 1, StopwordList::english())) {
    terms.push_back(ct.surface);
  }
  std::sort(terms.begin(), terms.end());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  VectorStore store;
  std::map<std::string, std::vector<double>> tvec, nvec;
  auto draw = [&] {
    Vector v(6);
    for (auto& x : v) x = static_cast<float>(nd(rng));
    return v;
  };
  for (const auto& term : terms) {
    if (term == "ticket") continue;  // one candidate without a vector
    Vector v = draw();
    tvec[term] = std::vector<double>(v.begin(), v.end());
    store.insert(VectorSpace::kTerm, term, v);
  }
  for (ClassId c : t.classes()) {
    Vector v = draw();
    nvec[t.name(c)] = std::vector<double>(v.begin(), v.end());
    store.insert(VectorSpace::kName, t.name(c), v);
  }

  EnrichmentOptions opts;
  opts.k = 4;
  EnrichmentContext ctx(corpus, t, collect_class_documents(cores, corpus, t), terms, store, opts);

  // D0 from raw edges: a document belongs to s when a core class is s or
  // lies below s.
  auto d0 = [&](int s) {
    std::vector<int> out;
    auto below = g.descendants(s);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (int c : docs[i].second) {
        if (c == s || below.count(c)) {
          out.push_back(static_cast<int>(i));
          break;
        }
      }
    }
    return out;
  };
  std::vector<std::vector<std::string>> toks;
  for (const auto& d : docs) {
    std::vector<std::string> w;
    std::string cur;
    for (char ch : d.first + " ") {
      if (ch == ' ') {
        if (!cur.empty()) w.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    toks.push_back(w);
  }

  double worst = 0;
  std::size_t scored = 0;
  for (int c = 0; c < g.size(); ++c) {
    std::vector<int> parents = g.parents_of(c);
    if (parents.empty()) parents.push_back(-1);
    for (int p : parents) {
      std::vector<int> sibs;
      for (int v = 0; v < g.size(); ++v) {
        auto ps = g.parents_of(v);
        if (p == -1 ? ps.empty() : std::count(ps.begin(), ps.end(), p) > 0) sibs.push_back(v);
      }
      struct Row {
        std::string term;
        double aff;
      };
      std::vector<Row> want;
      for (const auto& [term, tv] : tvec) {
        std::vector<std::string> needle;
        std::string cur;
        for (char ch : term + " ") {
          if (ch == ' ') {
            if (!cur.empty()) needle.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(ch);
          }
        }
        int df = 0;
        for (int d : d0(c)) df += oracle::count_tokens(toks[d], needle) > 0;
        const double pop = std::log(1.0 + df);
        std::vector<double> tf, len;
        std::size_t self = 0;
        for (int s : sibs) {
          if (s == c) self = tf.size();
          double f = 0, l = 0;
          for (int d : d0(s)) {
            f += oracle::count_tokens(toks[d], needle);
            l += static_cast<double>(toks[d].size());
          }
          tf.push_back(f);
          len.push_back(l);
        }
        double denom = 1.0;
        for (std::size_t i = 0; i < sibs.size(); ++i) denom += std::exp(oracle::bm25(i, tf, len, 1.2, 0.75));
        const double dist = std::exp(oracle::bm25(self, tf, len, 1.2, 0.75)) / denom;
        const double sem = std::max(0.0, oracle::cosine(nvec[g.names[c]], tv));
        const double prod = pop * dist * sem;
        if (prod > 0) want.push_back({term, std::cbrt(prod)});
      }
      std::sort(want.begin(), want.end(), [](const Row& a, const Row& b) {
        if (a.aff != b.aff) return a.aff > b.aff;
        return a.term < b.term;
      });
      const ClassId parent = p == -1 ? t.root() : class_id(p);
      auto got = ctx.rank_terms(class_id(c), parent);
      if (got.size() != want.size()) {
        return fail(fmt::format("{} under {}: {} ranked terms, oracle {}", g.names[c],
                                p == -1 ? "root" : g.names[p], got.size(), want.size()));
      }
      for (std::size_t i = 0; i < want.size(); ++i) {
        if (got[i].term != want[i].term) {
          return fail(fmt::format("{}: rank {} is \"{}\", oracle \"{}\"", g.names[c], i,
                                  got[i].term, want[i].term));
        }
        const double d = std::abs(got[i].affinity - want[i].aff);
        worst = std::max(worst, d);
        if (d >= 1e-6) {
          return fail(fmt::format("{} / {}: affinity {} vs oracle {}", g.names[c],
                                  want[i].term, got[i].affinity, want[i].aff));
        }
        ++scored;
      }
      // The stored top-k is the head of the same ranking.
      LlmTermSet none{class_id(c), {}};
      auto enriched = ctx.enrich_class(class_id(c), none);
      const auto& top = enriched.corpus_terms_by_parent.at(parent);
      for (std::size_t i = 0; i < top.size(); ++i) {
        if (top[i].term != want[i].term) return fail("top-k differs from the oracle head");
      }
      if (top.size() != std::min<std::size_t>(4, want.size())) return fail("top-k size");
    }
  }
  return {true, fmt::format("{} (class, parent, term) scores, max |diff| {:.1e}", scored, worst)};
}

// --- 4: refinement -------------------------------------------------------------

Outcome refinement_oracle() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  oracle::RawDag g;
  for (int i = 0; i < 20; ++i) g.names.push_back(fmt::format("c{:02d}", i));
  Taxonomy t = Taxonomy::from_json(g.json());

  for (int seed = 0; seed < 1000; ++seed) {
    // Ranked cosines against random class representations.
    RepresentationSet reps;
    std::vector<std::vector<double>> raw;
    for (int c = 0; c < 20; ++c) {
      ClassRepresentation r;
      r.class_id = class_id(c);
      r.support_count = 1;
      for (int k = 0; k < 8; ++k) r.vector.push_back(nd(rng));
      raw.push_back(r.vector);
      reps.classes.push_back(r);
    }
    Vector doc(8);
    std::vector<double> docd(8);
    for (int k = 0; k < 8; ++k) docd[k] = doc[k] = static_cast<float>(nd(rng));
    std::vector<std::pair<double, int>> scored;
    for (int c = 0; c < 20; ++c) scored.push_back({oracle::cosine(docd, raw[c]), c});
    std::sort(scored.begin(), scored.end(), [&](auto a, auto b) {
      if (a.first != b.first) return a.first > b.first;
      return g.names[a.second] < g.names[b.second];
    });
    std::vector<double> s;
    for (auto& p : scored) s.push_back(p.first);
    oracle::GapScan want = oracle::gap_scan(s);
    RefinedAssignment got = refine_document("d", doc, reps, t);
    std::set<int> want_core, got_core;
    for (std::size_t i = 0; i < want.m; ++i) want_core.insert(scored[i].second);
    for (ClassId c : got.core) got_core.insert(static_cast<int>(index_of(c)));
    if (got.cut_position != want.m || std::abs(got.confidence - want.conf) > 1e-12 ||
        got_core != want_core) {
      return fail(fmt::format("seed {}: m={} conf={} vs oracle m={} conf={}", seed,
                              got.cut_position, got.confidence, want.m, want.conf));
    }
    // Score lists with ties: cut directly.
    std::vector<double> coarse(20);
    for (auto& x : coarse) x = static_cast<double>(rng() % 8) / 8.0;
    std::sort(coarse.rbegin(), coarse.rend());
    if (coarse.front() == coarse.back()) continue;
    oracle::GapScan w2 = oracle::gap_scan(coarse);
    GapCut g2 = largest_gap_cut(coarse);
    if (g2.cut != w2.m || g2.confidence != w2.conf) {
      return fail(fmt::format("seed {}: tied scores cut at {}, oracle {}", seed, g2.cut, w2.m));
    }
  }

  for (std::size_t n = 1; n <= 40; ++n) {
    std::vector<RefinedAssignment> as(n);
    std::vector<std::pair<double, std::string>> by_conf;
    for (std::size_t i = 0; i < n; ++i) {
      as[i].doc_id = fmt::format("d{:02d}", i);
      as[i].confidence = static_cast<double>(rng() % 5) / 5.0 + 0.1;
      by_conf.push_back({-as[i].confidence, as[i].doc_id});
    }
    std::sort(by_conf.begin(), by_conf.end());
    const std::size_t keep = (3 * n + 3) / 4;  // ceil(0.75 n) in integers
    auto kept = select_confident(as, 0.75);
    if (kept.size() != keep) {
      return fail(fmt::format("N={}: kept {}, expected {}", n, kept.size(), keep));
    }
    for (std::size_t i = 0; i < keep; ++i) {
      if (kept[i].doc_id != by_conf[i].second) return fail(fmt::format("N={}: kept set differs", n));
    }
  }
  return {true, "1000 ranked cosine lists + 1000 tied lists; retention exact for N=1..40"};
}

// --- 5: gradients --------------------------------------------------------------

Outcome gradient_check() {
  oracle::RawDag g{{"a", "b", "c"}, {{0, 1}}};
  Taxonomy t = Taxonomy::from_json(g.json());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 0.5);
  double worst = 0;
  std::string where;
  for (ScoreForm form : {ScoreForm::kSigmoidLinear, ScoreForm::kSigmoidExp}) {
    MatchingModel m;
    m.dim_in = 5;
    m.dim_h = 4;
    m.score_form = form;
    m.classes = t.classes();
    auto randm = [&](int r, int c) {
      Eigen::MatrixXd x(r, c);
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) x(i, j) = nd(rng);
      }
      return x;
    };
    m.W = randm(4, 4);
    m.class_table = randm(3, 4);
    m.adapter = randm(4, 5);
    std::vector<TrainingExample> ex;
    auto vec = [&] {
      Vector v(5);
      for (auto& x : v) x = static_cast<float>(nd(rng));
      return v;
    };
    ex.push_back(make_example(m, "core0", vec(), build_targets_core({class_id(0)}, t), false));
    ex.push_back(make_example(m, "core1", vec(), build_targets_core({class_id(2)}, t), false));
    ex.push_back(make_example(m, "gen0", vec(), build_targets_gen(t.label_paths()[0], t), true));
    ex.push_back(make_example(m, "gen1", vec(), build_targets_gen(t.label_paths()[1], t), true));
    std::vector<const TrainingExample*> core{&ex[0], &ex[1]}, gen{&ex[2], &ex[3]};
    const double w = 0.7;
    LossResult analytic = loss(m, core, gen, w);

    const double h = 1e-5;
    auto check = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, const char* name) {
      Eigen::MatrixXd numeric(param.rows(), param.cols());
      for (Eigen::Index i = 0; i < param.rows(); ++i) {
        for (Eigen::Index j = 0; j < param.cols(); ++j) {
          const double keep = param(i, j);
          param(i, j) = keep + h;
          const double up = loss(m, core, gen, w).value;
          param(i, j) = keep - h;
          const double down = loss(m, core, gen, w).value;
          param(i, j) = keep;
          numeric(i, j) = (up - down) / (2 * h);
        }
      }
      const double rel = (grad - numeric).norm() / std::max(grad.norm(), numeric.norm());
      if (rel > worst) {
        worst = rel;
        where = fmt::format("{} ({})", name, to_string(form));
      }
    };
    check(m.W, analytic.grad.W, "W");
    check(m.class_table, analytic.grad.class_table, "class_table");
    check(m.adapter, analytic.grad.adapter, "adapter");
  }
  if (worst >= 1e-4) return fail(fmt::format("relative error {:.2e} on {}", worst, where));
  return {true, fmt::format("3 blocks x 2 score forms, worst relative error {:.1e} ({})", worst,
                            where)};
}

// --- 6, 7: end to end --------------------------------------------------------

fs::path scratch(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / fmt::format("teleclass-acceptance-{}-{}", ::getpid(), tag);
  fs::remove_all(p);
  return p;
}

Json run_fixture(const fs::path& workdir) {
  Config c = Config::load(fs::path(TELECLASS_FIXTURE_DIR) / "pipeline.conf");
  c.set("workdir", workdir.string());
  c.set("workers", "1");
  c.set("llm_concurrency", "1");
  Pipeline p(std::move(c));
  return p.run_all();
}

Outcome end_to_end() {
  const fs::path w = scratch("e2e");
  Json report = run_fixture(w);
  fs::remove_all(w);
  const double f1 = report.at("example_f1").get<double>();
  const double p1 = report.at("p_at_1").get<double>();
  std::string detail = fmt::format("test example_f1 {:.4f} (>= 0.90), p@1 {:.4f} (>= 0.95), "
                                   "{} documents",
                                   f1, p1, report.at("n_docs").get<int>());
  return {f1 >= 0.90 && p1 >= 0.95, detail};
}

Outcome determinism() {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  run_fixture(a);
  run_fixture(b);
  std::vector<std::string> differ;
  const char* files[] = {"manifest.json", "model.json", "report.json", "predictions.jsonl"};
  for (const char* f : files) {
    if (read_file(a / f) != read_file(b / f)) differ.push_back(f);
  }
  fs::remove_all(a);
  fs::remove_all(b);
  if (!differ.empty()) return fail("differs: " + differ.front());
  return {true, "manifest, model, report and predictions byte-identical across two runs"};
}

// --- 8: properties -----------------------------------------------------------

Outcome properties() {
  std::mt19937_64 rng(8);
  for (int draw = 0; draw < 1000; ++draw) {
    oracle::RawDag g = oracle::random_dag(rng, 50, 3);
    Taxonomy t = Taxonomy::from_json(g.json());
    auto ids = [](const ClassList& l) {
      std::set<int> s;
      for (ClassId c : l) s.insert(static_cast<int>(index_of(c)));
      return s;
    };
    if (static_cast<int>(t.classes().size()) != g.size()) return fail("class count");
    for (int v = 0; v < g.size(); ++v) {
      if (ids(t.ancestors(class_id(v))) != g.ancestors(v)) {
        return fail(fmt::format("draw {}: ancestors of {}", draw, v));
      }
      if (ids(t.descendants(class_id(v))) != g.descendants(v)) {
        return fail(fmt::format("draw {}: descendants of {}", draw, v));
      }
    }
    // Paths: same multiset as the raw walk, each a parent-child chain from
    // a top-level class to a leaf, and together they cover every class.
    std::set<std::vector<int>> want_paths, got_paths;
    for (auto& p : g.paths()) want_paths.insert(p);
    std::set<int> covered;
    for (const auto& p : t.label_paths()) {
      std::vector<int> v;
      for (ClassId c : p.nodes) {
        v.push_back(static_cast<int>(index_of(c)));
        covered.insert(v.back());
      }
      got_paths.insert(v);
    }
    if (want_paths != got_paths || t.label_paths().size() != g.paths().size()) {
      return fail(fmt::format("draw {}: label paths differ", draw));
    }
    if (static_cast<int>(covered.size()) != g.size()) return fail("a class lies on no path");

    // Targets for a random core set.
    const int k = 1 + static_cast<int>(rng() % 3);
    ClassList core;
    std::set<int> core_ids;
    for (int i = 0; i < k; ++i) {
      int c = static_cast<int>(rng() % g.size());
      if (core_ids.insert(c).second) core.push_back(class_id(c));
    }
    TargetSets ts = build_targets_core(core, t);
    check_partition(ts, t);
    std::set<int> pos = core_ids, unl;
    for (int c : core_ids) {
      auto a = g.ancestors(c);
      pos.insert(a.begin(), a.end());
    }
    for (int c : core_ids) {
      for (int d : g.descendants(c)) {
        if (!pos.count(d)) unl.insert(d);
      }
    }
    std::set<int> neg;
    for (int v = 0; v < g.size(); ++v) {
      if (!pos.count(v) && !unl.count(v)) neg.insert(v);
    }
    if (ids(ts.positives) != pos || ids(ts.unlabeled) != unl || ids(ts.negatives) != neg) {
      return fail(fmt::format("draw {}: core target sets differ from set algebra", draw));
    }
    const auto& path = t.label_paths()[rng() % t.label_paths().size()];
    TargetSets gs = build_targets_gen(path, t);
    check_partition(gs, t);
    if (!gs.unlabeled.empty() || gs.positives.size() != std::set<ClassId>(path.nodes.begin(), path.nodes.end()).size()) {
      return fail(fmt::format("draw {}: path target sets", draw));
    }
  }
  return {true, "1000 random DAGs: closures, paths, and target partitions agree with oracles"};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracles", 1, metric_oracles},
      {2, "candidate search vs frontier oracle", 10, candidate_search_oracle},
      {3, "enrichment affinity vs full recompute", 5, enrichment_oracle},
      {4, "refinement gap cut and retention", 5, refinement_oracle},
      {5, "classifier gradients vs finite differences", 5, gradient_check},
      {6, "end-to-end synthetic run", 120, end_to_end},
      {7, "determinism of run-all", 240, determinism},
      {8, "target partition and taxonomy properties", 60, properties},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.limit_s) {
      o.pass = false;
      o.detail += fmt::format(" [over time limit {}s]", c.limit_s);
    }
    failures += !o.pass;
    fmt::print("criterion {} {} {} ({:.2f}s): {}\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
               secs, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
