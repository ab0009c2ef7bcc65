// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/llm.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleclass/io.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kEnrich:
      return "enrich";
    case TemplateId::kAnnotate:
      return "annotate";
    case TemplateId::kGenerate:
      return "generate";
  }
  return "";
}

TemplateId template_from_string(std::string_view s) {
  if (s == "enrich") return TemplateId::kEnrich;
  if (s == "annotate") return TemplateId::kAnnotate;
  if (s == "generate") return TemplateId::kGenerate;
  throw ValidationError("unknown template id \"" + std::string(s) + "\"");
}

DomainProfile DomainProfile::amazon() {
  return {"a product class in Amazon", "an Amazon product review", "product types",
          "an Amazon Reviewer", "a product review"};
}

DomainProfile DomainProfile::dbpedia() {
  return {"an article category of Wikipedia articles",
          "a Wikipedia article describing an entity at the beginning", "types",
          "a Wikipedia Contributor", "a Wikipedia page"};
}

DomainProfile DomainProfile::preset(std::string_view name) {
  if (name == "amazon") return amazon();
  if (name == "dbpedia") return dbpedia();
  throw ValidationError("unknown domain preset \"" + std::string(name) + "\"");
}

namespace {

std::string json_names(const Taxonomy& t, const ClassList& ids) {
  Json arr = Json::array();
  for (ClassId c : ids) arr.push_back(t.name(c));
  return arr.dump();
}

std::string json_ids(const ClassList& ids) {
  Json arr = Json::array();
  for (ClassId c : ids) arr.push_back(index_of(c));
  return arr.dump();
}

}  // namespace

std::vector<PromptRequest> build_enrichment_prompts(const Taxonomy& t, ClassId c,
                                                    const DomainProfile& domain,
                                                    const PromptOptions& options) {
  if (t.is_root(c)) throw ValidationError("cannot enrich the root class");
  std::vector<PromptRequest> out;
  const std::string& target = t.name(c);
  for (ClassId parent : t.parents(c)) {
    std::vector<std::string> sibling_names;
    for (ClassId s : t.siblings(c, parent)) {
      if (s != c) sibling_names.push_back(t.name(s));
    }
    std::string siblings = sibling_names.empty() ? "none" : join(sibling_names, ", ");
    // Level-1 classes under a synthetic root have no meaningful parent name.
    std::string parent_clause = (t.is_root(parent) && t.root_is_synthetic())
                                    ? std::string()
                                    : fmt::format(" and is the subclass of {}", t.name(parent));
    PromptRequest req;
    req.template_id = TemplateId::kEnrich;
    req.rendered_text = fmt::format(
        "{0} is {1}{2}. Please generate {3} additional key terms about the {0} that are "
        "relevant to {0} but irrelevant to {4}. Please split the additional key terms using "
        "commas.",
        target, domain.class_blurb, parent_clause, options.terms_per_class, siblings);
    req.metadata = {{"class_id", std::to_string(index_of(c))},
                    {"class", target},
                    {"parent_id", std::to_string(index_of(parent))},
                    {"parent", t.name(parent)}};
    out.push_back(std::move(req));
  }
  return out;
}

PromptRequest build_annotation_prompt(const Document& doc, const ClassList& candidates,
                                      const Taxonomy& t, const DomainProfile& domain,
                                      const PromptOptions& options) {
  if (candidates.empty()) throw ValidationError("annotation prompt needs candidates");
  ClassList ordered = candidates;
  t.sort_by_name(ordered);
  std::vector<std::string> names;
  for (ClassId c : ordered) names.push_back(t.name(c));

  // Truncate at a whitespace boundary after `document_word_budget` words.
  std::string_view text = trim(doc.text);
  bool truncated = false;
  std::size_t words = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_word) {
      if (words == options.document_word_budget) {
        text = trim(text.substr(0, i));
        truncated = true;
        break;
      }
      ++words;
    }
    in_word = !space;
  }

  PromptRequest req;
  req.template_id = TemplateId::kAnnotate;
  req.rendered_text = fmt::format(
      "You will be provided with {}, and please select its {} from the following "
      "categories: {}. Just give the category names as shown in the provided list.\n"
      "Query: {}",
      domain.document_kind, domain.label_noun, join(names, ", "), text);
  req.metadata = {{"doc_id", doc.doc_id},
                  {"candidates", json_ids(ordered)},
                  {"candidate_names", json_names(t, ordered)},
                  {"truncated", truncated ? "true" : "false"}};
  return req;
}

PromptRequest build_generation_prompt(const LabelPath& path, int q, const Taxonomy& t,
                                      const DomainProfile& domain) {
  if (q < 1) throw ValidationError("generation prompt needs q >= 1");
  if (path.nodes.empty()) throw ValidationError("generation prompt needs a non-empty path");
  std::vector<std::string> names;
  for (ClassId c : path.nodes) names.push_back(t.name(c));
  const std::string& leaf = t.name(path.leaf());
  PromptRequest req;
  req.template_id = TemplateId::kGenerate;
  req.rendered_text = fmt::format(
      "Suppose you are {}, please generate {} various and reliable {} following the "
      "requirements below:\n"
      "1. Must generate reviews following the themes of the taxonomy path: {}.\n"
      "2. Must be in length about 100 words.\n"
      "3. The writing style and format of the text should be {}.\n"
      "4. Should keep the generated text to be diverse, specific, and consistent with the "
      "given taxonomy path. You should focus on {}.",
      domain.persona, q, q == 1 ? "passage" : "passages", join(names, " -> "), domain.style,
      leaf);
  req.metadata = {{"path", json_ids(path.nodes)},
                  {"path_names", json_names(t, path.nodes)},
                  {"q", std::to_string(q)}};
  return req;
}

std::string request_hash(std::string_view rendered_text, std::string_view backend_id) {
  std::string data(backend_id);
  data.push_back('\n');
  data.append(rendered_text);
  return sha256_hex(data);
}

// --- mock backend ---------------------------------------------------------

MockBackend::MockBackend(std::unordered_map<std::string, std::string> table,
                         std::optional<MockRules> rules)
    : table_(std::move(table)), rules_(std::move(rules)) {}

std::unordered_map<std::string, std::string> MockBackend::parse_table(std::string_view jsonl) {
  std::unordered_map<std::string, std::string> table;
  for_each_jsonl(jsonl, [&](std::size_t line, const Json& obj) {
    if (!obj.contains("hash") || !obj.contains("response") || !obj["hash"].is_string() ||
        !obj["response"].is_string()) {
      throw ValidationError(fmt::format("mock table line {}: need \"hash\" and \"response\"",
                                        line));
    }
    table[obj["hash"].get<std::string>()] = obj["response"].get<std::string>();
  });
  return table;
}

void MockBackend::fail_next(int count, AttemptFailure::Kind kind) {
  std::lock_guard lock(fail_mutex_);
  fail_count_ = count;
  fail_kind_ = kind;
}

std::string MockBackend::complete(const PromptRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(fail_mutex_);
    if (fail_count_ > 0) {
      --fail_count_;
      throw AttemptFailure(fail_kind_, "scripted mock failure");
    }
  }
  auto it = table_.find(request_hash(request.rendered_text, id()));
  if (it != table_.end()) return it->second;
  if (rules_) return answer_by_rule(request);
  throw AttemptFailure(AttemptFailure::Kind::kFatal,
                       "mock backend has no response for this request");
}

std::string MockBackend::answer_by_rule(const PromptRequest& request) const {
  auto meta = [&](const char* key) -> const std::string& {
    auto it = request.metadata.find(key);
    if (it == request.metadata.end()) {
      throw AttemptFailure(AttemptFailure::Kind::kFatal,
                           fmt::format("mock rule needs metadata \"{}\"", key));
    }
    return it->second;
  };
  switch (request.template_id) {
    case TemplateId::kEnrich: {
      const std::string& name = meta("class");
      auto it = rules_->class_terms.find(name);
      if (it == rules_->class_terms.end() || it->second.empty()) return name;
      return join(it->second, ", ");
    }
    case TemplateId::kAnnotate: {
      auto candidates = Json::parse(meta("candidate_names")).get<std::vector<std::string>>();
      auto it = rules_->doc_labels.find(meta("doc_id"));
      if (it == rules_->doc_labels.end()) return "";
      std::vector<std::string> picked;
      for (const auto& label : it->second) {
        if (std::find(candidates.begin(), candidates.end(), label) != candidates.end()) {
          picked.push_back(label);
        }
      }
      // A planted label outside the candidates is still named, as an LLM would.
      return join(picked.empty() ? it->second : picked, ", ");
    }
    case TemplateId::kGenerate: {
      auto names = Json::parse(meta("path_names")).get<std::vector<std::string>>();
      int q = std::stoi(meta("q"));
      std::string out;
      for (int i = 0; i < q; ++i) {
        std::vector<std::string> words;
        for (const auto& name : names) {
          words.push_back(name);
          auto it = rules_->class_terms.find(name);
          if (it == rules_->class_terms.end()) continue;
          const auto& terms = it->second;
          for (std::size_t k = 0; k < std::min<std::size_t>(3, terms.size()); ++k) {
            words.push_back(terms[(i + k) % terms.size()]);
          }
        }
        out += fmt::format("{}. A passage about {}: {}.\n\n", i + 1, names.back(),
                           join(words, " "));
      }
      return out;
    }
  }
  return "";
}

// --- cache ----------------------------------------------------------------

CompletionCache::CompletionCache(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  for_each_jsonl(read_file(file_), [&](std::size_t, const Json& obj) {
    CompletionRecord r;
    r.request_hash = obj.value("hash", "");
    r.template_id = obj.value("template_id", "");
    r.request = obj.value("request", "");
    r.response = obj.value("response", "");
    r.backend = obj.value("backend", "");
    r.timestamp = obj.value("timestamp", "");
    if (!r.request_hash.empty()) records_[r.request_hash] = std::move(r);
  });
}

std::optional<CompletionRecord> CompletionCache::lookup(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(hash);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void CompletionCache::store(const CompletionRecord& record) {
  std::lock_guard lock(mutex_);
  if (!file_.empty()) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to LLM cache " + file_.string());
    Json line = {{"hash", record.request_hash},   {"template_id", record.template_id},
                 {"request", record.request},     {"response", record.response},
                 {"backend", record.backend},     {"timestamp", record.timestamp}};
    out << line.dump() << '\n';
    out.flush();
  }
  records_[record.request_hash] = record;
}

std::size_t CompletionCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

// --- gateway --------------------------------------------------------------

LlmGateway::LlmGateway(CompletionBackend& backend, CompletionCache& cache,
                       GatewayOptions options)
    : backend_(backend), cache_(cache), options_(options) {
  if (options_.max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (options_.concurrency < 1) throw ValidationError("concurrency must be >= 1");
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string LlmGateway::invoke_with_retries(const PromptRequest& request) {
  const int attempts = options_.max_retries + 1;
  AttemptFailure::Kind last = AttemptFailure::Kind::kTransport;
  std::string last_message;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      ++backend_calls_;
      return backend_.complete(request);
    } catch (const AttemptFailure& f) {
      last = f.kind();
      last_message = f.what();
      if (f.kind() == AttemptFailure::Kind::kFatal) {
        throw TransportError(fmt::format("backend {} failed: {}", backend_.id(), f.what()),
                             attempt);
      }
      spdlog::debug("backend attempt {}/{} failed: {}", attempt, attempts, f.what());
      if (attempt < attempts && options_.base_delay.count() > 0) {
        std::this_thread::sleep_for(options_.base_delay * (1 << (attempt - 1)));
      }
    }
  }
  auto message = fmt::format("backend {} failed after {} attempts: {}", backend_.id(), attempts,
                             last_message);
  if (last == AttemptFailure::Kind::kRateLimit) throw RateLimitError(message, attempts);
  throw TransportError(message, attempts);
}

CompletionRecord LlmGateway::complete(const PromptRequest& request) {
  const std::string hash = request_hash(request.rendered_text, backend_.id());
  if (auto hit = cache_.lookup(hash)) {
    ++cache_hits_;
    hit->from_cache = true;
    return *hit;
  }

  std::promise<std::string> promise;
  std::shared_future<std::string> future;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mutex_);
    auto it = inflight_.find(hash);
    if (it != inflight_.end()) {
      future = it->second;
    } else {
      // Re-check: another thread may have finished between lookup and lock.
      if (auto hit = cache_.lookup(hash)) {
        ++cache_hits_;
        hit->from_cache = true;
        return *hit;
      }
      future = promise.get_future().share();
      inflight_.emplace(hash, future);
      owner = true;
    }
  }

  CompletionRecord record;
  record.request_hash = hash;
  record.template_id = std::string(to_string(request.template_id));
  record.request = request.rendered_text;
  record.backend = backend_.id();

  if (!owner) {
    record.response = future.get();  // rethrows the owner's failure
    record.from_cache = true;
    ++cache_hits_;
    return record;
  }

  try {
    record.response = invoke_with_retries(request);
    record.timestamp = utc_timestamp();
    cache_.store(record);
    promise.set_value(record.response);
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(hash);
    throw;
  }
  std::lock_guard lock(inflight_mutex_);
  inflight_.erase(hash);
  return record;
}

// --- response parsing -----------------------------------------------------

namespace {

bool is_word_byte(unsigned char ch) { return std::isalnum(ch) || ch >= 0x80; }

std::string strip_term(std::string_view s) {
  static const std::regex kNumbering(R"(^\s*(?:\d+\s*[.):](?=\s|$)|[-*#](?=\s)|\xE2\x80\xA2)\s*)");
  std::string out(trim(s));
  out = std::regex_replace(out, kNumbering, "", std::regex_constants::format_first_only);
  static const std::vector<std::string> kQuotes = {"\"", "'", "`", "\xE2\x80\x9C",
                                                   "\xE2\x80\x9D", "\xE2\x80\x98",
                                                   "\xE2\x80\x99"};
  bool changed = true;
  while (changed && !out.empty()) {
    changed = false;
    std::string trimmed(trim(out));
    if (trimmed != out) {
      out = trimmed;
      changed = true;
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ';')) {
      out.pop_back();
      changed = true;
    }
    for (const auto& q : kQuotes) {
      if (out.starts_with(q)) {
        out.erase(0, q.size());
        changed = true;
      }
      if (out.ends_with(q) && !out.empty()) {
        out.erase(out.size() - q.size());
        changed = true;
      }
    }
  }
  return to_lower_ascii(out);
}

}  // namespace

std::vector<std::string> parse_term_list(std::string_view response) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::string current;
  auto flush = [&] {
    std::string term = strip_term(current);
    current.clear();
    if (!term.empty() && seen.insert(term).second) out.push_back(std::move(term));
  };
  for (char ch : response) {
    if (ch == ',' || ch == '\n') {
      flush();
    } else {
      current.push_back(ch);
    }
  }
  flush();
  if (out.empty()) throw ParseError("no terms found in LLM response", std::string(response));
  return out;
}

ClassSelection parse_class_selection(std::string_view response, const ClassList& candidates,
                                     const Taxonomy& t, ClassId fallback) {
  if (candidates.empty()) throw ValidationError("class selection needs candidates");
  const std::string text = to_lower_ascii(response);
  std::vector<bool> claimed(text.size(), false);

  // Marks every unclaimed whole-word occurrence of `name`; true if any.
  auto claim = [&](const std::string& name) {
    if (name.empty()) return false;
    bool found = false;
    for (std::size_t pos = text.find(name); pos != std::string::npos;
         pos = text.find(name, pos + 1)) {
      std::size_t end = pos + name.size();
      bool left_ok = pos == 0 || !is_word_byte(text[pos - 1]);
      bool right_ok = end == text.size() || !is_word_byte(text[end]);
      if (!left_ok || !right_ok) continue;
      if (std::any_of(claimed.begin() + pos, claimed.begin() + end, [](bool b) { return b; })) {
        continue;
      }
      std::fill(claimed.begin() + pos, claimed.begin() + end, true);
      found = true;
    }
    return found;
  };

  auto by_length = [&](ClassList ids) {
    std::stable_sort(ids.begin(), ids.end(), [&](ClassId a, ClassId b) {
      const auto& na = t.name(a);
      const auto& nb = t.name(b);
      if (na.size() != nb.size()) return na.size() > nb.size();
      return na < nb;
    });
    return ids;
  };

  ClassSelection result;
  std::unordered_set<ClassId> candidate_set(candidates.begin(), candidates.end());
  ClassList others;
  for (ClassId c : t.classes()) {
    if (!candidate_set.count(c)) others.push_back(c);
  }
  // Candidates claim text first so a non-candidate substring cannot shadow them.
  for (ClassId c : by_length(candidates)) {
    if (claim(to_lower_ascii(t.name(c)))) result.classes.push_back(c);
  }
  for (ClassId c : by_length(others)) {
    if (claim(to_lower_ascii(t.name(c)))) result.ignored_names.push_back(t.name(c));
  }
  if (!result.ignored_names.empty()) {
    spdlog::debug("LLM named non-candidate classes: {}", join(result.ignored_names, ", "));
  }
  if (result.classes.empty()) {
    result.classes = {fallback};
    result.fallback_used = true;
  }
  std::sort(result.classes.begin(), result.classes.end());
  return result;
}

std::vector<std::string> split_passages(std::string_view response) {
  static const std::regex kItem(
      R"(^\s*(?:\*\*)?(?:(?:passage|review|text|document)\s*)?#?\d+\s*[.):](?:\*\*)?\s*)",
      std::regex::icase);
  auto lines = split_lines(response);
  std::vector<std::string> numbered;
  bool any_numbered = false;
  for (const auto& line : lines) {
    std::smatch m;
    if (std::regex_search(line, m, kItem)) {
      any_numbered = true;
      numbered.push_back(line.substr(m.length(0)));
    } else if (any_numbered) {
      auto body = trim(line);
      if (!body.empty()) {
        if (!numbered.back().empty()) numbered.back() += ' ';
        numbered.back() += body;
      }
    }
  }
  std::vector<std::string> out;
  if (any_numbered) {
    for (auto& p : numbered) {
      std::string body(trim(p));
      if (!body.empty()) out.push_back(std::move(body));
    }
    return out;
  }
  std::string block;
  for (const auto& line : lines) {
    auto body = trim(line);
    if (body.empty()) {
      if (!block.empty()) out.push_back(std::move(block));
      block.clear();
    } else {
      if (!block.empty()) block += ' ';
      block += body;
    }
  }
  if (!block.empty()) out.push_back(std::move(block));
  return out;
}

}  // namespace teleclass
