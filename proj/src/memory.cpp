#include "ecosim/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "ecosim/rng.hpp"

namespace ecosim::memory {

using nlohmann::json;

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine_similarity: zero vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// HashEmbedder
// ---------------------------------------------------------------------------

HashEmbedder::HashEmbedder(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("HashEmbedder: dim must be >= 1");
}

std::vector<double> HashEmbedder::embed(const std::string& text) const {
  std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64(token);
    const std::size_t bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
    any = true;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  if (!any) v[0] = 1.0;  // tokenless text still embeds to a usable vector
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    norm = 1.0;
  }
  for (double& x : v) x /= norm;
  return v;
}

// ---------------------------------------------------------------------------
// MemoryStore
// ---------------------------------------------------------------------------

std::int64_t MemoryStore::write(MemoryRecord record) {
  if (static_cast<int>(record.embedding.size()) != dim_) {
    throw std::invalid_argument("MemoryStore::write: embedding dimension mismatch");
  }
  if (!(record.importance >= 0.0 && record.importance <= 1.0)) {
    throw std::invalid_argument("MemoryStore::write: importance out of range [0, 1]");
  }
  record.id = next_id_++;
  records_.push_back(std::move(record));
  return records_.back().id;
}

const MemoryRecord* MemoryStore::find(std::int64_t id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<MemoryRecord> MemoryStore::retrieve(const RetrievalQuery& q) const {
  struct Scored {
    double similarity;
    const MemoryRecord* record;
  };
  std::vector<Scored> passing;
  for (const auto& r : records_) {
    if (q.now_tick - r.created_tick > q.ttl_ticks) continue;  // timeliness
    if (r.importance < q.min_importance) continue;            // importance
    const double sim = cosine_similarity(q.query_embedding, r.embedding);
    if (sim < q.min_similarity) continue;                     // similarity
    passing.push_back({sim, &r});
  }
  std::sort(passing.begin(), passing.end(), [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.record->created_tick != b.record->created_tick) {
      return a.record->created_tick > b.record->created_tick;
    }
    return a.record->id > b.record->id;
  });
  std::vector<MemoryRecord> out;
  const std::size_t n = std::min<std::size_t>(passing.size(), static_cast<std::size_t>(q.k));
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*passing[i].record);
  return out;
}

std::size_t MemoryStore::evict_older_than(Tick now_tick, Tick ttl_ticks) {
  const std::size_t before = records_.size();
  std::erase_if(records_, [&](const MemoryRecord& r) {
    return now_tick - r.created_tick > ttl_ticks;
  });
  return before - records_.size();
}

void MemoryStore::snapshot_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write memory snapshot: " + path);
  for (const auto& r : records_) {
    json j;
    j["id"] = r.id;
    j["created_tick"] = r.created_tick;
    j["problem"] = r.problem_text;
    j["decision"] = r.decision_text;
    j["rationale"] = r.rationale_text;
    j["embedding"] = r.embedding;
    j["importance"] = r.importance;
    j["emotion"] = std::string(to_string(r.emotion_at_write));
    out << j.dump() << "\n";
  }
}

MemoryStore MemoryStore::load_jsonl(const std::string& path, int embedding_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read memory snapshot: " + path);
  MemoryStore store(embedding_dim);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    MemoryRecord r;
    r.created_tick = j.at("created_tick").get<Tick>();
    r.problem_text = j.at("problem").get<std::string>();
    r.decision_text = j.at("decision").get<std::string>();
    r.rationale_text = j.at("rationale").get<std::string>();
    r.embedding = j.at("embedding").get<std::vector<double>>();
    r.importance = j.at("importance").get<double>();
    if (auto label = parse_emotion_label(j.at("emotion").get<std::string>())) {
      r.emotion_at_write = *label;
    }
    store.write(std::move(r));
  }
  return store;
}

// ---------------------------------------------------------------------------
// score_importance
// ---------------------------------------------------------------------------

namespace {

// First numeric token in the text, if any.
bool parse_first_number(const std::string& text, double& out) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool digit = std::isdigit(static_cast<unsigned char>(c));
    const bool sign_start = (c == '-' || c == '+' || c == '.') && i + 1 < text.size() &&
                            std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (!digit && !sign_start) continue;
    try {
      std::size_t used = 0;
      out = std::stod(text.substr(i), &used);
      return used > 0;
    } catch (const std::exception&) {
      return false;
    }
  }
  return false;
}

}  // namespace

ImportanceScore score_importance(const std::string& /*rationale_text*/, LlmBackend& backend,
                                 const MemoryConfig& cfg, const std::string& eval_prompt) {
  BackendReply reply = backend.respond(eval_prompt);
  if (!reply.ok) {
    return {false, cfg.default_importance, "importance evaluator: " + reply.error};
  }
  double value = cfg.default_importance;
  if (parse_first_number(reply.text, value)) {
    value = std::clamp(value, 0.0, 1.0);
  } else {
    value = cfg.default_importance;
  }
  return {true, value, ""};
}

}  // namespace ecosim::memory
