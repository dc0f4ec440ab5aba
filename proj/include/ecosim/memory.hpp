#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecosim/backend.hpp"
#include "ecosim/config.hpp"
#include "ecosim/types.hpp"

namespace ecosim::memory {

struct MemoryRecord {
  std::int64_t id = 0;  // assigned by the store, strictly increasing
  Tick created_tick = 0;
  std::string problem_text;
  std::string decision_text;
  std::string rationale_text;
  std::vector<double> embedding;
  double importance = 0.0;  // in [0, 1]
  EmotionLabel emotion_at_write = EmotionLabel::neutral;
};

struct RetrievalQuery {
  std::vector<double> query_embedding;
  Tick now_tick = 0;
  int k = 3;
  double min_similarity = 0.0;
  double min_importance = 0.0;
  Tick ttl_ticks = 1;
};

// dot(a, b) / (|a| * |b|). Throws std::invalid_argument on dimension
// mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Deterministic feature-hash embedding provider so the whole pipeline runs
// offline; any sentence encoder can stand in behind the same contract.
class Embedder {
public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual int dim() const = 0;
};

class HashEmbedder : public Embedder {
public:
  explicit HashEmbedder(int dim = 64);
  std::vector<double> embed(const std::string& text) const override;  // L2-normalized, never zero
  int dim() const override { return dim_; }

private:
  int dim_;
};

// Per-agent episodic store. Single writer; linear scan retrieval (the
// simulation never holds more than a few hundred live records per agent).
class MemoryStore {
public:
  explicit MemoryStore(int embedding_dim) : dim_(embedding_dim) {}

  // Validates dimension and importance; assigns and returns the id.
  std::int64_t write(MemoryRecord record);

  const MemoryRecord* find(std::int64_t id) const;

  // Applies the three gates (similarity, importance, timeliness), sorts by
  // similarity descending then recency descending, truncates to k.
  std::vector<MemoryRecord> retrieve(const RetrievalQuery& q) const;

  // Removes exactly the records with now_tick - created_tick > ttl_ticks.
  std::size_t evict_older_than(Tick now_tick, Tick ttl_ticks);

  std::size_t size() const { return records_.size(); }
  const std::vector<MemoryRecord>& records() const { return records_; }
  int dim() const { return dim_; }

  void snapshot_jsonl(const std::string& path) const;
  static MemoryStore load_jsonl(const std::string& path, int embedding_dim);

private:
  int dim_;
  std::int64_t next_id_ = 1;
  std::vector<MemoryRecord> records_;
};

struct ImportanceScore {
  bool ok = false;       // false only on backend transport error
  double value = 0.0;
  std::string error;
};

// Asks the evaluation backend to rate a rationale; parses the first numeric
// token of the reply clamped to [0, 1], falling back to
// cfg.default_importance when the reply has no number. Transport errors are
// propagated in the result, not thrown.
ImportanceScore score_importance(const std::string& rationale_text, LlmBackend& backend,
                                 const MemoryConfig& cfg, const std::string& eval_prompt);

}  // namespace ecosim::memory
