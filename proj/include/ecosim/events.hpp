#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ecosim/types.hpp"

namespace ecosim {

enum class EventKind : int {
  offer = 0,
  decision,
  pickup,
  deliver,
  expire,
  sleep,
  wake,
  emotion_sample,
  desire_update,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view text);

// Append-only event record; all metrics derive from these. agent = -1 marks
// platform events (order expiry).
struct SimEvent {
  Tick tick = 0;
  int agent = -1;
  EventKind kind = EventKind::offer;
  std::int64_t seq = 0;  // global, strictly increasing
  nlohmann::json payload;

  std::string to_jsonl() const;
  static SimEvent from_jsonl(const std::string& line);
};

class EventSink {
public:
  virtual ~EventSink() = default;
  virtual void emit(const SimEvent& event) = 0;
};

class VectorSink : public EventSink {
public:
  void emit(const SimEvent& event) override { events.push_back(event); }
  std::vector<SimEvent> events;
};

class JsonlSink : public EventSink {
public:
  explicit JsonlSink(const std::string& path);
  void emit(const SimEvent& event) override;
  void close() { out_.close(); }

private:
  std::ofstream out_;
};

class MultiSink : public EventSink {
public:
  void add(EventSink* sink) { sinks_.push_back(sink); }
  void emit(const SimEvent& event) override {
    for (EventSink* s : sinks_) s->emit(event);
  }

private:
  std::vector<EventSink*> sinks_;
};

std::vector<SimEvent> read_events_jsonl(const std::string& path);

// One row per (day, rider) in daily.csv.
struct DailyRow {
  int day = 0;  // 1-based
  int agent = 0;
  std::string policy;
  Money money = 0;       // cumulative income at end of day
  Money income_day = 0;
  std::int64_t distance = 0;  // cumulative grid units walked
  std::int64_t distance_day = 0;
  double happiness = 0.0;  // fraction of the day's emotion samples
  double w_income = 0.0;
  double w_health = 0.0;
  double w_rank = 0.0;
  std::string focus;
  int offers = 0;
  int accepts = 0;
  int delivered = 0;
};

std::string daily_csv_header();
std::string to_csv(const DailyRow& row);
std::vector<DailyRow> read_daily_csv(const std::string& path);

}  // namespace ecosim
