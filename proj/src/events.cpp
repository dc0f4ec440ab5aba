#include "ecosim/events.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ecosim {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::offer: return "offer";
    case EventKind::decision: return "decision";
    case EventKind::pickup: return "pickup";
    case EventKind::deliver: return "deliver";
    case EventKind::expire: return "expire";
    case EventKind::sleep: return "sleep";
    case EventKind::wake: return "wake";
    case EventKind::emotion_sample: return "emotion_sample";
    case EventKind::desire_update: return "desire_update";
  }
  return "offer";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(EventKind::desire_update); ++i) {
    EventKind k = static_cast<EventKind>(i);
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string SimEvent::to_jsonl() const {
  json j;
  j["tick"] = tick;
  j["agent"] = agent;
  j["kind"] = std::string(to_string(kind));
  j["seq"] = seq;
  j["payload"] = payload;
  return j.dump();
}

SimEvent SimEvent::from_jsonl(const std::string& line) {
  json j = json::parse(line);
  SimEvent e;
  e.tick = j.at("tick").get<Tick>();
  e.agent = j.at("agent").get<int>();
  auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown event kind in log: " + line);
  e.kind = *kind;
  e.seq = j.at("seq").get<std::int64_t>();
  e.payload = j.at("payload");
  return e;
}

JsonlSink::JsonlSink(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open event log for writing: " + path);
}

void JsonlSink::emit(const SimEvent& event) { out_ << event.to_jsonl() << "\n"; }

std::vector<SimEvent> read_events_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  std::vector<SimEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(SimEvent::from_jsonl(line));
  }
  return events;
}

std::string daily_csv_header() {
  return "day,agent,policy,money,income_day,distance,distance_day,happiness,"
         "w_income,w_health,w_rank,focus,offers,accepts,delivered";
}

std::string to_csv(const DailyRow& r) {
  char buf[64];
  std::ostringstream out;
  out << r.day << ',' << r.agent << ',' << r.policy << ',' << r.money << ',' << r.income_day
      << ',' << r.distance << ',' << r.distance_day << ',';
  std::snprintf(buf, sizeof(buf), "%.6f", r.happiness);
  out << buf << ',';
  std::snprintf(buf, sizeof(buf), "%.6f", r.w_income);
  out << buf << ',';
  std::snprintf(buf, sizeof(buf), "%.6f", r.w_health);
  out << buf << ',';
  std::snprintf(buf, sizeof(buf), "%.6f", r.w_rank);
  out << buf << ',' << r.focus << ',' << r.offers << ',' << r.accepts << ',' << r.delivered;
  return out.str();
}

std::vector<DailyRow> read_daily_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open daily summary: " + path);
  std::vector<DailyRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string col;
    std::istringstream ls(line);
    while (std::getline(ls, col, ',')) cols.push_back(col);
    if (cols.size() != 15) throw std::runtime_error("malformed daily.csv row: " + line);
    DailyRow r;
    r.day = std::stoi(cols[0]);
    r.agent = std::stoi(cols[1]);
    r.policy = cols[2];
    r.money = std::stoll(cols[3]);
    r.income_day = std::stoll(cols[4]);
    r.distance = std::stoll(cols[5]);
    r.distance_day = std::stoll(cols[6]);
    r.happiness = std::stod(cols[7]);
    r.w_income = std::stod(cols[8]);
    r.w_health = std::stod(cols[9]);
    r.w_rank = std::stod(cols[10]);
    r.focus = cols[11];
    r.offers = std::stoi(cols[12]);
    r.accepts = std::stoi(cols[13]);
    r.delivered = std::stoi(cols[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ecosim
