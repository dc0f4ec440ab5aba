#include "ecosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ecosim::metrics {

double involution(const InvolutionInputs& inp) {
  const std::size_t n = inp.incomes.size();
  if (n < 2 || inp.distances.size() != n) {
    throw std::invalid_argument("involution: need equal-length lists of size >= 2");
  }
  double mu = 0.0;
  for (double v : inp.incomes) mu += v;
  mu /= static_cast<double>(n);
  if (mu == 0.0) throw std::domain_error("undefined involution: mean income is zero");
  double var = 0.0;
  for (double v : inp.incomes) var += (v - mu) * (v - mu);
  const double theta = std::sqrt(var / static_cast<double>(n));  // population std
  double pi = 0.0;
  for (double v : inp.distances) pi += v;
  pi /= static_cast<double>(n);
  return pi * theta / mu;
}

double dtw(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  if (n == 0 || m == 0) throw std::invalid_argument("dtw: empty series");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Rolling rows of the DP table; row[-1][-1] seeds DTW(1,1) = |x1 - y1|.
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = std::abs(x[i - 1] - y[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<double> z_normalize(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n == 0) return {};
  double mu = 0.0;
  for (double v : series) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mu) * (v - mu);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> out(n, 0.0);
  if (sd == 0.0) return out;  // constant series -> zero vector
  for (std::size_t i = 0; i < n; ++i) out[i] = (series[i] - mu) / sd;
  return out;
}

RunData load_run_dir(const std::string& dir) {
  RunData run;
  run.events = read_events_jsonl(dir + "/events.jsonl");
  run.daily = read_daily_csv(dir + "/daily.csv");
  return run;
}

ConsistencyReport consistency_report(const std::vector<DailyRow>& daily) {
  std::map<int, std::vector<const DailyRow*>> by_agent;
  for (const auto& row : daily) by_agent[row.agent].push_back(&row);

  ConsistencyReport report;
  std::map<std::string, std::pair<double, int>> type_acc;
  for (auto& [agent, rows] : by_agent) {
    if (rows.size() < 2) throw std::domain_error("consistency_report: need >= 2 days of data");
    std::sort(rows.begin(), rows.end(),
              [](const DailyRow* a, const DailyRow* b) { return a->day < b->day; });
    std::vector<double> income, happiness;
    for (const DailyRow* r : rows) {
      income.push_back(static_cast<double>(r->income_day));
      happiness.push_back(r->happiness);
    }
    ConsistencyRow row;
    row.agent = agent;
    row.policy = rows.front()->policy;
    row.dtw_z = dtw(z_normalize(income), z_normalize(happiness));
    row.dtw_raw = dtw(income, happiness);
    auto& acc = type_acc[row.policy];
    acc.first += row.dtw_z;
    acc.second += 1;
    report.per_agent.push_back(std::move(row));
  }
  for (const auto& [policy, acc] : type_acc) {
    report.per_type_mean_z[policy] = acc.first / acc.second;
  }
  return report;
}

namespace {

std::set<int> agents_of_type(const std::vector<DailyRow>& daily, const std::string& policy) {
  std::set<int> out;
  for (const auto& row : daily) {
    if (row.policy == policy) out.insert(row.agent);
  }
  return out;
}

}  // namespace

double acceptance_rate(const RunData& run, const std::string& policy_type) {
  const std::set<int> agents = agents_of_type(run.daily, policy_type);
  std::int64_t offers = 0;
  std::int64_t accepts = 0;
  for (const auto& e : run.events) {
    if (!agents.count(e.agent)) continue;
    if (e.kind == EventKind::offer) {
      ++offers;
    } else if (e.kind == EventKind::decision && e.payload.contains("order") &&
               e.payload.at("action").get<std::string>() == "accept") {
      ++accepts;
    }
  }
  if (offers == 0) throw std::domain_error("acceptance_rate: no offers for type " + policy_type);
  return static_cast<double>(accepts) / static_cast<double>(offers);
}

double acceptance_rate_from_daily(const std::vector<DailyRow>& daily,
                                  const std::string& policy_type) {
  std::int64_t offers = 0;
  std::int64_t accepts = 0;
  for (const auto& row : daily) {
    if (row.policy != policy_type) continue;
    offers += row.offers;
    accepts += row.accepts;
  }
  if (offers == 0) throw std::domain_error("acceptance_rate: no offers for type " + policy_type);
  return static_cast<double>(accepts) / static_cast<double>(offers);
}

std::vector<DesireDistributionRow> desire_distribution(const std::vector<DailyRow>& daily) {
  std::map<int, std::array<int, 3>> counts;  // day -> focus tallies
  for (const auto& row : daily) {
    if (row.policy != "framework") continue;
    int idx = -1;
    if (row.focus == "income") idx = 0;
    else if (row.focus == "health") idx = 1;
    else if (row.focus == "rank") idx = 2;
    if (idx < 0) continue;
    counts[row.day][static_cast<std::size_t>(idx)] += 1;
  }
  if (counts.empty()) {
    throw std::domain_error("desire_distribution: no framework desire data in run");
  }
  std::vector<DesireDistributionRow> out;
  for (const auto& [day, tally] : counts) {
    const double total = tally[0] + tally[1] + tally[2];
    DesireDistributionRow row;
    row.day = day;
    row.frac_income = tally[0] / total;
    row.frac_health = tally[1] / total;
    row.frac_rank = tally[2] / total;
    out.push_back(row);
  }
  return out;
}

std::vector<double> involution_series(const std::vector<DailyRow>& daily) {
  std::map<int, InvolutionInputs> by_day;
  for (const auto& row : daily) {
    auto& inputs = by_day[row.day];
    inputs.incomes.push_back(static_cast<double>(row.money));
    inputs.distances.push_back(static_cast<double>(row.distance));
  }
  std::vector<double> out;
  for (const auto& [day, inputs] : by_day) {
    double value = 0.0;
    try {
      value = involution(inputs);
    } catch (const std::domain_error&) {
      value = 0.0;  // all-zero incomes early in a run
    }
    out.push_back(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

AuditResult audit_conservation(const RunData& run, Tick ticks_per_day) {
  AuditResult result;
  std::map<int, Money> delivered_by_day;  // day -> payout sum
  int max_day = 0;
  for (const auto& row : run.daily) max_day = std::max(max_day, row.day);
  for (const auto& e : run.events) {
    if (e.kind != EventKind::deliver) continue;
    // Rollover samples sit exactly at day boundaries; deliveries never do
    // (they happen strictly inside a day), so integer division is safe.
    const int day = static_cast<int>(e.tick / ticks_per_day) + 1;
    delivered_by_day[day] += e.payload.at("payout").get<Money>();
  }
  std::map<int, Money> income_by_day;
  for (const auto& row : run.daily) income_by_day[row.day] += row.income_day;
  for (int day = 1; day <= max_day; ++day) {
    const Money earned = income_by_day.count(day) ? income_by_day[day] : 0;
    const Money paid = delivered_by_day.count(day) ? delivered_by_day[day] : 0;
    if (earned != paid) {
      result.ok = false;
      result.violations.push_back("day " + std::to_string(day) + ": income " +
                                  std::to_string(earned) + " != delivered payouts " +
                                  std::to_string(paid));
    }
  }
  return result;
}

AuditResult audit_order_state_machine(const std::vector<SimEvent>& events) {
  AuditResult result;
  std::map<std::int64_t, OrderState> state;
  auto violate = [&](std::int64_t order, const std::string& msg) {
    result.ok = false;
    result.violations.push_back("order " + std::to_string(order) + ": " + msg);
  };
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::decision: {
        if (!e.payload.contains("order")) break;
        if (e.payload.at("action").get<std::string>() != "accept") break;
        const auto id = e.payload.at("order").get<std::int64_t>();
        const OrderState from = state.count(id) ? state[id] : OrderState::pending;
        if (!order_transition_allowed(from, OrderState::assigned)) {
          violate(id, "accept from state " + std::string(to_string(from)));
        }
        state[id] = OrderState::assigned;
        break;
      }
      case EventKind::pickup: {
        const auto id = e.payload.at("order").get<std::int64_t>();
        const OrderState from = state.count(id) ? state[id] : OrderState::pending;
        if (!order_transition_allowed(from, OrderState::picked_up)) {
          violate(id, "pickup from state " + std::string(to_string(from)));
        }
        state[id] = OrderState::picked_up;
        break;
      }
      case EventKind::deliver: {
        const auto id = e.payload.at("order").get<std::int64_t>();
        const OrderState from = state.count(id) ? state[id] : OrderState::pending;
        if (!order_transition_allowed(from, OrderState::delivered)) {
          violate(id, "deliver from state " + std::string(to_string(from)));
        }
        state[id] = OrderState::delivered;
        break;
      }
      case EventKind::expire: {
        const auto id = e.payload.at("order").get<std::int64_t>();
        const OrderState from = state.count(id) ? state[id] : OrderState::pending;
        if (!order_transition_allowed(from, OrderState::expired)) {
          violate(id, "expire from state " + std::string(to_string(from)));
        }
        state[id] = OrderState::expired;
        break;
      }
      default:
        break;
    }
  }
  return result;
}

AuditResult audit_held_cap(const std::vector<SimEvent>& events, int max_held) {
  AuditResult result;
  std::map<int, int> held;
  for (const auto& e : events) {
    if (e.kind == EventKind::decision && e.payload.contains("order") &&
        e.payload.at("action").get<std::string>() == "accept") {
      held[e.agent] += 1;
      if (held[e.agent] > max_held) {
        result.ok = false;
        result.violations.push_back("agent " + std::to_string(e.agent) + " exceeded cap at tick " +
                                    std::to_string(e.tick));
      }
    } else if (e.kind == EventKind::deliver) {
      held[e.agent] -= 1;
      if (held[e.agent] < 0) {
        result.ok = false;
        result.violations.push_back("agent " + std::to_string(e.agent) +
                                    " delivered more than accepted at tick " +
                                    std::to_string(e.tick));
      }
    }
  }
  return result;
}

AuditResult audit_sole_trigger(const std::vector<SimEvent>& events) {
  AuditResult result;
  // (tick, agent) pairs where the sampled label changed.
  std::set<std::pair<Tick, int>> transitions;
  for (const auto& e : events) {
    if (e.kind != EventKind::emotion_sample) continue;
    if (e.payload.at("label").get<std::string>() != e.payload.at("prev").get<std::string>()) {
      transitions.insert({e.tick, e.agent});
    }
  }
  for (const auto& e : events) {
    if (e.kind != EventKind::desire_update) continue;
    if (!transitions.count({e.tick, e.agent})) {
      result.ok = false;
      result.violations.push_back("desire_update without emotion transition: agent " +
                                  std::to_string(e.agent) + " tick " + std::to_string(e.tick));
    }
  }
  return result;
}

}  // namespace ecosim::metrics
