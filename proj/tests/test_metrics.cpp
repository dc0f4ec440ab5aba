#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ecosim/metrics.hpp"
#include "ecosim/rng.hpp"

using namespace ecosim;
using namespace ecosim::metrics;

namespace {

// Exhaustive warping-path oracle: recursive evaluation of the DTW recursion
// without the DP table, memo-free (fine for lengths <= 10).
double dtw_oracle(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                  std::size_t j) {
  const double cost = std::abs(x[i] - y[j]);
  if (i == 0 && j == 0) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i > 0) best = std::min(best, dtw_oracle(x, y, i - 1, j));
  if (j > 0) best = std::min(best, dtw_oracle(x, y, i, j - 1));
  if (i > 0 && j > 0) best = std::min(best, dtw_oracle(x, y, i - 1, j - 1));
  return cost + best;
}

double dtw_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  return dtw_oracle(x, y, x.size() - 1, y.size() - 1);
}

std::vector<double> random_series(Rng& rng, std::size_t max_len) {
  std::vector<double> out(1 + rng.next_below(max_len));
  for (auto& v : out) v = rng.next_double() * 20.0 - 10.0;
  return out;
}

DailyRow row_of(int day, int agent, const std::string& policy, Money money, Money income_day,
                std::int64_t distance, double happiness) {
  DailyRow r;
  r.day = day;
  r.agent = agent;
  r.policy = policy;
  r.money = money;
  r.income_day = income_day;
  r.distance = distance;
  r.happiness = happiness;
  return r;
}

}  // namespace

TEST_SUITE("metrics.involution") {
  TEST_CASE("zero dispersion gives zero") {
    CHECK(involution({{100.0, 100.0}, {10.0, 20.0}}) == 0.0);
  }

  TEST_CASE("hand-computed value") {
    // mu = 100, population sigma = 50, mean distance = 15 -> 7.5
    CHECK(involution({{50.0, 150.0}, {10.0, 20.0}}) == doctest::Approx(7.5).epsilon(1e-12));
  }

  TEST_CASE("income scaling cancels; distance scaling is linear") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
      InvolutionInputs inp;
      const std::size_t n = 2 + rng.next_below(8);
      for (std::size_t j = 0; j < n; ++j) {
        inp.incomes.push_back(rng.next_double() * 100.0 + 1.0);
        inp.distances.push_back(rng.next_double() * 50.0);
      }
      const double base = involution(inp);
      const double k = rng.next_double() * 9.0 + 0.5;
      InvolutionInputs scaled = inp;
      for (auto& v : scaled.incomes) v *= k;
      CHECK(involution(scaled) == doctest::Approx(base).epsilon(1e-9));
      InvolutionInputs dscaled = inp;
      for (auto& v : dscaled.distances) v *= k;
      CHECK(involution(dscaled) == doctest::Approx(base * k).epsilon(1e-9));
    }
  }

  TEST_CASE("zero mean income is undefined") {
    CHECK_THROWS_AS(involution({{0.0, 0.0}, {1.0, 2.0}}), std::domain_error);
    CHECK_THROWS_AS(involution({{1.0}, {1.0}}), std::invalid_argument);
  }
}

TEST_SUITE("metrics.dtw") {
  TEST_CASE("identical series align at zero cost") {
    const std::vector<double> x{1.0, 2.0, 3.0, 2.0};
    CHECK(dtw(x, x) == 0.0);
  }

  TEST_CASE("hand-computed 2x2 table") {
    CHECK(dtw({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("matches the exhaustive path oracle on short random series") {
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
      const auto x = random_series(rng, 10);
      const auto y = random_series(rng, 10);
      CHECK(dtw(x, y) == doctest::Approx(dtw_oracle(x, y)).epsilon(1e-12));
    }
  }

  TEST_CASE("symmetric and non-negative") {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
      const auto x = random_series(rng, 12);
      const auto y = random_series(rng, 12);
      const double xy = dtw(x, y);
      CHECK(xy >= 0.0);
      CHECK(xy == doctest::Approx(dtw(y, x)).epsilon(1e-12));
    }
  }

  TEST_CASE("empty series are rejected") {
    CHECK_THROWS_AS(dtw({}, {1.0}), std::invalid_argument);
  }
}

TEST_SUITE("metrics.znorm") {
  TEST_CASE("constant series normalize to the zero vector") {
    const auto z = z_normalize({5.0, 5.0, 5.0});
    for (double v : z) CHECK(v == 0.0);
  }

  TEST_CASE("z-normalized series has mean 0 and population std 1") {
    const auto z = z_normalize({1.0, 2.0, 3.0, 4.0});
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    CHECK(mean == doctest::Approx(0.0));
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    CHECK(var / static_cast<double>(z.size()) == doctest::Approx(1.0));
  }
}

TEST_SUITE("metrics.consistency") {
  TEST_CASE("constant income and happiness give zero DTW after z-norm") {
    std::vector<DailyRow> daily;
    for (int day = 1; day <= 4; ++day) {
      daily.push_back(row_of(day, 0, "rule", 100 * day, 100, 50 * day, 0.25));
    }
    const auto report = consistency_report(daily);
    REQUIRE(report.per_agent.size() == 1);
    CHECK(report.per_agent[0].dtw_z == 0.0);
  }

  TEST_CASE("correlated series score below their shuffled counterpart") {
    Rng rng(43);
    std::vector<DailyRow> daily;
    std::vector<double> happiness;
    for (int day = 1; day <= 12; ++day) {
      const double h = rng.next_double();
      happiness.push_back(h);
      daily.push_back(row_of(day, 0, "framework", 0, static_cast<Money>(100.0 * h + 5.0), 10,
                             h));  // income_day tracks happiness
    }
    // permutation baseline: same happiness values, shuffled against income
    std::vector<double> shuffled = happiness;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    }
    std::vector<DailyRow> permuted = daily;
    for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].happiness = shuffled[i];

    const double corr = consistency_report(daily).per_agent[0].dtw_z;
    const double perm = consistency_report(permuted).per_agent[0].dtw_z;
    CHECK(corr < perm);
  }

  TEST_CASE("per-type means are reported side by side") {
    std::vector<DailyRow> daily;
    for (int day = 1; day <= 3; ++day) {
      daily.push_back(row_of(day, 0, "framework", 0, day * 10, 0, 0.1 * day));
      daily.push_back(row_of(day, 1, "rl", 0, day * 7, 0, 0.9 - 0.1 * day));
    }
    const auto report = consistency_report(daily);
    CHECK(report.per_type_mean_z.count("framework") == 1);
    CHECK(report.per_type_mean_z.count("rl") == 1);
  }

  TEST_CASE("a single day of data is an error") {
    std::vector<DailyRow> daily{row_of(1, 0, "rule", 10, 10, 5, 0.0)};
    CHECK_THROWS_AS(consistency_report(daily), std::domain_error);
  }
}

TEST_SUITE("metrics.rates") {
  TEST_CASE("acceptance rate from summary counts") {
    std::vector<DailyRow> daily;
    auto r1 = row_of(1, 0, "rule", 0, 0, 0, 0.0);
    r1.offers = 10;
    r1.accepts = 3;
    daily.push_back(r1);
    CHECK(acceptance_rate_from_daily(daily, "rule") == doctest::Approx(0.3));
    auto r2 = row_of(2, 0, "rule", 0, 0, 0, 0.0);
    r2.offers = 5;
    r2.accepts = 5;
    daily.push_back(r2);
    CHECK(acceptance_rate_from_daily(daily, "rule") == doctest::Approx(8.0 / 15.0));
    CHECK_THROWS_AS(acceptance_rate_from_daily(daily, "llm"), std::domain_error);
  }

  TEST_CASE("event recount equals the summary value") {
    RunData run;
    auto row = row_of(1, 0, "rule", 0, 0, 0, 0.0);
    row.offers = 4;
    row.accepts = 2;
    run.daily.push_back(row);
    for (int i = 0; i < 4; ++i) {
      SimEvent offer;
      offer.tick = i;
      offer.agent = 0;
      offer.kind = EventKind::offer;
      offer.payload = {{"order", i}, {"payout", 10}, {"route", 5}};
      run.events.push_back(offer);
      SimEvent decision;
      decision.tick = i;
      decision.agent = 0;
      decision.kind = EventKind::decision;
      decision.payload = {{"order", i}, {"action", i < 2 ? "accept" : "reject"},
                          {"policy", "rule"}};
      run.events.push_back(decision);
    }
    CHECK(acceptance_rate(run, "rule") == doctest::Approx(0.5));
    CHECK(acceptance_rate(run, "rule") ==
          doctest::Approx(acceptance_rate_from_daily(run.daily, "rule")));
  }
}

TEST_SUITE("metrics.desire_distribution") {
  TEST_CASE("fractions per day sum to one and count focus snapshots") {
    std::vector<DailyRow> daily;
    auto mk = [&](int day, int agent, const std::string& focus) {
      auto r = row_of(day, agent, "framework", 0, 0, 0, 0.0);
      r.focus = focus;
      daily.push_back(r);
    };
    mk(1, 0, "income");
    mk(1, 1, "income");
    mk(1, 2, "health");
    const auto rows = desire_distribution(daily);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].frac_income == doctest::Approx(2.0 / 3.0));
    CHECK(rows[0].frac_health == doctest::Approx(1.0 / 3.0));
    CHECK(rows[0].frac_rank == doctest::Approx(0.0));
    CHECK(rows[0].frac_income + rows[0].frac_health + rows[0].frac_rank ==
          doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("runs without framework agents are an error") {
    std::vector<DailyRow> daily{row_of(1, 0, "rule", 0, 0, 0, 0.0)};
    CHECK_THROWS_AS(desire_distribution(daily), std::domain_error);
  }
}

TEST_SUITE("metrics.audits") {
  TEST_CASE("sole-trigger audit flags desire updates without a transition") {
    std::vector<SimEvent> events;
    SimEvent sample;
    sample.tick = 10;
    sample.agent = 0;
    sample.kind = EventKind::emotion_sample;
    sample.payload = {{"label", "happiness"}, {"prev", "neutral"},
                      {"pleasure", 0.5}, {"arousal", 0.0}, {"dominance", 0.0}};
    events.push_back(sample);
    SimEvent update;
    update.tick = 10;
    update.agent = 0;
    update.kind = EventKind::desire_update;
    update.payload = {{"w_income", 0.3}, {"w_health", 0.5}, {"w_rank", 0.2},
                      {"focus", "health"}, {"prev_focus", "income"}};
    events.push_back(update);
    CHECK(audit_sole_trigger(events).ok);

    // Same update at a tick whose sample shows no transition.
    events[0].payload["prev"] = "happiness";
    CHECK_FALSE(audit_sole_trigger(events).ok);
  }

  TEST_CASE("held-cap audit catches a fourth concurrent order") {
    std::vector<SimEvent> events;
    for (int i = 0; i < 4; ++i) {
      SimEvent e;
      e.tick = i;
      e.agent = 0;
      e.kind = EventKind::decision;
      e.payload = {{"order", i}, {"action", "accept"}, {"policy", "rule"}};
      events.push_back(e);
    }
    CHECK_FALSE(audit_held_cap(events, 3).ok);
    CHECK(audit_held_cap(events, 4).ok);
  }
}
