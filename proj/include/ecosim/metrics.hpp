#pragma once

#include <map>
#include <string>
#include <vector>

#include "ecosim/events.hpp"
#include "ecosim/types.hpp"

namespace ecosim::metrics {

// ---------------------------------------------------------------------------
// Core quantities
// ---------------------------------------------------------------------------

struct InvolutionInputs {
  std::vector<double> incomes;    // per-rider money at time t
  std::vector<double> distances;  // per-rider walking distance at time t
};

// mean(distances) * population_std(incomes) / mean(incomes).
// Throws std::domain_error when mean income is zero (undefined involution)
// and std::invalid_argument on malformed inputs.
double involution(const InvolutionInputs& inp);

// Dynamic time warping with absolute-difference local cost and the
// three-predecessor min; DTW(1,1) = |x1 - y1|. Throws on empty input.
double dtw(const std::vector<double>& x, const std::vector<double>& y);

// (v - mean) / population_std per element; a constant series maps to the
// zero vector by convention.
std::vector<double> z_normalize(const std::vector<double>& series);

// ---------------------------------------------------------------------------
// Run-level reports
// ---------------------------------------------------------------------------

struct RunData {
  std::vector<SimEvent> events;
  std::vector<DailyRow> daily;
};

RunData load_run_dir(const std::string& dir);  // reads events.jsonl + daily.csv

struct ConsistencyRow {
  int agent = 0;
  std::string policy;
  double dtw_z = 0.0;    // DTW between z-normalized daily income and happiness
  double dtw_raw = 0.0;  // same series without normalization
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> per_agent;
  std::map<std::string, double> per_type_mean_z;  // policy -> mean dtw_z
};

// Per-agent DTW between daily income and daily happiness-fraction series
// (z-normalized), aggregated per policy type. Requires >= 2 days of data.
ConsistencyReport consistency_report(const std::vector<DailyRow>& daily);

// accepted offers / total offers for agents of one policy type, recounted
// from raw offer/decision events. Throws std::domain_error on zero offers.
double acceptance_rate(const RunData& run, const std::string& policy_type);

// Same ratio from the daily summary table (cross-check for the event count).
double acceptance_rate_from_daily(const std::vector<DailyRow>& daily,
                                  const std::string& policy_type);

struct DesireDistributionRow {
  int day = 0;
  double frac_income = 0.0;
  double frac_health = 0.0;
  double frac_rank = 0.0;
};

// Per-day fractions of the focus dimension across framework agents' daily
// snapshots; fractions sum to 1 per row. Throws std::domain_error when the
// run contains no framework desire data.
std::vector<DesireDistributionRow> desire_distribution(const std::vector<DailyRow>& daily);

// Involution series, one value per day, from the daily summary table
// (cumulative money and cumulative walking distance at end of day).
std::vector<double> involution_series(const std::vector<DailyRow>& daily);

// ---------------------------------------------------------------------------
// Log audits (used by tests and the acceptance suite)
// ---------------------------------------------------------------------------

struct AuditResult {
  bool ok = true;
  std::vector<std::string> violations;
};

// Sum of daily rider income equals the sum of delivered payouts, per day,
// exactly (integer currency).
AuditResult audit_conservation(const RunData& run, Tick ticks_per_day);

// Every delivered order was picked up, every pickup was preceded by an
// accept, expiry only hits never-accepted orders, no duplicate transitions.
AuditResult audit_order_state_machine(const std::vector<SimEvent>& events);

// Reconstructs held counts from accept/deliver events; cap must never exceed
// max_held.
AuditResult audit_held_cap(const std::vector<SimEvent>& events, int max_held);

// desire_update events occur only at ticks where the agent's emotion label
// changed (the sole-trigger property).
AuditResult audit_sole_trigger(const std::vector<SimEvent>& events);

}  // namespace ecosim::metrics
