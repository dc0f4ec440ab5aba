#include "ecosim/prompt.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecosim::prompt {

namespace {

// Built-in template texts. A templates/ directory with <id>.txt files
// overrides these at runtime (see TemplateRegistry::load_dir).
constexpr const char* kPlain = R"(You are a delivery rider in a simulated city.
Current status:
{state}
{order}
Choose exactly one action from: {actions}.
Reply with a single line: ACTION: <choice>
)";

constexpr const char* kIncome = R"(You are a delivery rider in a simulated city.
Primary objective: maximize earnings. Prefer orders whose payout is worth the travel they require.
Current status:
{state}
{order}
Relevant past decisions:
{memory}
Choose exactly one action from: {actions}.
Reply with a single line: ACTION: <choice>
)";

constexpr const char* kHealth = R"(You are a delivery rider in a simulated city.
Primary objective: protect stamina and recover health. Decline work that would overextend you and prefer resting when worn down.
Current status:
{state}
{order}
Relevant past decisions:
{memory}
Choose exactly one action from: {actions}.
Reply with a single line: ACTION: <choice>
)";

constexpr const char* kRank = R"(You are a delivery rider in a simulated city.
Primary objective: improve your earnings standing relative to the other riders. Seek work that closes the gap to whoever is ahead of you.
Current status:
{state}
{order}
Relevant past decisions:
{memory}
Choose exactly one action from: {actions}.
Reply with a single line: ACTION: <choice>
)";

constexpr const char* kImportance = R"(Rate how important the following decision rationale is for future delivery decisions.
Reply with a single number between 0 and 1.
Rationale: {rationale}
)";

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

TemplateRegistry TemplateRegistry::with_defaults() {
  TemplateRegistry r;
  r.templates_["plain"] = kPlain;
  r.templates_["objective_income"] = kIncome;
  r.templates_["objective_health"] = kHealth;
  r.templates_["objective_rank"] = kRank;
  r.templates_["importance_eval"] = kImportance;
  return r;
}

void TemplateRegistry::load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("template directory not found: " + dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    templates_[entry.path().stem().string()] = buf.str();
  }
}

const std::string& TemplateRegistry::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw std::out_of_range("unknown prompt template: " + id);
  return it->second;
}

std::string describe_state(const AgentState& state, Tick ticks_per_day) {
  const Tick day = state.tick / ticks_per_day + 1;
  const Tick t = state.tick % ticks_per_day;
  const int hh = static_cast<int>(t * 24 / ticks_per_day);
  const int mm = static_cast<int>((t * 24 * 60 / ticks_per_day) % 60);
  char clock[16];
  std::snprintf(clock, sizeof(clock), "%02d:%02d", hh, mm);
  std::ostringstream out;
  out << "day=" << day << " time=" << clock << " income=" << state.income
      << " health=" << fmt("%.1f", state.health) << " rank=" << fmt("%.3f", state.social_rank)
      << " emotion=" << to_string(state.emotion);
  return out.str();
}

std::string describe_order(const std::optional<Order>& pending, const AgentState& /*state*/) {
  if (!pending) return "No pending offer.";
  std::ostringstream out;
  out << "Offer: payout=" << pending->payout << " pickup=(" << pending->restaurant_pos.x << ","
      << pending->restaurant_pos.y << ") dropoff=(" << pending->consumer_pos.x << ","
      << pending->consumer_pos.y << ") created_tick=" << pending->created_tick;
  return out.str();
}

std::string describe_actions(const std::vector<Action>& candidates) {
  std::ostringstream out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) out << ", ";
    out << to_string(candidates[i]);
  }
  return out.str();
}

namespace {

std::string render_common(const std::string& tpl, const AgentState& state,
                          const std::vector<std::string>& memory_snippets,
                          const std::optional<Order>& pending_order,
                          const std::vector<Action>& candidates, Tick ticks_per_day) {
  std::string text = tpl;
  text = replace_all(text, "{state}", describe_state(state, ticks_per_day));
  text = replace_all(text, "{order}", describe_order(pending_order, state));
  std::string memory;
  if (memory_snippets.empty()) {
    memory = "(none)";
  } else {
    for (std::size_t i = 0; i < memory_snippets.size(); ++i) {
      if (i) memory += "\n";
      memory += "- " + memory_snippets[i];
    }
  }
  text = replace_all(text, "{memory}", memory);
  text = replace_all(text, "{actions}", describe_actions(candidates));
  return text;
}

}  // namespace

std::string render_prompt(const desire::ObjectivePlan& plan, const AgentState& state,
                          const std::vector<std::string>& memory_snippets,
                          const std::optional<Order>& pending_order,
                          const std::vector<Action>& candidates, Tick ticks_per_day,
                          const TemplateRegistry& registry) {
  const std::string& tpl = registry.get(plan.prompt_template_id);
  std::string text =
      render_common(tpl, state, memory_snippets, pending_order, candidates, ticks_per_day);
  text = replace_all(text, "{objective}", std::string(to_string(plan.focus_dimension)));
  return text;
}

std::string render_plain_prompt(const AgentState& state,
                                const std::optional<Order>& pending_order,
                                const std::vector<Action>& candidates, Tick ticks_per_day,
                                const TemplateRegistry& registry) {
  return render_common(registry.get("plain"), state, {}, pending_order, candidates,
                       ticks_per_day);
}

std::string render_importance_prompt(const std::string& rationale,
                                     const TemplateRegistry& registry) {
  return replace_all(registry.get("importance_eval"), "{rationale}", rationale);
}

}  // namespace ecosim::prompt
