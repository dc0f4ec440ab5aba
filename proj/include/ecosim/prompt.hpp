#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecosim/desire.hpp"
#include "ecosim/types.hpp"

namespace ecosim::prompt {

// Text templates keyed by id, with {state} / {order} / {memory} / {actions} /
// {objective} / {rationale} placeholders. Ships with built-in defaults;
// load_dir replaces any id that has a matching <id>.txt file.
class TemplateRegistry {
public:
  static TemplateRegistry with_defaults();

  // Loads every *.txt in dir as a template keyed by its stem.
  void load_dir(const std::string& dir);

  bool has(const std::string& id) const { return templates_.count(id) > 0; }
  const std::string& get(const std::string& id) const;  // throws on missing id
  void set(const std::string& id, std::string text) { templates_[id] = std::move(text); }

private:
  std::map<std::string, std::string> templates_;
};

// Deterministic textual fields; byte-identical output for identical inputs.
std::string describe_state(const AgentState& state, Tick ticks_per_day);
std::string describe_order(const std::optional<Order>& pending, const AgentState& state);
std::string describe_actions(const std::vector<Action>& candidates);

// Fills the plan's template with state fields, the focus objective text,
// retrieved memory snippets (order preserved) and the action menu. Throws
// std::out_of_range when the template id is unknown.
std::string render_prompt(const desire::ObjectivePlan& plan, const AgentState& state,
                          const std::vector<std::string>& memory_snippets,
                          const std::optional<Order>& pending_order,
                          const std::vector<Action>& candidates, Tick ticks_per_day,
                          const TemplateRegistry& registry);

// Same substitution path with the plain (non-desire-conditioned) template,
// used by the GPT-style baseline policy.
std::string render_plain_prompt(const AgentState& state,
                                const std::optional<Order>& pending_order,
                                const std::vector<Action>& candidates, Tick ticks_per_day,
                                const TemplateRegistry& registry);

// Prompt asking the evaluation agent to rate a rationale in [0, 1].
std::string render_importance_prompt(const std::string& rationale,
                                     const TemplateRegistry& registry);

}  // namespace ecosim::prompt
