#pragma once

#include "pivotforge/pivot_rules.hpp"

#include <optional>
#include <string>

namespace pf {

struct RuleConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedRule {
  PivotRule rule;
  std::optional<IndexSelector> selector;  // set for index-selector rules
  std::optional<RankPicker> picker;       // set for f rules
};

// {"kind":"greedy","ranking":...}, {"kind":"f","table":{...},"default":...},
// {"kind":"index-selector","transitions":[[k,n,h,rank,h'],...],"memory":l} or {"kind":"index-selector","preset":...}.
// In transitions, k = 0 or n = 0 matches any value.
ParsedRule parse_rule(const std::string& json_text);

RankPicker picker_by_name(const std::string& name);
IndexSelector selector_preset(const std::string& name);

// Selector with memory three whose prefix needs two free positions: (3,2), (1,3), (2,2).
IndexSelector three_state_selector();

}  // namespace pf
