#pragma once

// Line-oriented text form of a RuleSet. Output is stable: palette, labels
// and lock colors sorted, rules in priority order, every list in stored
// order.

#include <string>
#include <string_view>

#include "dynca/pattern.hpp"

namespace dynca {

std::string serialize_ruleset(const RuleSet& rules);

/// Throws ParseError with the offending line.
RuleSet parse_ruleset(std::string_view text);

}  // namespace dynca
