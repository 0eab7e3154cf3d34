#pragma once

#include <string>
#include <vector>

#include "slp/json_util.hpp"
#include "slp/program.hpp"
#include "slp/scenario.hpp"

namespace slp {

enum class LintCheck { chain, conflict, self_retrigger, dangling };

std::string_view to_string(LintCheck check);

struct LintFinding {
  LintCheck check = LintCheck::chain;
  /// Rule/button ids involved; for chains, {from, to}.
  std::vector<std::string> items;
  std::string message;
  /// Conflict pairs already answered by a remembered preference.
  bool resolved = false;
};

struct LintReport {
  std::vector<LintFinding> findings;

  std::vector<const LintFinding*> of(LintCheck check) const;
  bool has(LintCheck check, const std::vector<std::string>& items) const;
};

/// Static checks over a program:
///  - chain: something one item does can make a condition of a rule true;
///  - conflict: two enabled rules whose conditions can hold together;
///  - self-retrigger: a rule none of whose actions can make its own
///    conditions false, so it fires again as long as objects last;
///  - dangling: references that do not resolve.
LintReport lint_program(const Program& program, const Scenario& scenario);

std::string lint_text(const LintReport& report);
Json lint_json(const LintReport& report);

}  // namespace slp
