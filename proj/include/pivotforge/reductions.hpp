#pragma once

#include "pivotforge/mdp.hpp"
#include "pivotforge/simplex.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pf {

struct ReductionMap {
  std::vector<int> variable_action;  // column -> action
  std::vector<int> action_variable;  // action -> column, -1 for the sink action
  std::vector<int> state_row;        // state -> row, -1 for the sink

  Basis basis_of(const Policy& p) const;
};

// Flux LP: one variable per non-sink action, unit inflow per non-sink state.
// The three equivalence properties are checked on `samples` random policies.
std::pair<LinearProgram, ReductionMap> mdp_to_lp(const MarkovDecisionProcess& m, int samples = 20,
                                                 unsigned seed = 1);

struct LockstepRow {
  std::size_t iter = 0;
  std::string action;
  long long variable = 0;
  std::string rc_mdp, rc_lp, obj_mdp, obj_lp;
  bool match = false;
};

struct LockstepReport {
  bool ok = true;
  std::vector<LockstepRow> rows;
  std::optional<std::size_t> first_divergence;
  std::size_t mdp_iterations = 0;
  std::size_t lp_iterations = 0;
  std::string note;
};

LockstepReport lockstep_check(const MarkovDecisionProcess& m, const PivotRule& rule, const Policy& p0,
                              unsigned long long cap = 1ULL << 40);
std::string lockstep_to_json(const LockstepReport& r);

}  // namespace pf
