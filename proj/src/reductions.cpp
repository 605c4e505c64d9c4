#include "pivotforge/reductions.hpp"

#include <json.hpp>

#include <algorithm>
#include <random>

namespace pf {

Basis ReductionMap::basis_of(const Policy& p) const {
  Basis b;
  for (std::size_t s = 0; s < state_row.size(); ++s) {
    if (state_row[s] < 0) continue;
    int col = action_variable.at(p.choice[s]);
    if (col < 0) throw LpError("policy uses the sink action outside the sink");
    b.indices.push_back(col);
  }
  std::sort(b.indices.begin(), b.indices.end());
  return b;
}

namespace {

void check_policy(const MarkovDecisionProcess& m, const MdpEvaluator& ev, const LinearProgram& lp,
                  const ReductionMap& map, const Policy& p) {
  ValueMap v = ev.values(p);
  LpState st(lp, map.basis_of(p));
  if (!st.feasible()) throw LpError("reduction check: basis of a weak unichain policy is infeasible");
  if (!st.nondegenerate()) throw LpError("reduction check: basis of a weak unichain policy is degenerate");
  if (st.objective() != objective(v)) throw LpError("reduction check: objective differs from the sum of values");
  for (std::size_t col = 0; col < lp.cols(); ++col)
    if (st.reduced_costs()[col] != ev.reduced_cost(v, map.variable_action[col]))
      throw LpError("reduction check: reduced cost of variable " + std::to_string(col + 1) + " differs from action " +
                    m.actions[map.variable_action[col]].name);
}

}  // namespace

std::pair<LinearProgram, ReductionMap> mdp_to_lp(const MarkovDecisionProcess& m, int samples, unsigned seed) {
  MdpEvaluator ev(m);
  ReductionMap map;
  map.action_variable.assign(m.actions.size(), -1);
  for (int a : ev.bland_order()) {
    map.action_variable[a] = static_cast<int>(map.variable_action.size());
    map.variable_action.push_back(a);
  }
  map.state_row.assign(m.states.size(), -1);
  int rows = 0;
  for (std::size_t s = 0; s < m.states.size(); ++s)
    if (static_cast<int>(s) != m.sink) map.state_row[s] = rows++;

  LinearProgram lp;
  const std::size_t n = map.variable_action.size();
  lp.a.assign(rows, RationalVector(n, Rational(0)));
  lp.b.assign(rows, Rational(1));
  lp.c.assign(n, Rational(0));
  for (std::size_t col = 0; col < n; ++col) {
    const auto& act = m.actions[map.variable_action[col]];
    lp.c[col] = act.reward;
    lp.a[map.state_row[act.source]][col] += 1;
    for (const auto& t : act.transitions)
      if (t.target != m.sink) lp.a[map.state_row[t.target]][col] -= t.probability;
  }
  validate_lp(lp);

  auto avail = m.available();
  std::mt19937_64 rng(seed);
  int checked = 0;
  for (int attempt = 0; attempt < samples * 20 && checked < samples; ++attempt) {
    Policy p;
    p.choice.resize(m.states.size());
    for (std::size_t s = 0; s < m.states.size(); ++s)
      p.choice[s] = avail[s][std::uniform_int_distribution<std::size_t>(0, avail[s].size() - 1)(rng)];
    if (!ev.weak_unichain(p)) continue;
    check_policy(m, ev, lp, map, p);
    ++checked;
  }
  return {std::move(lp), std::move(map)};
}

LockstepReport lockstep_check(const MarkovDecisionProcess& m, const PivotRule& rule, const Policy& p0,
                              unsigned long long cap) {
  LockstepReport report;
  auto [lp, map] = mdp_to_lp(m);
  MdpEvaluator ev(m);
  RunTrace mt, lt;
  try {
    MdpRunOptions mo;
    mo.cap = cap;
    mo.record_reduced_costs = true;
    mt = policy_iteration(m, p0, rule, mo);
    SimplexRunOptions so;
    so.cap = cap;
    so.record_reduced_costs = true;
    lt = simplex(lp, map.basis_of(p0), rule, so);
  } catch (const std::exception& e) {
    report.ok = false;
    report.note = e.what();
    return report;
  }
  report.mdp_iterations = mt.iterations();
  report.lp_iterations = lt.iterations();
  const std::size_t rows = std::max(mt.steps.size(), lt.steps.size()) + 1;
  for (std::size_t i = 0; i < rows; ++i) {
    LockstepRow row;
    row.iter = i;
    bool have_m = i <= mt.steps.size(), have_l = i <= lt.steps.size();
    auto marks_m = !have_m ? std::map<std::string, std::string>{}
                           : (i < mt.steps.size() ? mt.steps[i].marks : mt.terminal.marks);
    auto marks_l = !have_l ? std::map<std::string, std::string>{}
                           : (i < lt.steps.size() ? lt.steps[i].marks : lt.terminal.marks);
    row.rc_mdp = marks_m.count("rc") ? marks_m["rc"] : "";
    row.rc_lp = marks_l.count("rc") ? marks_l["rc"] : "";
    row.obj_mdp = have_m ? (i < mt.steps.size() ? mt.steps[i].objective : mt.terminal.objective) : "";
    row.obj_lp = have_l ? (i < lt.steps.size() ? lt.steps[i].objective : lt.terminal.objective) : "";
    bool same_choice = false;
    if (i < mt.steps.size() && i < lt.steps.size()) {
      int action = ev.action_of_bland(mt.steps[i].chosen);
      row.action = m.actions[action].name;
      row.variable = lt.steps[i].chosen;
      same_choice = map.variable_action[lt.steps[i].chosen - 1] == action;
    } else if (i == mt.steps.size() && i == lt.steps.size()) {
      same_choice = true;  // both terminal
    }
    row.match = have_m && have_l && same_choice && row.rc_mdp == row.rc_lp && row.obj_mdp == row.obj_lp;
    if (!row.match && !report.first_divergence) report.first_divergence = i;
    report.rows.push_back(std::move(row));
  }
  report.ok = !report.first_divergence && mt.complete && lt.complete;
  if (!mt.complete || !lt.complete) report.note = "iteration cap reached";
  return report;
}

std::string lockstep_to_json(const LockstepReport& r) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"iter", row.iter},     {"action", row.action}, {"variable", row.variable},
                    {"rc_mdp", row.rc_mdp}, {"rc_lp", row.rc_lp},   {"obj_mdp", row.obj_mdp},
                    {"obj_lp", row.obj_lp}, {"match", row.match}});
  json j = {{"ok", r.ok}, {"mdp_iterations", r.mdp_iterations}, {"lp_iterations", r.lp_iterations}, {"rows", rows}};
  if (r.first_divergence) j["first_divergence"] = *r.first_divergence;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(1) + "\n";
}

}  // namespace pf
