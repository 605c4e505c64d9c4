#include "pivotforge/mdp.hpp"

#include "pivotforge/graph.hpp"
#include "pivotforge/linear_solve.hpp"

#include <algorithm>
#include <set>

namespace pf {

int MarkovDecisionProcess::add_state(std::string name) {
  states.push_back(std::move(name));
  return static_cast<int>(states.size()) - 1;
}

int MarkovDecisionProcess::add_sink(std::string name) {
  sink = add_state(std::move(name));
  add_action(sink, 0, {{sink, 1}}, "sink");
  return sink;
}

int MarkovDecisionProcess::add_action(int source, Rational reward, std::vector<Transition> transitions,
                                      std::string name, long long bland) {
  actions.push_back({source, std::move(reward), std::move(transitions), bland, std::move(name)});
  return static_cast<int>(actions.size()) - 1;
}

int MarkovDecisionProcess::add_deterministic(int source, int target, Rational reward, std::string name) {
  return add_action(source, std::move(reward), {{target, 1}}, std::move(name));
}

std::vector<std::vector<int>> MarkovDecisionProcess::available() const {
  std::vector<std::vector<int>> out(states.size());
  for (std::size_t a = 0; a < actions.size(); ++a) out[actions[a].source].push_back(static_cast<int>(a));
  return out;
}

int MarkovDecisionProcess::state_by_name(const std::string& name) const {
  for (std::size_t s = 0; s < states.size(); ++s)
    if (states[s] == name) return static_cast<int>(s);
  return -1;
}

int MarkovDecisionProcess::action_by_name(const std::string& name) const {
  for (std::size_t a = 0; a < actions.size(); ++a)
    if (actions[a].name == name) return static_cast<int>(a);
  return -1;
}

int MarkovDecisionProcess::sink_action() const {
  for (std::size_t a = 0; a < actions.size(); ++a)
    if (actions[a].source == sink) return static_cast<int>(a);
  return -1;
}

void assign_bland(MarkovDecisionProcess& m, const std::vector<int>& order) {
  if (order.size() != m.actions.size()) throw MdpError("Bland order must list every action once");
  std::vector<char> seen(m.actions.size(), 0);
  long long next = 1;
  for (int a : order) {
    if (seen.at(a)) throw MdpError("Bland order lists an action twice");
    seen[a] = 1;
    m.actions[a].bland = next++;
  }
}

std::vector<std::string> validate_mdp(const MarkovDecisionProcess& m) {
  std::vector<std::string> out;
  const int n = static_cast<int>(m.states.size());
  if (m.sink < 0 || m.sink >= n) return {"sink missing"};
  auto avail = m.available();
  for (int s = 0; s < n; ++s)
    if (avail[s].empty()) out.push_back("state " + m.states[s] + " has no action");
  if (avail[m.sink].size() != 1) {
    out.push_back("sink must have exactly one action");
  } else {
    const auto& a = m.actions[avail[m.sink].front()];
    if (a.reward != 0 || a.transitions.size() != 1 || a.transitions[0].target != m.sink)
      out.push_back("sink action must be a zero-reward self-loop");
  }
  std::set<long long> numbers;
  for (const auto& a : m.actions) {
    Rational total = 0;
    for (const auto& t : a.transitions) {
      if (t.target < 0 || t.target >= n) {
        out.push_back("action " + a.name + " targets an unknown state");
        continue;
      }
      if (t.probability <= 0) out.push_back("action " + a.name + " has a non-positive probability");
      total += t.probability;
    }
    if (total != 1) out.push_back("probabilities of action " + a.name + " do not sum to 1");
    if (a.bland <= 0 || !numbers.insert(a.bland).second) out.push_back("bland not bijective");
  }
  // Sink reachable from every state through some actions.
  std::vector<std::vector<int>> pred(n);
  for (const auto& a : m.actions)
    for (const auto& t : a.transitions)
      if (t.target >= 0 && t.target < n) pred[t.target].push_back(a.source);
  std::vector<char> seen(n, 0);
  std::vector<int> stack{m.sink};
  seen[m.sink] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int r : pred[s])
      if (!seen[r]) {
        seen[r] = 1;
        stack.push_back(r);
      }
  }
  for (int s = 0; s < n; ++s)
    if (!seen[s]) out.push_back("sink unreachable from " + m.states[s]);
  return out;
}

MdpEvaluator::MdpEvaluator(const MarkovDecisionProcess& m) : m_(m), available_(m.available()) {
  auto problems = validate_mdp(m);
  if (!problems.empty()) throw MdpError("invalid MDP: " + problems.front());
  for (std::size_t a = 0; a < m.actions.size(); ++a) {
    by_bland_[m.actions[a].bland] = static_cast<int>(a);
  }
  for (const auto& [b, a] : by_bland_)
    if (m.actions[a].source != m.sink) order_.push_back(a);
}

bool MdpEvaluator::weak_unichain(const Policy& p) const {
  const int n = static_cast<int>(m_.states.size());
  if (static_cast<int>(p.choice.size()) != n) return false;
  std::vector<std::vector<int>> pred(n);
  for (int s = 0; s < n; ++s) {
    int a = p.choice[s];
    if (a < 0 || a >= static_cast<int>(m_.actions.size()) || m_.actions[a].source != s) return false;
    for (const auto& t : m_.actions[a].transitions) pred[t.target].push_back(s);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{m_.sink};
  seen[m_.sink] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int r : pred[s])
      if (!seen[r]) {
        seen[r] = 1;
        stack.push_back(r);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

ValueMap MdpEvaluator::values(const Policy& p) const {
  if (!weak_unichain(p)) throw MdpError("values undefined: policy is not weak unichain");
  const int n = static_cast<int>(m_.states.size());
  std::vector<std::vector<int>> succ(n);
  for (int s = 0; s < n; ++s) {
    if (s == m_.sink) continue;
    for (const auto& t : m_.actions[p.choice[s]].transitions) succ[s].push_back(t.target);
  }
  auto comp = strongly_connected_components(succ);
  int ncomp = 0;
  for (int c : comp) ncomp = std::max(ncomp, c + 1);
  std::vector<std::vector<int>> members(ncomp);
  for (int s = 0; s < n; ++s) members[comp[s]].push_back(s);

  ValueMap v;
  v.val.assign(n, Rational(0));
  // Components come out sinks first, so every outside successor is already solved.
  for (int c = 0; c < ncomp; ++c) {
    const auto& block = members[c];
    if (block.size() == 1 && block[0] == m_.sink) continue;
    std::map<int, std::size_t> local;
    for (std::size_t i = 0; i < block.size(); ++i) local[block[i]] = i;
    const std::size_t k = block.size();
    RationalMatrix a(k, RationalVector(k, Rational(0)));
    RationalVector rhs(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i) {
      const auto& act = m_.actions[p.choice[block[i]]];
      a[i][i] += 1;
      rhs[i] = act.reward;
      for (const auto& t : act.transitions) {
        auto it = local.find(t.target);
        if (it != local.end()) a[i][it->second] -= t.probability;
        else rhs[i] += t.probability * v.val[t.target];
      }
    }
    RationalVector x;
    if (k == 1) {
      if (a[0][0] == 0) throw MdpError("values undefined: singular system");
      x = {rhs[0] / a[0][0]};
    } else {
      try {
        x = solve_linear(a, rhs);
      } catch (const SingularMatrix&) {
        throw MdpError("values undefined: singular system");
      }
    }
    for (std::size_t i = 0; i < k; ++i) v.val[block[i]] = x[i];
  }
  return v;
}

Rational MdpEvaluator::reduced_cost(const ValueMap& v, int action) const {
  const auto& a = m_.actions.at(action);
  Rational rc = a.reward - v.val[a.source];
  for (const auto& t : a.transitions) rc += t.probability * v.val[t.target];
  return rc;
}

std::vector<int> MdpEvaluator::improving(const Policy& p, const ValueMap& v) const {
  std::vector<int> out;
  for (int a : order_)
    if (p.choice[m_.actions[a].source] != a && reduced_cost(v, a) > 0) out.push_back(a);
  return out;
}

bool is_weak_unichain_policy(const MarkovDecisionProcess& m, const Policy& p) {
  return MdpEvaluator(m).weak_unichain(p);
}

ValueMap policy_values(const MarkovDecisionProcess& m, const Policy& p) { return MdpEvaluator(m).values(p); }

Rational reduced_cost(const MarkovDecisionProcess& m, const ValueMap& v, int action) {
  const auto& a = m.actions.at(action);
  Rational rc = a.reward - v.val[a.source];
  for (const auto& t : a.transitions) rc += t.probability * v.val[t.target];
  return rc;
}

Rational reduced_cost(const MarkovDecisionProcess& m, const Policy& p, int action) {
  return reduced_cost(m, policy_values(m, p), action);
}

std::vector<int> improving_switches(const MarkovDecisionProcess& m, const Policy& p) {
  MdpEvaluator ev(m);
  return ev.improving(p, ev.values(p));
}

Policy apply_switch(const MarkovDecisionProcess& m, const Policy& p, int action) {
  Policy out = p;
  out.choice.at(m.actions.at(action).source) = action;
  return out;
}

Rational objective(const ValueMap& v) {
  Rational total = 0;
  for (const auto& x : v.val) total += x;
  return total;
}

Rational objective(const MarkovDecisionProcess& m, const Policy& p) { return objective(policy_values(m, p)); }

namespace {

class MdpSource : public RankingSource {
 public:
  MdpSource(const MdpEvaluator& ev, const Policy& p, const ValueMap& v, std::vector<ElementId> improving)
      : ev_(ev), p_(p), v_(v), improving_(std::move(improving)) {}

  const std::vector<ElementId>& improving() const override { return improving_; }
  Rational reduced_cost(ElementId b) const override { return ev_.reduced_cost(v_, ev_.action_of_bland(b)); }
  Rational objective_after(ElementId b) const override {
    return objective(ev_.values(apply_switch(ev_.mdp(), p_, ev_.action_of_bland(b))));
  }

 private:
  const MdpEvaluator& ev_;
  const Policy& p_;
  const ValueMap& v_;
  std::vector<ElementId> improving_;
};

std::vector<long long> policy_state(const Policy& p) { return std::vector<long long>(p.choice.begin(), p.choice.end()); }

}  // namespace

RunTrace policy_iteration(const MarkovDecisionProcess& m, const Policy& p0, const PivotRule& rule,
                          const MdpRunOptions& options) {
  MdpEvaluator ev(m);
  if (!ev.weak_unichain(p0)) throw MdpError("initial policy is not weak unichain");
  RunTrace trace;
  trace.engine = "mdp";
  trace.rule = rule.name;
  trace.element_count = static_cast<long long>(m.non_sink_action_count());

  Policy p = p0;
  ValueMap v = ev.values(p);
  int memory = 1;
  auto summary = [&](const ValueMap& val) {
    return options.record_objective ? format_rational(objective(val)) : std::string();
  };
  auto rc_marks = [&](std::map<std::string, std::string>& marks) {
    if (!options.record_reduced_costs) return;
    std::string row;
    for (int a : ev.bland_order()) {
      if (!row.empty()) row += " ";
      row += format_rational(ev.reduced_cost(v, a));
    }
    marks["rc"] = row;
  };
  while (true) {
    if (options.check_invariants) {
      for (std::size_t s = 0; s < m.states.size(); ++s)
        if (ev.reduced_cost(v, p.choice[s]) != 0) throw MdpError("active action has non-zero reduced cost");
    }
    auto imp = ev.improving(p, v);
    std::map<std::string, std::string> marks;
    rc_marks(marks);
    if (options.observer) options.observer(p, v, imp, marks);
    if (imp.empty() || trace.steps.size() >= options.cap) {
      trace.complete = imp.empty();
      trace.terminal = {hash_state(policy_state(p)), summary(v), policy_state(p), std::move(marks)};
      break;
    }
    std::vector<ElementId> ids;
    for (int a : imp) ids.push_back(m.actions[a].bland);
    MdpSource src(ev, p, v, ids);
    Choice c = choose(rule, src, trace.element_count, memory);

    TraceStep step;
    step.state_hash = hash_state(policy_state(p));
    step.improving = ids;
    step.ranks = std::move(c.ranks);
    step.chosen = c.element;
    step.chosen_rank = c.rank;
    step.memory = memory;
    step.objective = summary(v);
    step.diverged = c.diverged;
    step.marks = std::move(marks);
    trace.steps.push_back(std::move(step));

    Policy next = apply_switch(m, p, ev.action_of_bland(c.element));
    if (!ev.weak_unichain(next)) throw MdpError("switch produced a policy that is not weak unichain");
    ValueMap nv = ev.values(next);
    if (options.check_invariants) {
      for (std::size_t s = 0; s < m.states.size(); ++s)
        if (nv.val[s] < v.val[s]) throw MdpError("value of " + m.states[s] + " decreased");
      if (!(objective(nv) > objective(v))) throw MdpError("objective did not increase");
    }
    p = std::move(next);
    v = std::move(nv);
    memory = c.next_memory;
  }
  return trace;
}

}  // namespace pf
