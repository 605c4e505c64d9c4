#pragma once

#include "pivotforge/pivot_rules.hpp"
#include "pivotforge/rational.hpp"
#include "pivotforge/trace.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pf {

struct Transition {
  int target = 0;
  Rational probability;
};

struct Action {
  int source = 0;
  Rational reward;
  std::vector<Transition> transitions;
  long long bland = 0;
  std::string name;
};

struct MarkovDecisionProcess {
  std::vector<std::string> states;
  int sink = -1;
  std::vector<Action> actions;

  int add_state(std::string name);
  // Adds the sink state and its single zero-reward self-loop action.
  int add_sink(std::string name = "top");
  int add_action(int source, Rational reward, std::vector<Transition> transitions, std::string name = {},
                 long long bland = 0);
  int add_deterministic(int source, int target, Rational reward, std::string name = {});

  std::vector<std::vector<int>> available() const;
  int state_by_name(const std::string& name) const;
  int action_by_name(const std::string& name) const;
  int sink_action() const;
  std::size_t non_sink_action_count() const { return actions.size() - 1; }
};

struct Policy {
  std::vector<int> choice;  // action index per state, the sink included
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct ValueMap {
  RationalVector val;
};

struct MdpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> validate_mdp(const MarkovDecisionProcess& m);
bool is_weak_unichain_policy(const MarkovDecisionProcess& m, const Policy& p);
ValueMap policy_values(const MarkovDecisionProcess& m, const Policy& p);
Rational reduced_cost(const MarkovDecisionProcess& m, const ValueMap& v, int action);
Rational reduced_cost(const MarkovDecisionProcess& m, const Policy& p, int action);
std::vector<int> improving_switches(const MarkovDecisionProcess& m, const Policy& p);
Policy apply_switch(const MarkovDecisionProcess& m, const Policy& p, int action);
Rational objective(const MarkovDecisionProcess& m, const Policy& p);
Rational objective(const ValueMap& v);

// Assigns Bland numbers 1..|A| following the given action order.
void assign_bland(MarkovDecisionProcess& m, const std::vector<int>& order);

using MdpObserver = std::function<void(const Policy&, const ValueMap&, const std::vector<int>& improving,
                                       std::map<std::string, std::string>& marks)>;

struct MdpRunOptions {
  unsigned long long cap = 1ULL << 40;
  bool check_invariants = true;
  bool record_objective = true;
  // Store the reduced cost of every non-sink action (Bland order) in the marks.
  bool record_reduced_costs = false;
  MdpObserver observer;
};

RunTrace policy_iteration(const MarkovDecisionProcess& m, const Policy& p0, const PivotRule& rule,
                          const MdpRunOptions& options = {});

class MdpEvaluator {
 public:
  explicit MdpEvaluator(const MarkovDecisionProcess& m);
  const MarkovDecisionProcess& mdp() const { return m_; }
  ValueMap values(const Policy& p) const;
  bool weak_unichain(const Policy& p) const;
  Rational reduced_cost(const ValueMap& v, int action) const;
  std::vector<int> improving(const Policy& p, const ValueMap& v) const;
  int action_of_bland(long long b) const { return by_bland_.at(b); }
  const std::vector<int>& bland_order() const { return order_; }

 private:
  const MarkovDecisionProcess& m_;
  std::vector<std::vector<int>> available_;
  std::map<long long, int> by_bland_;
  std::vector<int> order_;  // non-sink actions by ascending Bland number
};

std::string mdp_to_json(const MarkovDecisionProcess& m, const Policy* initial = nullptr,
                        const std::map<std::string, std::string>& metadata = {});
MarkovDecisionProcess mdp_from_json(const std::string& text, std::optional<Policy>* initial = nullptr);

}  // namespace pf
