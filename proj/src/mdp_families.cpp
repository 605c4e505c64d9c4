#include "pivotforge/mdp_families.hpp"

#include "pivotforge/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pf {

namespace {

Rational power(const Rational& base, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::string alpha(int l) { return "a" + std::to_string(l); }
std::string beta(int l) { return "b" + std::to_string(l); }

Policy policy_from(const MarkovDecisionProcess& m, const std::map<int, int>& chosen) {
  Policy p;
  auto avail = m.available();
  p.choice.resize(m.states.size());
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    auto it = chosen.find(static_cast<int>(s));
    if (it != chosen.end()) {
      p.choice[s] = it->second;
    } else {
      if (avail[s].size() != 1) throw MdpError("no initial action for " + m.states[s]);
      p.choice[s] = avail[s][0];
    }
  }
  return p;
}

int single_target(const Action& a) { return a.transitions.front().target; }

}  // namespace

MdpInstance gen_mdp_counter(int levels, const Rational& eps) {
  if (levels < 1) throw MdpError("counter needs at least one level");
  if (eps < 0 || eps >= 1) throw MdpError("eps must lie in [0, 1)");
  const int L = levels;
  MarkovDecisionProcess m;
  std::vector<int> a(L + 2), b(L + 2);
  for (int l = 1; l <= L + 1; ++l) {
    a[l] = m.add_state(alpha(l));
    b[l] = m.add_state(beta(l));
  }
  int top = m.add_sink("top");
  const Rational base = L;

  auto add = [&](int src, int dst, const Rational& reward, bool randomized) {
    std::string name = m.states[src] + ">" + m.states[dst];
    if (randomized && eps > 0)
      return m.add_action(src, reward, {{dst, 1 - eps}, {top, eps}}, name);
    return m.add_deterministic(src, dst, reward, name);
  };

  std::vector<int> to_a(L + 2), to_b(L + 2), from_b_to_a(L + 2), from_b_to_b(L + 2);
  std::map<int, int> init;
  for (int l = 1; l <= L; ++l) {
    Rational r = power(base, l);
    to_a[l] = add(a[l], a[l + 1], 0, true);
    to_b[l] = add(a[l], b[l + 1], r, true);
    from_b_to_a[l] = add(b[l], a[l + 1], 0, false);
    from_b_to_b[l] = add(b[l], b[l + 1], r, false);
    init[a[l]] = to_a[l];
    init[b[l]] = from_b_to_b[l];
  }
  int last_a = add(a[L + 1], top, power(base, L + 1), true);
  int last_b = add(b[L + 1], top, 0, false);

  std::vector<int> order{m.sink_action(), last_b, last_a};
  for (int l = L; l >= 1; --l) {
    order.push_back(from_b_to_a[l]);
    order.push_back(from_b_to_b[l]);
    order.push_back(to_a[l]);
    order.push_back(to_b[l]);
  }
  assign_bland(m, order);

  MdpInstance inst{m, policy_from(m, init), {}};
  inst.metadata["family"] = "mdp-counter";
  inst.metadata["L"] = std::to_string(L);
  inst.metadata["eps"] = format_rational(eps);
  return inst;
}

std::optional<long long> canonical_index(const MdpInstance& unperturbed, int levels, const Policy& p) {
  const auto& m = unperturbed.mdp;
  MdpEvaluator ev(m);
  if (!ev.weak_unichain(p)) return std::nullopt;
  auto v = ev.values(p);
  const Rational base = levels;
  long long b = 0;
  for (int l = 1; l <= levels; ++l) {
    int sa = m.state_by_name(alpha(l)), sb = m.state_by_name(beta(l));
    int na = m.state_by_name(alpha(l + 1)), nb = m.state_by_name(beta(l + 1));
    const Action& act = m.actions[p.choice[sa]];
    int ta = single_target(act);
    int tb = single_target(m.actions[p.choice[sb]]);
    if (ta == tb) b |= (1LL << (l - 1));
    Rational best = std::max(v.val[na], power(base, l) + v.val[nb]);
    if (act.reward + v.val[ta] != best) return std::nullopt;
  }
  return b;
}

Rational default_counter_epsilon(int levels) {
  auto inst = gen_mdp_counter(levels, 0);
  Rational biggest = 1;
  MdpRunOptions opt;
  opt.record_objective = false;
  opt.observer = [&](const Policy&, const ValueMap& v, const std::vector<int>&, std::map<std::string, std::string>&) {
    for (const auto& x : v.val) biggest = std::max(biggest, Rational(abs(x)));
  };
  policy_iteration(inst.mdp, inst.initial, f_rule(pick_first()), opt);
  return 1 / (biggest * 1024);
}

MdpInstance gen_mdp_copied(const MdpInstance& base, int k) {
  if (k < 1) throw MdpError("copy count must be positive");
  const auto& src = base.mdp;
  MarkovDecisionProcess m;
  for (std::size_t s = 0; s < src.states.size(); ++s)
    if (static_cast<int>(s) != src.sink) m.add_state(src.states[s]);
  int top = m.add_sink(src.states[src.sink]);
  auto map_state = [&](int s) { return s == src.sink ? top : m.state_by_name(src.states[s]); };

  std::vector<int> by_bland;
  for (std::size_t a = 0; a < src.actions.size(); ++a)
    if (static_cast<int>(a) != src.sink_action()) by_bland.push_back(static_cast<int>(a));
  std::sort(by_bland.begin(), by_bland.end(),
            [&](int x, int y) { return src.actions[x].bland < src.actions[y].bland; });

  std::vector<int> order{m.sink_action()}, tail;
  std::map<int, int> first_copy;
  for (int a : by_bland) {
    const Action& act = src.actions[a];
    std::string label = act.name.empty() ? std::to_string(a) : act.name;
    for (int j = 1; j <= k; ++j) {
      int c = m.add_state("c" + std::to_string(j) + ":" + label);
      int in = m.add_deterministic(map_state(act.source), c, act.reward, label + "#" + std::to_string(j));
      std::vector<Transition> out;
      for (const auto& t : act.transitions) out.push_back({map_state(t.target), t.probability});
      tail.push_back(m.add_action(c, 0, out, "c" + std::to_string(j) + ":" + label + ">"));
      order.push_back(in);
      if (j == 1) first_copy[a] = in;
    }
  }
  order.insert(order.end(), tail.begin(), tail.end());
  assign_bland(m, order);

  std::map<int, int> init;
  for (std::size_t s = 0; s < src.states.size(); ++s) {
    if (static_cast<int>(s) == src.sink) continue;
    init[map_state(static_cast<int>(s))] = first_copy.at(base.initial.choice[s]);
  }
  MdpInstance inst{m, policy_from(m, init), base.metadata};
  inst.metadata["family"] = "mdp-copied";
  inst.metadata["copies"] = std::to_string(k);
  return inst;
}

MdpInstance gen_mdp_delta(int levels, long long scale) {
  if (levels < 1) throw MdpError("counter needs at least one level");
  if (scale < 2) throw MdpError("scale must be at least 2");
  const int L = levels;
  const Rational inv = Rational(1) / scale;
  MarkovDecisionProcess m;
  std::vector<int> a(L + 2), b(L + 2);
  for (int l = 1; l <= L + 1; ++l) {
    a[l] = m.add_state(alpha(l));
    b[l] = m.add_state(beta(l));
  }
  int top = m.add_sink("top");

  std::vector<int> order{m.sink_action()}, tail;
  std::map<int, int> init;
  for (int l = 1; l <= L; ++l) {
    for (int x : {a[l], b[l]}) {
      // alpha gates open wider than beta gates on the same level
      Rational p = power(inv, x == a[l] ? 2 * l - 1 : 2 * l);
      for (int y : {a[l + 1], b[l + 1]}) {
        std::string pair = m.states[x] + ">" + m.states[y];
        int d = m.add_state("d:" + pair);
        int e = m.add_state("e:" + pair);
        Rational reward = y == b[l + 1] ? power(Rational(L), l) : Rational(0);
        int entry = m.add_deterministic(x, d, 0, "enter:" + pair);
        int back = m.add_deterministic(d, x, 0, "back:" + pair);
        int gate = m.add_action(d, 0, {{e, p}, {x, 1 - p}}, "gate:" + pair);
        tail.push_back(m.add_deterministic(e, y, reward, "exit:" + pair));
        order.insert(order.end(), {entry, back, gate});
        // initially x enters the gate of its chain successor; other gates point back
        bool active = (x == a[l] && y == a[l + 1]) || (x == b[l] && y == b[l + 1]);
        if (active) init[x] = entry;
        init[d] = active ? gate : back;
      }
    }
  }
  tail.push_back(m.add_deterministic(a[L + 1], top, power(Rational(L), L + 1), m.states[a[L + 1]] + ">top"));
  tail.push_back(m.add_deterministic(b[L + 1], top, 0, m.states[b[L + 1]] + ">top"));
  order.insert(order.end(), tail.begin(), tail.end());
  assign_bland(m, order);

  MdpInstance inst{m, policy_from(m, init), {}};
  inst.metadata["family"] = "mdp-delta";
  inst.metadata["L"] = std::to_string(L);
  inst.metadata["M"] = std::to_string(scale);
  return inst;
}

DeltaKind delta_kind(const Action& a) {
  auto starts = [&](const char* p) { return a.name.rfind(p, 0) == 0; };
  if (starts("enter:")) return DeltaKind::Entry;
  if (starts("back:")) return DeltaKind::Back;
  if (starts("gate:")) return DeltaKind::Gate;
  if (starts("exit:")) return DeltaKind::Exit;
  return DeltaKind::Other;
}

DeltaAudit audit_delta(const MdpInstance& inst, unsigned long long cap) {
  DeltaAudit out;
  const auto& m = inst.mdp;
  MdpEvaluator ev(m);
  MdpRunOptions opt;
  opt.cap = cap;
  opt.record_objective = false;
  auto trace = policy_iteration(m, inst.initial, f_rule(pick_last()), opt);
  out.iterations = static_cast<long long>(trace.iterations());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& st = trace.steps[i];
    auto fail = [&](const std::string& why) {
      if (out.first_failure < 0) {
        out.first_failure = static_cast<long long>(i);
        out.note = why;
      }
    };
    if (st.diverged) {
      out.agreement = false;
      fail("rankings disagree");
    }
    for (std::size_t pos = 0; pos < st.improving.size(); ++pos) {
      if (delta_kind(m.actions[ev.action_of_bland(st.improving[pos])]) != DeltaKind::Entry) continue;
      std::vector<ElementId> top{static_cast<ElementId>(pos + 1)};
      for (const auto& r : st.ranks)
        if (r.tiers.empty() || r.tiers.back() != top) {
          out.entry_most_preferred = false;
          fail("improving entry switch is not most preferred");
        }
    }
    if (delta_kind(m.actions[ev.action_of_bland(st.chosen)]) == DeltaKind::Entry) ++out.counter_advances;
  }
  if (!trace.complete) {
    out.agreement = false;
    out.note = "iteration cap reached";
  }
  return out;
}

long long find_delta_scale(int levels, int max_doublings) {
  long long scale = 2;
  for (int i = 0; i <= max_doublings; ++i, scale *= 2) {
    auto a = audit_delta(gen_mdp_delta(levels, scale));
    if (a.agreement && a.entry_most_preferred) return scale;
  }
  throw MdpError("no scale up to 2^" + std::to_string(max_doublings + 1) + " passes the agreement audit");
}

std::optional<int> gamma_levels(long long f_m) {
  // the delta counter on L levels has 16L + 3 actions
  if (f_m + 1 < 19) return std::nullopt;
  return static_cast<int>((f_m + 1 - 3) / 16);
}

namespace {

struct Bounds {
  Rational lower, upper;
  std::string method;
};

// Smallest positive reduced cost, and the largest |rc| or single-state value change of one switch,
// over every weak unichain policy.
Bounds enumerate_bounds(const MarkovDecisionProcess& m) {
  MdpEvaluator ev(m);
  auto avail = m.available();
  Policy p;
  p.choice.resize(m.states.size());
  for (std::size_t s = 0; s < avail.size(); ++s) p.choice[s] = avail[s][0];
  std::vector<std::size_t> digit(m.states.size(), 0);
  Bounds b;
  bool have_lower = false;
  b.upper = 0;
  while (true) {
    if (ev.weak_unichain(p)) {
      auto v = ev.values(p);
      for (std::size_t s = 0; s < avail.size(); ++s)
        for (int act : avail[s]) {
          if (act == p.choice[s]) continue;
          Rational rc = ev.reduced_cost(v, act);
          if (rc > 0 && (!have_lower || rc < b.lower)) {
            b.lower = rc;
            have_lower = true;
          }
          b.upper = std::max(b.upper, Rational(abs(rc)));
          Policy q = apply_switch(m, p, act);
          if (!ev.weak_unichain(q)) continue;
          auto w = ev.values(q);
          for (std::size_t t = 0; t < w.val.size(); ++t) b.upper = std::max(b.upper, Rational(abs(w.val[t] - v.val[t])));
        }
    }
    std::size_t s = 0;
    for (; s < avail.size(); ++s) {
      if (++digit[s] < avail[s].size()) {
        p.choice[s] = avail[s][digit[s]];
        break;
      }
      digit[s] = 0;
      p.choice[s] = avail[s][0];
    }
    if (s == avail.size()) break;
  }
  if (!have_lower) b.lower = 1;
  b.method = "enumeration";
  return b;
}

}  // namespace

GammaInstance gen_mdp_gamma(int levels, long long scale, const std::function<long long(long long)>& f,
                            long long m_i, long long counter_scale) {
  if (scale < 2) throw ConstructionError("scale must be at least 2");
  const long long f_m = f(m_i);
  if (f_m < 1 || f_m > m_i) throw ConstructionError("f(m_i) must lie in [1, m_i]");
  GammaInstance g;
  if (counter_scale == 0) counter_scale = find_delta_scale(levels);
  g.counter = gen_mdp_delta(levels, counter_scale);
  auto& c = g.counter.mdp;
  long long have = static_cast<long long>(c.actions.size());
  if (have > f_m + 1) throw ConstructionError("parameter window empty: counter has more than f(m_i) + 1 actions");

  // policy count decides between enumeration and the analytic bounds
  double log2_policies = 0;
  for (const auto& av : c.available()) log2_policies += std::log2(static_cast<double>(av.size()));
  Bounds bounds;
  if (log2_policies <= 12.0 + 1e-9) {
    bounds = enumerate_bounds(c);
  } else {
    // values are integral on every visited policy, so positive reduced costs are multiples of a gate probability
    bounds.lower = power(Rational(1) / counter_scale, 2 * levels);
    // rewards are nonnegative and each is collected at most once, so values stay in [0, sum of rewards]
    bounds.upper = 0;
    for (const auto& a : c.actions) bounds.upper += abs(a.reward);
    bounds.method = "analytic";
  }

  // pad with single-action leaves up to f(m_i) + 1 actions
  for (long long j = 1; have < f_m + 1; ++j, ++have) {
    int s = c.add_state("pad" + std::to_string(j));
    int a = c.add_deterministic(s, c.sink, 0, "pad" + std::to_string(j) + ">top");
    c.actions[a].bland = have + 1;
    g.counter.initial.choice.push_back(a);
  }

  // every counter state and both wrapper states of each action may move by the per-state bound
  bounds.upper *= static_cast<long long>(c.states.size() - 1) + 2 * f_m;

  std::vector<int> counter_order;
  for (std::size_t a = 0; a < c.actions.size(); ++a)
    if (static_cast<int>(a) != c.sink_action()) counter_order.push_back(static_cast<int>(a));
  std::sort(counter_order.begin(), counter_order.end(),
            [&](int x, int y) { return c.actions[x].bland < c.actions[y].bland; });

  MarkovDecisionProcess m;
  for (std::size_t s = 0; s < c.states.size(); ++s)
    if (static_cast<int>(s) != c.sink) m.add_state(c.states[s]);
  int top = m.add_sink(c.states[c.sink]);
  auto map_state = [&](int s) { return s == c.sink ? top : m.state_by_name(c.states[s]); };

  const Rational p1 = bounds.lower / (2 * (bounds.lower + bounds.upper));
  const Rational q1 = p1 * bounds.lower / 2;
  const Rational inv = Rational(1) / scale;
  std::vector<int> rest;
  std::map<int, int> init;
  Rational shrink = 1;
  std::map<int, int> entry_of;
  for (int a : counter_order) {
    const Action& act = c.actions[a];
    int x = map_state(act.source);
    int v = m.add_state("v:" + act.name);
    int u = m.add_state("u:" + act.name);
    int entry = m.add_deterministic(x, v, 0, "to:" + act.name);
    rest.push_back(m.add_deterministic(u, v, 0, "u:" + act.name + ">v"));
    std::vector<Transition> out;
    for (const auto& t : act.transitions) out.push_back({map_state(t.target), t.probability});
    rest.push_back(m.add_action(v, act.reward, out, "v:" + act.name + ">"));
    Rational p = p1 * shrink, q = q1 * shrink;
    int wrap = m.add_action(u, q, {{x, p}, {v, 1 - p}}, "wrap:" + act.name);
    shrink *= inv;
    g.s2.push_back(entry);
    g.s2_source.push_back(a);
    g.s3.push_back(wrap);
    entry_of[a] = entry;
    init[u] = rest[rest.size() - 2];
  }
  for (std::size_t s = 0; s < c.states.size(); ++s) {
    if (static_cast<int>(s) == c.sink) continue;
    init[map_state(static_cast<int>(s))] = entry_of.at(g.counter.initial.choice[s]);
  }

  int g0 = m.add_state("g0");
  rest.push_back(m.add_deterministic(g0, top, 0, "g0>top"));
  const long long decoys = m_i - f_m;
  std::vector<int> decoy(decoys + 1);
  for (long long k = 1; k <= decoys; ++k) {
    int gk = m.add_state("g" + std::to_string(k));
    int stay = m.add_deterministic(gk, top, 0, "g" + std::to_string(k) + ">top");
    rest.push_back(stay);
    init[gk] = stay;
    decoy[k] = m.add_deterministic(gk, g0, bounds.upper + k, "g" + std::to_string(k) + ">g0");
  }
  for (long long k = decoys; k >= 1; --k) g.s1.push_back(decoy[k]);

  std::vector<int> order{m.sink_action()};
  order.insert(order.end(), g.s1.begin(), g.s1.end());
  order.insert(order.end(), g.s2.begin(), g.s2.end());
  order.insert(order.end(), g.s3.begin(), g.s3.end());
  order.insert(order.end(), rest.begin(), rest.end());
  assign_bland(m, order);

  g.params = {levels, scale, counter_scale, m_i, f_m, bounds.lower, bounds.upper, bounds.method};
  g.inst = {m, policy_from(m, init), {}};
  auto& md = g.inst.metadata;
  md["family"] = "mdp-gamma";
  md["L"] = std::to_string(levels);
  md["M"] = std::to_string(scale);
  md["counter_M"] = std::to_string(counter_scale);
  md["m_i"] = std::to_string(m_i);
  md["f_m"] = std::to_string(f_m);
  md["L_bound"] = format_rational(bounds.lower);
  md["U_bound"] = format_rational(bounds.upper);
  md["bounds"] = bounds.method;
  return g;
}

GammaAudit audit_gamma(const GammaInstance& g, const RankPicker& f, unsigned long long cap) {
  GammaAudit out;
  const auto& m = g.inst.mdp;
  MdpEvaluator ev(m);

  {
    auto v = ev.values(g.inst.initial);
    for (std::size_t i = 0; i < g.s1.size(); ++i) {
      long long k = static_cast<long long>(g.s1.size() - i);
      if (ev.reduced_cost(v, g.s1[i]) != g.params.upper + k) out.decoy_ok = false;
    }
  }

  std::set<long long> s2_bland;
  std::map<long long, int> source_of;
  for (std::size_t i = 0; i < g.s2.size(); ++i) {
    s2_bland.insert(m.actions[g.s2[i]].bland);
    source_of[m.actions[g.s2[i]].bland] = g.s2_source[i];
  }

  MdpRunOptions opt;
  opt.cap = cap;
  opt.record_objective = false;
  auto trace = policy_iteration(m, g.inst.initial, f_rule(f), opt);
  out.iterations = static_cast<long long>(trace.iterations());

  MdpRunOptions copt;
  copt.record_objective = false;
  auto reference = policy_iteration(g.counter.mdp, g.counter.initial, f_rule(pick_last()), copt);
  MdpEvaluator cev(g.counter.mdp);

  for (const auto& st : trace.steps) {
    auto first_s2 = std::find_if(st.improving.begin(), st.improving.end(),
                                 [&](ElementId e) { return s2_bland.count(e) > 0; });
    if (first_s2 == st.improving.end()) break;
    std::size_t i = static_cast<std::size_t>(out.phase_length);
    ++out.phase_length;
    auto flag = [&](bool& bit, const std::string& why) {
      if (bit && out.note.empty()) out.note = "step " + std::to_string(i) + ": " + why;
      bit = false;
    };
    if (static_cast<long long>(st.improving.size()) != g.params.m_i) flag(out.count_ok, "improving count differs");
    if (st.chosen != *first_s2) flag(out.pick_ok, "pick is not the most-preferred counter switch");
    if (st.diverged) flag(out.agreement, "rankings disagree");
    if (i >= reference.steps.size() ||
        cev.action_of_bland(reference.steps[i].chosen) != source_of.at(st.chosen))
      flag(out.mimic_ok, "switch differs from the embedded counter run");
  }
  if (static_cast<std::size_t>(out.phase_length) != reference.steps.size()) {
    if (out.mimic_ok && out.note.empty()) out.note = "phase length differs from the embedded counter run";
    out.mimic_ok = false;
  }
  return out;
}

long long gamma_scale_floor(const GammaParams& p) {
  // wrapper reduced costs are q_k + p_k |rc|, so consecutive ones separate once scale > 1 + 2U/L
  Rational need = 1 + 2 * p.upper / p.lower;
  long long scale = 2;
  while (Rational(scale) <= need) scale *= 2;
  return scale;
}

long long find_gamma_scale(int levels, const std::function<long long(long long)>& f, long long m_i,
                           const RankPicker& pick, int max_doublings) {
  const long long counter_scale = find_delta_scale(levels);
  long long scale = gamma_scale_floor(gen_mdp_gamma(levels, 2, f, m_i, counter_scale).params);
  for (int i = 0; i <= max_doublings; ++i, scale *= 2) {
    auto a = audit_gamma(gen_mdp_gamma(levels, scale, f, m_i, counter_scale), pick);
    if (a.count_ok && a.pick_ok && a.mimic_ok && a.agreement && a.decoy_ok) return scale;
  }
  throw MdpError("no scale passes the gamma audits");
}

}  // namespace pf
