#include "pivotforge/experiment.hpp"

#include "pivotforge/reductions.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace pf {

using json = nlohmann::json;

const std::vector<std::string>& known_audits() {
  static const std::vector<std::string> names{"alternation", "agreement", "constant-improving-count", "lockstep",
                                              "canonical-ladder"};
  return names;
}

const std::vector<std::string>& known_families() {
  static const std::vector<std::string> names{"counter-parity", "adversarial-parity", "mdp-counter", "mdp-copied",
                                              "mdp-delta",      "mdp-gamma",          "mdp-counter-lp"};
  return names;
}

std::vector<ExperimentSpec> parse_experiments(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw SpecError("config must be a JSON array of experiment specs");
  std::vector<ExperimentSpec> out;
  for (const auto& e : j) {
    try {
      ExperimentSpec s;
      s.family = e.value("family", std::string());
      s.file = e.value("file", std::string());
      if (s.family.empty() == s.file.empty()) throw SpecError("each spec needs exactly one of family or file");
      if (e.contains("params")) s.params = e.at("params").dump();
      if (e.contains("rule")) s.rule = e.at("rule").dump();
      if (e.contains("initial")) s.initial = e.at("initial").get<std::vector<long long>>();
      if (e.contains("cap")) s.cap = e.at("cap").get<unsigned long long>();
      if (e.contains("audits")) s.audits = e.at("audits").get<std::vector<std::string>>();
      for (const auto& a : s.audits)
        if (std::find(known_audits().begin(), known_audits().end(), a) == known_audits().end())
          throw SpecError("unknown audit: " + a);
      parse_rule(s.rule);
      out.push_back(std::move(s));
    } catch (const json::exception& ex) {
      throw SpecError(std::string("malformed spec: ") + ex.what());
    } catch (const RuleConfigError& ex) {
      throw SpecError(ex.what());
    }
  }
  return out;
}

namespace {

Rational rational_param(const json& p, const char* key, const Rational& fallback) {
  if (!p.contains(key)) return fallback;
  const auto& v = p.at(key);
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) return parse_rational(v.get<std::string>());
  throw SpecError(std::string("parameter ") + key + " must be an integer or a rational string");
}

long long int_param(const json& p, const char* key) {
  if (!p.contains(key)) throw SpecError(std::string("missing parameter ") + key);
  return p.at(key).get<long long>();
}

Rational counter_eps(const json& p, int levels) {
  if (!p.contains("eps") || (p.at("eps").is_string() && p.at("eps").get<std::string>() == "default"))
    return default_counter_epsilon(levels);
  return rational_param(p, "eps", 0);
}

void fill_mdp(LoadedInstance& out, MdpInstance inst) {
  out.kind = InstanceKind::Mdp;
  out.mdp = std::move(inst.mdp);
  out.policy = std::move(inst.initial);
  out.metadata = std::move(inst.metadata);
  out.size = static_cast<long long>(out.mdp.non_sink_action_count());
}

}  // namespace

LoadedInstance generate_instance(const std::string& family, const std::string& params_json,
                                 const std::optional<IndexSelector>& selector) {
  json p = json::parse(params_json.empty() ? std::string("{}") : params_json);
  LoadedInstance out;
  out.family = family;
  out.params = p.dump();
  try {
    if (family == "counter-parity") {
      long long n = int_param(p, "n");
      if (n < 1 || n > 60) throw ConstructionError("n must lie in [1, 60]");
      auto g = gen_counter_game(static_cast<int>(n));
      out.kind = InstanceKind::Parity;
      out.game = std::move(g.game);
      out.strategy = std::move(g.initial);
      out.metadata = std::move(g.metadata);
      out.n_or_l = n;
      out.size = static_cast<long long>(out.game.player0_edge_count());
    } else if (family == "adversarial-parity") {
      if (!selector) throw SpecError("adversarial-parity needs an index-selector rule");
      long long m_i = int_param(p, "m_i");
      long long l_i = p.value("l_i", static_cast<long long>(selector->memory_bound));
      auto a = build_adversarial_parity(*selector, m_i, static_cast<int>(l_i), p.value("verify", true));
      const auto& chosen = p.value("transformed", true) ? a.game : a.raw;
      out.kind = InstanceKind::Parity;
      out.game = chosen.game;
      out.strategy = chosen.initial;
      out.metadata = chosen.metadata;
      out.n_or_l = m_i;
      out.size = static_cast<long long>(out.game.player0_edge_count());
      out.adversarial = std::move(a);
    } else if (family == "mdp-counter" || family == "mdp-counter-lp") {
      int L = static_cast<int>(int_param(p, "L"));
      fill_mdp(out, gen_mdp_counter(L, counter_eps(p, L)));
      out.n_or_l = L;
      if (family == "mdp-counter-lp") {
        auto [lp, map] = mdp_to_lp(out.mdp);
        out.kind = InstanceKind::Lp;
        out.basis = map.basis_of(out.policy);
        out.lp = std::move(lp);
        out.size = static_cast<long long>(out.lp.cols());
        out.metadata["family"] = family;
      }
    } else if (family == "mdp-copied") {
      int L = static_cast<int>(int_param(p, "L"));
      int k = static_cast<int>(int_param(p, "k"));
      fill_mdp(out, gen_mdp_copied(gen_mdp_counter(L, counter_eps(p, L)), k));
      out.n_or_l = L;
    } else if (family == "mdp-delta") {
      int L = static_cast<int>(int_param(p, "L"));
      long long M = p.value("M", 0LL);
      if (M == 0) M = find_delta_scale(L);
      fill_mdp(out, gen_mdp_delta(L, M));
      out.n_or_l = L;
    } else if (family == "mdp-gamma") {
      long long m_i = int_param(p, "m_i");
      RankPicker picker = picker_by_name(p.value("f", std::string("half-ceil")));
      auto f = [picker](long long k) { return static_cast<long long>(picker.f(static_cast<int>(k))); };
      auto levels = p.contains("L") ? std::optional<int>(p.at("L").get<int>()) : gamma_levels(f(m_i));
      if (!levels || *levels < 1) throw ConstructionError("parameter window empty: f(m_i) is too small for a counter");
      long long counter_M = p.value("counter_M", 0LL);
      if (counter_M == 0) counter_M = find_delta_scale(*levels);
      long long M = p.value("M", 0LL);
      if (M == 0) M = find_gamma_scale(*levels, f, m_i, picker);
      auto g = gen_mdp_gamma(*levels, M, f, m_i, counter_M);
      fill_mdp(out, g.inst);
      out.n_or_l = *levels;
      out.gamma = std::move(g);
    } else {
      throw SpecError("unknown family: " + family);
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad parameters: ") + e.what());
  }
  return out;
}

LoadedInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(path + " is not valid JSON: " + e.what());
  }
  LoadedInstance out;
  if (j.contains("metadata")) out.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  out.family = out.metadata.count("family") ? out.metadata.at("family") : std::string("file");
  out.params = json{{"file", path}}.dump();
  for (const char* key : {"n", "L", "m_i"})
    if (out.metadata.count(key)) out.n_or_l = std::stoll(out.metadata.at(key));
  if (j.contains("priorities")) {
    std::optional<Strategy> init;
    out.kind = InstanceKind::Parity;
    out.game = game_from_json(text, &init);
    if (init) out.strategy = *init;
    out.size = static_cast<long long>(out.game.player0_edge_count());
  } else if (j.contains("actions")) {
    std::optional<Policy> init;
    out.kind = InstanceKind::Mdp;
    out.mdp = mdp_from_json(text, &init);
    if (init) out.policy = *init;
    out.size = static_cast<long long>(out.mdp.non_sink_action_count());
  } else if (j.contains("c")) {
    std::optional<Basis> init;
    out.kind = InstanceKind::Lp;
    out.lp = lp_from_json(text, &init);
    if (init) out.basis = *init;
    out.size = static_cast<long long>(out.lp.cols());
  } else {
    throw SpecError(path + " is not a game, MDP or LP file");
  }
  return out;
}

std::string instance_to_json(const LoadedInstance& inst) {
  switch (inst.kind) {
    case InstanceKind::Parity:
      return game_to_json(inst.game, &inst.strategy, inst.metadata);
    case InstanceKind::Mdp:
      return mdp_to_json(inst.mdp, &inst.policy, inst.metadata);
    case InstanceKind::Lp: {
      json j = json::parse(lp_to_json(inst.lp, &inst.basis));
      if (!inst.metadata.empty()) j["metadata"] = inst.metadata;
      return j.dump(1) + "\n";
    }
  }
  return {};
}

namespace {

bool wants(const ExperimentSpec& s, const std::string& audit) {
  return std::find(s.audits.begin(), s.audits.end(), audit) != s.audits.end();
}

// All three MDP rankings of the improving set, compared directly.
bool mdp_rankings_agree(const MdpEvaluator& ev, const Policy& p, const ValueMap& v, const std::vector<int>& imp) {
  const auto& m = ev.mdp();
  std::vector<ElementId> ids;
  std::map<ElementId, Rational> rc, after;
  for (int a : imp) {
    ElementId id = m.actions[a].bland;
    ids.push_back(id);
    rc[id] = ev.reduced_cost(v, a);
    after[id] = objective(ev.values(apply_switch(m, p, a)));
  }
  std::sort(ids.begin(), ids.end());
  return rankings_agree({rank_bland(ids), tier_by_score(ids, [&](ElementId e) { return rc.at(e); }),
                         tier_by_score(ids, [&](ElementId e) { return after.at(e); })});
}

void apply_initial(LoadedInstance& inst, const std::vector<long long>& init) {
  switch (inst.kind) {
    case InstanceKind::Parity:
      inst.strategy.choice.assign(init.begin(), init.end());
      break;
    case InstanceKind::Mdp:
      inst.policy.choice.assign(init.begin(), init.end());
      break;
    case InstanceKind::Lp:
      inst.basis.indices.clear();
      for (long long k : init) inst.basis.indices.push_back(static_cast<int>(k) - 1);
      std::sort(inst.basis.indices.begin(), inst.basis.indices.end());
      break;
  }
}

// Tags the counting phase and the improving count it must hold.
void mark_counting_phase(const LoadedInstance& inst, RunTrace& trace) {
  long long target = trace.steps.empty() ? 0 : static_cast<long long>(trace.steps.front().improving.size());
  std::size_t phase = trace.steps.size();
  if (inst.adversarial) {
    target = inst.adversarial->improving_target;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& role = inst.adversarial->role.at(trace.steps[i].chosen - 1);
      if (role == "control" || role == "anchor" || role == "filler" || role == "double") {
        phase = i + 1;
        break;
      }
    }
  } else if (inst.gamma) {
    target = inst.gamma->params.m_i;
    std::set<long long> s2;
    for (int a : inst.gamma->s2) s2.insert(inst.mdp.actions[a].bland);
    phase = 0;
    while (phase < trace.steps.size() &&
           std::any_of(trace.steps[phase].improving.begin(), trace.steps[phase].improving.end(),
                       [&](ElementId e) { return s2.count(e) > 0; }))
      ++phase;
  }
  for (std::size_t i = 0; i < phase; ++i) trace.steps[i].marks["phase"] = "count";
  trace.terminal.marks["count_target"] = std::to_string(target);
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec) {
  RunResult r;
  r.spec = spec;
  ParsedRule parsed = parse_rule(spec.rule);
  r.rule_name = parsed.rule.name;
  r.instance = spec.file.empty() ? generate_instance(spec.family, spec.params, parsed.selector)
                                 : load_instance_file(spec.file);
  LoadedInstance& inst = r.instance;
  if (spec.initial) apply_initial(inst, *spec.initial);

  switch (inst.kind) {
    case InstanceKind::Parity: {
      ParityRunOptions opt;
      opt.cap = spec.cap;
      int a1 = inst.game.vertex_by_name("a1"), b1 = inst.game.vertex_by_name("b1");
      if (wants(spec, "alternation") && a1 >= 0 && b1 >= 0)
        opt.observer = [&](const Strategy&, const ValuationMap& v, const std::vector<int>&,
                           std::map<std::string, std::string>& marks) {
          const auto& x = v.score[a1];
          const auto& y = v.score[b1];
          marks["a1_vs_b1"] = x < y ? "<" : (x > y ? ">" : "=");
        };
      r.trace = strategy_improvement(inst.game, inst.strategy, parsed.rule, opt);
      break;
    }
    case InstanceKind::Mdp: {
      MdpEvaluator ev(inst.mdp);
      MdpRunOptions opt;
      opt.cap = spec.cap;
      std::optional<MdpInstance> unperturbed;
      int levels = 0;
      if (wants(spec, "canonical-ladder") && inst.metadata.count("family") &&
          inst.metadata.at("family") == "mdp-counter") {
        levels = std::stoi(inst.metadata.at("L"));
        unperturbed = gen_mdp_counter(levels, 0);
      }
      bool agreement = wants(spec, "agreement");
      opt.observer = [&](const Policy& p, const ValueMap& v, const std::vector<int>& imp,
                         std::map<std::string, std::string>& marks) {
        if (agreement && !imp.empty()) marks["agree"] = mdp_rankings_agree(ev, p, v, imp) ? "1" : "0";
        if (unperturbed) {
          auto b = canonical_index(*unperturbed, levels, p);
          if (b) marks["canonical"] = std::to_string(*b);
        }
      };
      r.trace = policy_iteration(inst.mdp, inst.policy, parsed.rule, opt);
      if (unperturbed) r.trace.terminal.marks["levels"] = std::to_string(levels);
      if (wants(spec, "lockstep")) {
        auto rep = lockstep_check(inst.mdp, parsed.rule, inst.policy, spec.cap);
        r.trace.terminal.marks["lockstep"] =
            rep.ok ? "pass" : "fail@" + std::to_string(rep.first_divergence.value_or(0)) + " " + rep.note;
      }
      break;
    }
    case InstanceKind::Lp: {
      SimplexRunOptions opt;
      opt.cap = spec.cap;
      r.trace = simplex(inst.lp, inst.basis, parsed.rule, opt);
      break;
    }
  }
  if (wants(spec, "constant-improving-count")) mark_counting_phase(inst, r.trace);
  r.optimal = r.trace.complete;
  r.cap_exceeded = !r.trace.complete;
  r.audits = audit_trace(r.trace, spec.audits);
  return r;
}

std::vector<AuditResult> audit_trace(const RunTrace& trace, const std::vector<std::string>& audits) {
  std::vector<AuditResult> out;
  for (const auto& name : audits) {
    AuditResult a;
    a.name = name;
    auto fail = [&](long long at, std::string why) {
      if (!a.pass) return;
      a.pass = false;
      a.first_failure = at;
      a.note = std::move(why);
    };
    const long long n = static_cast<long long>(trace.steps.size());
    auto mark = [&](long long i, const char* key) -> const std::string* {
      const auto& marks = i < n ? trace.steps[i].marks : trace.terminal.marks;
      auto it = marks.find(key);
      return it == marks.end() ? nullptr : &it->second;
    };
    if (name == "alternation") {
      const std::string* prev = nullptr;
      for (long long i = 0; i <= n && a.pass; ++i) {
        const std::string* cur = mark(i, "a1_vs_b1");
        if (!cur) fail(i, "no a1/b1 comparison recorded");
        else if (*cur == "=") fail(i, "a1 and b1 are tied");
        else if (prev && *prev == *cur) fail(i, "order of a1 and b1 did not change");
        prev = cur;
      }
    } else if (name == "agreement") {
      for (long long i = 0; i < n && a.pass; ++i) {
        const auto& st = trace.steps[i];
        if (const std::string* ag = mark(i, "agree")) {
          if (*ag != "1") fail(i, "rankings disagree");
        } else if (st.ranks.size() < 2) {
          fail(i, "rule evaluates fewer than two rankings");
        } else if (st.diverged || !rankings_agree(st.ranks)) {
          fail(i, "rankings disagree");
        }
      }
    } else if (name == "constant-improving-count") {
      const std::string* target = mark(n, "count_target");
      if (!target) {
        fail(0, "no counting-phase data recorded");
      } else {
        std::size_t want = std::stoull(*target);
        for (long long i = 0; i < n && a.pass; ++i) {
          if (!mark(i, "phase")) break;
          if (trace.steps[i].improving.size() != want)
            fail(i, std::to_string(trace.steps[i].improving.size()) + " improving, expected " + *target);
        }
      }
    } else if (name == "lockstep") {
      const std::string* r = mark(n, "lockstep");
      if (!r) fail(0, "no lockstep result recorded");
      else if (*r != "pass") fail(std::stoll(r->substr(5)), *r);
    } else if (name == "canonical-ladder") {
      const std::string* levels = mark(n, "levels");
      if (!levels) {
        fail(0, "no canonical marks recorded");
      } else {
        std::set<std::string> seen;
        for (long long i = 0; i <= n; ++i)
          if (const std::string* b = mark(i, "canonical")) seen.insert(*b);
        long long want = 1LL << std::stoi(*levels);
        if (static_cast<long long>(seen.size()) != want)
          fail(n, std::to_string(seen.size()) + " of " + std::to_string(want) + " canonical policies visited");
      }
    } else {
      fail(0, "unknown audit");
    }
    out.push_back(std::move(a));
  }
  return out;
}

bool all_passed(const std::vector<AuditResult>& audits) {
  return std::all_of(audits.begin(), audits.end(), [](const AuditResult& a) { return a.pass; });
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string audit_summary(const std::vector<AuditResult>& audits) {
  if (audits.empty()) return "-";
  std::string out;
  for (const auto& a : audits) {
    if (!out.empty()) out += ";";
    out += a.name + "=" + (a.pass ? "pass" : "fail@" + std::to_string(a.first_failure));
  }
  return out;
}

}  // namespace

std::string csv_header() { return "family,params,rule,n_or_L,edges_or_actions,iterations,optimal,audits\n"; }

std::string csv_row(const RunResult& r) {
  std::ostringstream os;
  os << csv_field(r.instance.family) << ',' << csv_field(r.instance.params) << ',' << csv_field(r.rule_name) << ','
     << r.instance.n_or_l << ',' << r.instance.size << ',' << r.trace.iterations() << ','
     << (r.optimal ? "true" : "false") << ',' << csv_field(audit_summary(r.audits)) << '\n';
  return os.str();
}

std::string audits_json(const std::vector<AuditResult>& audits) {
  json out = json::array();
  for (const auto& a : audits) {
    json row = {{"audit", a.name}, {"pass", a.pass}};
    if (!a.pass) {
      row["first_failure"] = a.first_failure;
      row["note"] = a.note;
    }
    out.push_back(row);
  }
  return out.dump(1) + "\n";
}

std::string result_json(const RunResult& r) {
  json j = {{"family", r.instance.family},
            {"params", json::parse(r.instance.params)},
            {"rule", r.rule_name},
            {"n_or_L", r.instance.n_or_l},
            {"edges_or_actions", r.instance.size},
            {"iterations", r.trace.iterations()},
            {"optimal", r.optimal},
            {"audits", json::parse(audits_json(r.audits))}};
  return j.dump(1) + "\n";
}

}  // namespace pf
