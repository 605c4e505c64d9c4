// One line per acceptance criterion; the exit status is nonzero if any criterion fails.

#include "checks.hpp"
#include "oracles.hpp"
#include "pivotforge/adversarial.hpp"
#include "pivotforge/mdp_families.hpp"
#include "pivotforge/reductions.hpp"
#include "pivotforge/rule_config.hpp"
#include "pivotforge/simplex.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

using namespace pf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, const check::Result& r, const std::string& summary) {
  if (!r.ok) ++failures;
  std::cout << "criterion " << id << ' ' << (r.ok ? "PASS" : "FAIL") << "  " << title << ": "
            << (r.ok ? summary : r.detail) << std::endl;
}

template <class F>
void guarded(check::Result& r, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    r.fail(std::string("exception: ") + e.what());
  }
}

Policy terminal_policy(const RunTrace& t) {
  Policy p;
  for (auto a : t.terminal.state) p.choice.push_back(static_cast<int>(a));
  return p;
}

Strategy terminal_strategy(const RunTrace& t) {
  Strategy s;
  for (auto v : t.terminal.state) s.choice.push_back(static_cast<int>(v));
  return s;
}

// ---- criteria 1 and 2 ----

void counter_parity() {
  check::Result iters, flips;
  double worst = 0;
  auto t0 = Clock::now();
  guarded(iters, [&] {
    for (int n = 1; n <= 12; ++n) {
      auto g = gen_counter_game(n);
      auto rec = check::record(g, greedy_rule(NeighborRanking::bland()));
      if (rec.trace.iterations() != (1ULL << n) - 1)
        iters.fail("n=" + std::to_string(n) + " took " + std::to_string(rec.trace.iterations()) + " iterations");
      int a1 = check::vertex(g.game, "a1"), b1 = check::vertex(g.game, "b1");
      for (std::size_t i = 1; i < rec.states.size(); ++i) {
        const auto& p = rec.states[i - 1].score;
        const auto& q = rec.states[i].score;
        if ((p[a1] > p[b1]) == (q[a1] > q[b1]) || q[a1] == q[b1])
          flips.fail("n=" + std::to_string(n) + ": no flip at iteration " + std::to_string(i));
      }
    }
  });
  worst = seconds_since(t0);
  if (worst >= 60) iters.fail("runtime " + fixed(worst) + " s exceeds 60 s");
  report(1, "binary counter parity game", iters,
         "greedy Bland takes exactly 2^n-1 iterations for n=1..12 (" + fixed(worst) + " s, limit 60 s)");
  report(2, "alternation", flips, "order of val(a1) and val(b1) flips at every iteration for n=1..12");
}

// ---- criteria 3 and 4 ----

// Bland, Dantzig and largest-increase orders recomputed from scratch with the oracle solver.
bool oracle_orders_agree(const MarkovDecisionProcess& m, const Policy& p, const std::vector<int>& improving) {
  auto v = *oracle::mdp_values(m, p);
  Rational base = 0;
  for (const auto& x : v) base += x;
  std::vector<int> by_bland = improving;
  std::sort(by_bland.begin(), by_bland.end(), [&](int a, int b) { return m.actions[a].bland < m.actions[b].bland; });
  std::optional<Rational> last_rc, last_gain;
  for (int a : by_bland) {
    Rational rc = oracle::mdp_reduced_cost(m, v, a);
    Policy q = p;
    q.choice[m.actions[a].source] = a;
    Rational gain = -base;
    auto after = *oracle::mdp_values(m, q);
    for (const auto& x : after) gain += x;
    if (last_rc && !(rc < *last_rc)) return false;
    if (last_gain && !(gain < *last_gain)) return false;
    last_rc = rc;
    last_gain = gain;
  }
  return true;
}

void mdp_counter() {
  check::Result runs, agree;
  auto t0 = Clock::now();
  double at10 = 0;
  std::size_t checked = 0;
  guarded(runs, [&] {
    for (int l = 2; l <= 10; ++l) {
      auto t1 = Clock::now();
      auto plain = gen_mdp_counter(l);
      auto inst = gen_mdp_counter(l, default_counter_epsilon(l));
      std::set<long long> seen;
      MdpRunOptions opt;
      opt.observer = [&](const Policy& p, const ValueMap&, const std::vector<int>& imp,
                         std::map<std::string, std::string>&) {
        if (auto b = canonical_index(plain, l, p)) seen.insert(*b);
        if (l <= 5 && !imp.empty()) {
          ++checked;
          if (!oracle_orders_agree(inst.mdp, p, imp)) agree.fail("L=" + std::to_string(l) + ": oracle orders disagree");
        }
      };
      auto t = policy_iteration(inst.mdp, inst.initial, f_rule(pick_first()), opt);
      if (l == 10) at10 = seconds_since(t1);
      const unsigned long long floor = (1ULL << l) - 2;
      if (t.iterations() < floor)
        runs.fail("L=" + std::to_string(l) + ": " + std::to_string(t.iterations()) + " iterations");
      if (seen.size() != (1ULL << l))
        runs.fail("L=" + std::to_string(l) + ": " + std::to_string(seen.size()) + " canonical policies visited");
      for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        if (s.diverged || s.ranks.size() != 3 || !rankings_agree(s.ranks))
          agree.fail("L=" + std::to_string(l) + ": rankings disagree at iteration " + std::to_string(i));
      }
    }
  });
  if (at10 >= 300) runs.fail("L=10 took " + fixed(at10) + " s");
  report(3, "MDP counter", runs,
         "f=1 takes >= 2^L-2 iterations and visits all 2^L canonical policies for L=2..10 (L=10 in " + fixed(at10) +
             " s, limit 300 s)");
  if (agree.ok && !runs.ok) agree.fail("criterion 3 runs failed");
  report(4, "ranking agreement", agree,
         "Bland, Dantzig and largest-increase agree at every visited policy for L=2..10, no divergence flag; oracle "
         "recomputation agrees at " + std::to_string(checked) + " policies (L<=5)");
  (void)t0;
}

// ---- criterion 5 ----

void gadgets() {
  check::Result r;
  guarded(r, [&] {
    for (int n : {2, 3}) {
      auto c = check::controller_run(check::with_controllers(n));
      if (!c.ok) r.fail("controller, G_" + std::to_string(n) + ": " + c.detail);
    }
    for (int n : {2, 3})
      for (int k : {1, 2, 3}) {
        auto d = check::delayer_run(n, k);
        if (!d.ok) r.fail("delayer, G_" + std::to_string(n) + ": " + d.detail);
      }
    for (int count : {1, 2, 3}) {
      auto g = gen_counter_game(3);
      for (int j = 0; j < count; ++j) g = gadget_filler(g, 1 + 3 * j);
      auto f = check::filler_run(g);
      if (!f.ok) r.fail("filler: " + f.detail);
    }
  });
  report(5, "gadget behaviour", r,
         "controller on G_2 and G_3 with every edge wrapped, delayer with k=1,2,3 on G_2 and G_3, 1 to 3 fillers on G_3, "
         "checked at every trace step");
}

// ---- criterion 6 ----

void decomposition() {
  check::Result r;
  long long total = 0;
  guarded(r, [&] {
    for (auto [m, l] : {std::pair<long long, long long>{8, 2}, {12, 3}, {16, 3}, {16, 4}}) {
      long long n = 0;
      auto c = check::decompose_exhaustive(m, l, &n);
      total += n;
      if (!c.ok) r.fail(c.detail);
    }
  });
  report(6, "clustered or dispersed", r,
         std::to_string(total) + " sequences over (8,2), (12,3), (16,3), (16,4) all certified by both verifiers");
}

// ---- criterion 7 ----

void adversarial() {
  check::Result r;
  std::ostringstream runs;
  guarded(r, [&] {
    struct Case {
      IndexSelector p;
      int l;
    };
    std::vector<Case> cases{{constant_selector(1), 1}, {alternating_selector(), 2}, {three_state_selector(), 3}};
    for (const auto& c : cases) {
      for (long long m_i : {36LL, 48LL, 72LL}) {
        if (m_i < 12 * c.l) continue;
        auto inst = build_adversarial_parity(c.p, m_i, c.l);
        std::string tag = c.p.name + " m_i=" + std::to_string(m_i);
        if (inst.game.game.player0_edge_count() != static_cast<std::size_t>(m_i))
          r.fail(tag + ": wrong player-0 edge count");
        auto raw = audit_counting_phase(inst, inst.raw.game, c.p);
        if (!raw.ok) r.fail(tag + ": improving count not constant: " + raw.note);
        auto shifted = audit_counting_phase(inst, inst.game.game, c.p);
        if (!meets_exponential_bound(raw.iterations, m_i, c.l)) r.fail(tag + ": bound missed before the transformation");
        if (!meets_exponential_bound(shifted.iterations, m_i, c.l)) r.fail(tag + ": bound missed after the transformation");
        runs << ' ' << c.p.name << '/' << m_i << '=' << shifted.iterations;
      }
    }
  });
  report(7, "adversarial parity builder", r,
         "iterations >= 2^(m_i/(12 l_i)-1) and improving count m_i/3 through the counting phase;" + runs.str());
}

// ---- criterion 8 ----

void lockstep() {
  check::Result r;
  std::size_t rows = 0;
  guarded(r, [&] {
    for (int l = 2; l <= 5; ++l) {
      for (bool perturbed : {false, true}) {
        auto inst = gen_mdp_counter(l, perturbed ? default_counter_epsilon(l) : Rational(0));
        for (const auto& rule : {greedy_rule(NeighborRanking::bland()), greedy_rule(NeighborRanking::dantzig()),
                                 greedy_rule(NeighborRanking::largest_increase()), f_rule(pick_first())}) {
          auto rep = lockstep_check(inst.mdp, rule, inst.initial);
          rows += rep.rows.size();
          if (!rep.ok || rep.mdp_iterations != rep.lp_iterations)
            r.fail("L=" + std::to_string(l) + " " + rule.name + ": " + rep.note);
        }
      }
    }
  });
  report(8, "policy iteration and simplex in lockstep", r,
         "L=2..5 with and without perturbation under Bland, Dantzig, largest-increase and f=1; " + std::to_string(rows) +
             " rows with equal actions, reduced costs and objectives");
}

// ---- criterion 9 ----

void delta_gamma() {
  check::Result r;
  std::ostringstream info;
  guarded(r, [&] {
    for (int l = 2; l <= 6; ++l) {
      long long scale = find_delta_scale(l);
      auto a = audit_delta(gen_mdp_delta(l, scale));
      const long long floor = (1LL << l) - 2;
      if (!a.agreement || !a.entry_most_preferred) r.fail("delta L=" + std::to_string(l) + ": " + a.note);
      if (a.counter_advances < floor)
        r.fail("delta L=" + std::to_string(l) + ": " + std::to_string(a.counter_advances) + " counter advances");
      info << " L=" << l << ":M=" << scale << ",advances=" << a.counter_advances;
    }
    auto half = [](long long m) { return (m + 1) / 2; };
    for (long long m_i : {70LL, 76LL}) {
      long long scale = find_gamma_scale(2, half, m_i, pick_half_ceil());
      auto g = gen_mdp_gamma(2, scale, half, m_i);
      auto a = audit_gamma(g, pick_half_ceil());
      std::string tag = "gamma m_i=" + std::to_string(m_i);
      if (!a.count_ok) r.fail(tag + ": improving count is not m_i " + a.note);
      if (!a.pick_ok) r.fail(tag + ": pick is not the most-preferred embedded switch " + a.note);
      if (!a.mimic_ok || !a.agreement || !a.decoy_ok) r.fail(tag + ": " + a.note);
      info << " gamma m_i=" << m_i << ":M=" << scale << ",phase=" << a.phase_length;
    }
  });
  report(9, "delta and gamma families", r,
         "f(k)=k advances the delta counter >= 2^L-2 times for L=2..6; gamma keeps m_i improving switches and picks "
         "the embedded counter's switch;" + info.str());
}

// ---- criterion 10 ----

// max c'x over [A | I] x = b with a bounding first row.
LinearProgram random_lp(std::mt19937& rng, int rows, int vars) {
  LinearProgram lp;
  std::uniform_int_distribution<int> coef(-3, 6), obj(-4, 8);
  for (int r = 0; r < rows; ++r) {
    RationalVector row(vars + rows, 0);
    for (int c = 0; c < vars; ++c) row[c] = r == 0 ? Rational(1) : Rational(coef(rng));
    row[vars + r] = 1;
    lp.a.push_back(row);
    lp.b.push_back(Rational(3 + static_cast<int>(rng() % 20)));
  }
  for (int c = 0; c < vars + rows; ++c) lp.c.push_back(c < vars ? Rational(obj(rng)) : Rational(0));
  return lp;
}

bool nondegenerate(const LinearProgram& lp) {
  const int m = static_cast<int>(lp.rows()), n = static_cast<int>(lp.cols());
  std::vector<int> pick(m);
  for (int i = 0; i < m; ++i) pick[i] = i;
  while (true) {
    try {
      LpState st(lp, Basis{pick});
      if (st.feasible() && !st.nondegenerate()) return false;
    } catch (const LpError&) {
    }
    int i = m - 1;
    while (i >= 0 && pick[i] == n - m + i) --i;
    if (i < 0) return true;
    ++pick[i];
    for (int k = i + 1; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
}

void oracles() {
  check::Result r;
  int games = 0, mdps = 0, lps = 0;
  guarded(r, [&] {
    std::vector<GameInstance> gs;
    for (int n = 1; n <= 6; ++n) gs.push_back(gen_counter_game(n));
    gs.push_back(check::with_controllers(2));
    for (const auto& g : gs) {
      oracle::ParityOracle o(g.game);
      auto best = o.optimum();
      for (const auto& rule : {greedy_rule(NeighborRanking::bland()), greedy_rule(NeighborRanking::dantzig()),
                               index_based_rule(alternating_selector()), f_rule(pick_sqrt_ceil())}) {
        auto t = strategy_improvement(g.game, g.initial, rule);
        if (o.scores(terminal_strategy(t)) != best) r.fail("parity " + g.metadata.at("family") + " " + rule.name);
        ++games;
      }
    }
    std::vector<MdpInstance> ms;
    for (int l = 2; l <= 5; ++l) ms.push_back(gen_mdp_counter(l, default_counter_epsilon(l)));
    ms.push_back(gen_mdp_copied(gen_mdp_counter(2), 2));
    ms.push_back(gen_mdp_delta(2, 2));
    for (const auto& m : ms) {
      auto best = oracle::mdp_optimum(m.mdp);
      for (const auto& rule : {greedy_rule(NeighborRanking::bland()), greedy_rule(NeighborRanking::dantzig()),
                               greedy_rule(NeighborRanking::largest_increase()), f_rule(pick_half_ceil())}) {
        auto t = policy_iteration(m.mdp, m.initial, rule);
        if (policy_values(m.mdp, terminal_policy(t)).val != best) r.fail("mdp " + m.metadata.at("family") + " " + rule.name);
        ++mdps;
      }
      auto [lp, map] = mdp_to_lp(m.mdp);
      auto t = simplex(lp, map.basis_of(m.initial), greedy_rule(NeighborRanking::dantzig()));
      Basis end;
      for (auto i : t.terminal.state) end.indices.push_back(static_cast<int>(i) - 1);
      Rational sum = 0;
      for (const auto& x : best) sum += x;
      if (LpState(lp, end).objective() != sum) r.fail("lp of " + m.metadata.at("family"));
    }
    std::mt19937 rng(1);
    while (lps < 100) {
      int rows = 2 + static_cast<int>(rng() % 3);
      int vars = 2 + static_cast<int>(rng() % (9 - rows - 1));
      auto lp = random_lp(rng, rows, vars);
      if (lp.cols() > 8 || !nondegenerate(lp)) continue;
      Basis slack;
      for (int i = 0; i < rows; ++i) slack.indices.push_back(vars + i);
      for (const auto& rule : {greedy_rule(NeighborRanking::bland()), greedy_rule(NeighborRanking::dantzig()),
                               greedy_rule(NeighborRanking::steepest_edge())}) {
        auto t = simplex(lp, slack, rule);
        Basis end;
        for (auto i : t.terminal.state) end.indices.push_back(static_cast<int>(i) - 1);
        if (LpState(lp, end).objective() != brute_force_optimum(lp)) r.fail("random lp " + std::to_string(lps));
      }
      ++lps;
    }
  });
  report(10, "exhaustive oracles", r,
         std::to_string(games) + " parity runs and " + std::to_string(mdps) +
             " MDP runs end at the enumerated optimum; flux LPs match; simplex matches basis enumeration on " +
             std::to_string(lps) + " random nondegenerate LPs with n <= 8");
}

}  // namespace

int main() {
  auto t0 = Clock::now();
  counter_parity();
  mdp_counter();
  gadgets();
  decomposition();
  adversarial();
  lockstep();
  delta_gamma();
  oracles();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " ("
            << fixed(seconds_since(t0)) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
