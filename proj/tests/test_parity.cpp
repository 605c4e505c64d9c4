#include "checks.hpp"
#include "oracles.hpp"
#include "pivotforge/gadgets.hpp"
#include "pivotforge/parity_game.hpp"
#include "pivotforge/pivot_rules.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace pf;

namespace {

Strategy strategy_with(const GameInstance& g, std::initializer_list<std::pair<const char*, const char*>> moves) {
  Strategy s = g.initial;
  for (auto [from, to] : moves) {
    int v = g.game.vertex_by_name(from), w = g.game.vertex_by_name(to);
    if (v < 0 || w < 0) throw std::invalid_argument(std::string("no vertex ") + (v < 0 ? from : to));
    s.choice[v] = w;
  }
  return s;
}

int edge(const SinkParityGame& g, const char* from, const char* to) {
  return g.find_edge(g.vertex_by_name(from), g.vertex_by_name(to));
}

// Unique priorities; player-0 edges only climb, so player 1 always has a way out to the sink.
GameInstance random_game(std::mt19937& rng, int n0, int n1) {
  GameInstance inst;
  auto& g = inst.game;
  int sink = g.add_sink();
  std::vector<int> prio(n0 + n1);
  std::iota(prio.begin(), prio.end(), 2);
  std::shuffle(prio.begin(), prio.end(), rng);
  std::vector<int> p0, p1;
  for (int i = 0; i < n0; ++i) p0.push_back(g.add_vertex(Owner::Player0, Priority(prio[i]), "p" + std::to_string(i)));
  for (int i = 0; i < n1; ++i) p1.push_back(g.add_vertex(Owner::Player1, Priority(prio[n0 + i]), "q" + std::to_string(i)));
  std::vector<std::pair<int, int>> zero;
  for (int v : p0) {
    zero.push_back({v, sink});
    std::set<int> targets;
    int extra = 1 + static_cast<int>(rng() % 2);
    while (static_cast<int>(targets.size()) < extra) {
      int t = 1 + static_cast<int>(rng() % (n0 + n1));
      if (t > v) targets.insert(t);
      else if (v == n0) targets.insert(n0 + 1 + static_cast<int>(rng() % n1));
    }
    for (int t : targets) zero.push_back({v, t});
  }
  std::vector<long long> bland(zero.size());
  std::iota(bland.begin(), bland.end(), 1);
  std::shuffle(bland.begin(), bland.end(), rng);
  for (std::size_t i = 0; i < zero.size(); ++i) g.add_edge(zero[i].first, zero[i].second, bland[i]);
  for (int i = 0; i < n1; ++i) {
    g.add_edge(p1[i], sink);
    for (int j = i + 1; j < n1; ++j)
      if (rng() % 2) g.add_edge(p1[i], p1[j]);
    g.add_edge(p1[i], p0[rng() % n0]);
  }
  inst.initial.choice.assign(g.vertices.size(), -1);
  for (int v : p0) inst.initial.choice[v] = sink;
  return inst;
}

// Same game with vertices and edges listed in a different order; Bland numbers travel with their edges.
GameInstance relabel(const GameInstance& in, std::mt19937& rng) {
  const auto& g = in.game;
  std::vector<int> perm(g.vertices.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> where(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) where[perm[i]] = static_cast<int>(i);
  GameInstance out;
  for (int old : perm) {
    const auto& v = g.vertices[old];
    if (v.owner == Owner::Sink) out.game.add_sink(v.name);
    else out.game.add_vertex(v.owner, v.priority, v.name);
  }
  std::vector<int> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int e : order)
    if (g.edges[e].source != g.sink)
      out.game.add_edge(where[g.edges[e].source], where[g.edges[e].target], g.bland[e]);
  out.initial.choice.assign(g.vertices.size(), -1);
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    if (in.initial.choice[v] >= 0) out.initial.choice[where[v]] = where[in.initial.choice[v]];
  return out;
}

std::vector<ElementId> chosen(const RunTrace& t) {
  std::vector<ElementId> out;
  for (const auto& s : t.steps) out.push_back(s.chosen);
  return out;
}

}  // namespace

TEST(Validate, CounterGameIsValid) { EXPECT_TRUE(validate_game(gen_counter_game(2).game).empty()); }

TEST(Validate, ReportsStructuralViolations) {
  auto g = gen_counter_game(2).game;
  auto loop = g.find_edge(g.sink, g.sink);
  auto broken = g;
  broken.edges.erase(broken.edges.begin() + loop);
  broken.bland.erase(broken.bland.begin() + loop);
  auto v = validate_game(broken);
  EXPECT_NE(std::find(v.begin(), v.end(), "sink self-loop missing"), v.end());
  auto dup = g;
  dup.bland[edge(dup, "a1", "b2")] = dup.bland[edge(dup, "a1", "a2")];
  v = validate_game(dup);
  EXPECT_NE(std::find(v.begin(), v.end(), "bland not bijective"), v.end());
}

TEST(CounterGame, Structure) {
  auto g = gen_counter_game(2);
  int p0 = 0, p1 = 0;
  for (const auto& v : g.game.vertices) {
    p0 += v.owner == Owner::Player0;
    p1 += v.owner == Owner::Player1;
  }
  EXPECT_EQ(p0, 2);
  EXPECT_EQ(p1, 3);
  EXPECT_EQ(g.game.player0_edge_count(), 4u);
  EXPECT_EQ(g.game.vertices[g.game.vertex_by_name("a1")].priority, Priority(3));
  EXPECT_EQ(g.game.vertices[g.game.vertex_by_name("b1")].priority, Priority(4));
}

TEST(Admissible, Examples) {
  auto g2 = gen_counter_game(2);
  EXPECT_TRUE(is_admissible(g2.game, g2.initial));
  auto g1 = gen_counter_game(1);
  EXPECT_TRUE(is_admissible(g1.game, strategy_with(g1, {{"a1", "b2"}})));
  auto d = gadget_delayer(g2, g2.game.vertex_by_name("a1"), 1, g2.game.vertex_by_name("a2"),
                          g2.game.vertex_by_name("b2"));
  auto s = strategy_with(d, {{"a1~z1_1", "a1~z2_1"}, {"a1~z2_1", "a1~z1_1"}});
  EXPECT_FALSE(is_admissible(d.game, s));
  EXPECT_FALSE(oracle::ParityOracle(d.game).admissible(s));
}

TEST(Valuations, CounterExamples) {
  auto g1 = gen_counter_game(1);
  auto v = valuations(g1.game, g1.initial);
  EXPECT_EQ(v.val[g1.game.vertex_by_name("a1")], ValuationMultiset({3}));
  EXPECT_EQ(v.val[g1.game.vertex_by_name("b1")], ValuationMultiset({4}));
  EXPECT_TRUE(v.val[g1.game.sink].empty());
  auto opt = valuations(g1.game, strategy_with(g1, {{"a1", "b2"}}));
  EXPECT_EQ(opt.val[g1.game.vertex_by_name("a1")], ValuationMultiset({3, 6}));
}

TEST(ImprovingSwitches, CounterExamples) {
  auto g1 = gen_counter_game(1);
  auto imp = improving_switches(g1.game, g1.initial);
  ASSERT_EQ(imp.size(), 1u);
  EXPECT_EQ(imp[0], (Edge{g1.game.vertex_by_name("a1"), g1.game.vertex_by_name("b2")}));
  EXPECT_TRUE(improving_switches(g1.game, strategy_with(g1, {{"a1", "b2"}})).empty());
  // both a1 and a2 can switch at the start of G_2 (computed by the brute-force oracle)
  auto g2 = gen_counter_game(2);
  auto want = oracle::ParityOracle(g2.game).improving(g2.initial);
  std::set<std::pair<int, int>> got;
  for (const auto& e : improving_switches(g2.game, g2.initial)) got.insert({e.source, e.target});
  EXPECT_EQ(got, want);
  EXPECT_EQ(got.size(), 2u);
}

TEST(ApplySwitch, Examples) {
  auto g1 = gen_counter_game(1);
  Edge e{g1.game.vertex_by_name("a1"), g1.game.vertex_by_name("b2")};
  EXPECT_EQ(apply_switch(g1.initial, e).choice[e.source], e.target);
  int a1 = g1.game.vertex_by_name("a1");
  EXPECT_EQ(apply_switch(g1.initial, Edge{a1, g1.initial.choice[a1]}), g1.initial);
  auto g2 = gen_counter_game(2);
  Edge f{g2.game.vertex_by_name("a2"), g2.game.vertex_by_name("b3")};
  auto s = apply_switch(g2.initial, f);
  for (std::size_t v = 0; v < s.choice.size(); ++v)
    if (static_cast<int>(v) != f.source) EXPECT_EQ(s.choice[v], g2.initial.choice[v]);
}

TEST(StrategyImprovement, BlandOnCounter) {
  EXPECT_EQ(strategy_improvement(gen_counter_game(1).game, gen_counter_game(1).initial,
                                 greedy_rule(NeighborRanking::bland()))
                .iterations(),
            1u);
  for (int n = 1; n <= 6; ++n) {
    auto g = gen_counter_game(n);
    EXPECT_EQ(strategy_improvement(g.game, g.initial, greedy_rule(NeighborRanking::bland())).iterations(),
              (1u << n) - 1)
        << "n=" << n;
  }
  auto g3 = gen_counter_game(3);
  auto done = strategy_improvement(g3.game, g3.initial, greedy_rule(NeighborRanking::bland()));
  Strategy opt;
  opt.choice.assign(g3.game.vertices.size(), -1);
  for (std::size_t v = 0; v < opt.choice.size(); ++v)
    if (done.terminal.state[v] >= 0) opt.choice[v] = static_cast<int>(done.terminal.state[v]);
  for (const auto& rule : {greedy_rule(NeighborRanking::dantzig()), f_rule(pick_sqrt_ceil())})
    EXPECT_EQ(strategy_improvement(g3.game, opt, rule).iterations(), 0u);
}

TEST(StrategyImprovement, MatchesOracleOnRandomGames) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_game(rng, 3 + trial % 4, 2 + trial % 3);
    oracle::ParityOracle o(inst.game);
    ASSERT_TRUE(o.admissible(inst.initial));
    auto v = valuations(inst.game, inst.initial);
    EXPECT_EQ(v.score, o.scores(inst.initial));
    std::set<std::pair<int, int>> got;
    for (const auto& e : improving_switches(inst.game, inst.initial)) got.insert({e.source, e.target});
    EXPECT_EQ(got, o.improving(inst.initial));
    for (const auto& rule : {greedy_rule(NeighborRanking::bland()), greedy_rule(NeighborRanking::dantzig()),
                             f_rule(pick_half_ceil())}) {
      auto t = strategy_improvement(inst.game, inst.initial, rule);
      ASSERT_TRUE(t.complete);
      Strategy end;
      end.choice.assign(t.terminal.state.begin(), t.terminal.state.end());
      EXPECT_EQ(o.scores(end), o.optimum()) << "trial " << trial << " rule " << rule.name;
    }
  }
}

TEST(StrategyImprovement, BlandEqualsConstantSelector) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_game(rng, 3 + trial % 5, 2 + trial % 4);
    auto a = strategy_improvement(inst.game, inst.initial, greedy_rule(NeighborRanking::bland()));
    auto b = strategy_improvement(inst.game, inst.initial, index_based_rule(constant_selector(1)));
    EXPECT_EQ(chosen(a), chosen(b));
  }
  auto g3 = gen_counter_game(3);
  auto a = strategy_improvement(g3.game, g3.initial, greedy_rule(NeighborRanking::bland()));
  auto b = strategy_improvement(g3.game, g3.initial, index_based_rule(constant_selector(1)));
  EXPECT_EQ(a.iterations(), 7u);
  EXPECT_EQ(chosen(a), chosen(b));
}

TEST(StrategyImprovement, ChoicesSurviveRelabeling) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = random_game(rng, 4, 3);
    auto other = relabel(inst, rng);
    for (const auto& rule : {greedy_rule(NeighborRanking::bland()), index_based_rule(alternating_selector()),
                             f_rule(pick_sqrt_ceil())})
      EXPECT_EQ(chosen(strategy_improvement(inst.game, inst.initial, rule)),
                chosen(strategy_improvement(other.game, other.initial, rule)));
  }
}

TEST(Selectors, AlternatingPicksAlternateRanks) {
  auto g = gen_counter_game(3);
  auto t = strategy_improvement(g.game, g.initial, index_based_rule(alternating_selector()));
  ASSERT_FALSE(t.steps.empty());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    int k = static_cast<int>(t.steps[i].improving.size());
    EXPECT_EQ(t.steps[i].chosen_rank, i % 2 == 0 ? 1 : std::min(2, k)) << "step " << i;
  }
}

TEST(Selectors, ReplayReproducesTrace) {
  auto g2 = gen_counter_game(2);
  auto t = strategy_improvement(g2.game, g2.initial, greedy_rule(NeighborRanking::bland()));
  ASSERT_EQ(t.iterations(), 3u);
  auto replay = index_rule_from_trace(t, 3);
  EXPECT_EQ(replay.memory_bound, 3);
  auto r = strategy_improvement(g2.game, g2.initial, index_based_rule(replay));
  EXPECT_EQ(chosen(r), chosen(t));
}

TEST(StandardTransformation, Examples) {
  SinkParityGame g;
  g.add_sink();
  int a = g.add_vertex(Owner::Player0, Priority(3), "a");
  int b = g.add_vertex(Owner::Player1, Priority(3), "b");
  int c = g.add_vertex(Owner::Player1, Priority(4), "c");
  g.add_edge(a, g.sink, 1);
  g.add_edge(b, g.sink);
  g.add_edge(c, g.sink);
  auto t = standard_transformation(g);
  EXPECT_EQ(t.vertices[a].priority, Priority(3));
  EXPECT_EQ(t.vertices[b].priority, Priority(5));
  EXPECT_EQ(t.vertices[c].priority, Priority(6));
  auto u = standard_transformation(t);
  for (std::size_t v = 0; v < t.vertices.size(); ++v) EXPECT_EQ(u.vertices[v].priority, t.vertices[v].priority);

  auto g2 = gen_counter_game(2).game;
  auto s = standard_transformation(g2);
  std::set<int> seen;
  for (std::size_t v = 0; v < s.vertices.size(); ++v) {
    if (s.vertices[v].priority.is_bottom()) continue;
    seen.insert(s.vertices[v].priority.value());
    EXPECT_EQ(s.vertices[v].priority.value() % 2, g2.vertices[v].priority.value() % 2);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Gadgets, MultiplierCopiesImprovingEdge) {
  auto g1 = gen_counter_game(1);
  Edge e{g1.game.vertex_by_name("a1"), g1.game.vertex_by_name("b2")};
  auto one = gadget_multiplier(g1, e, 1);
  EXPECT_EQ(one.game.player0_edge_count(), g1.game.player0_edge_count());
  auto three = gadget_multiplier(g1, e, 3);
  EXPECT_EQ(three.game.player0_edge_count(), g1.game.player0_edge_count() + 2);
  EXPECT_TRUE(validate_game(three.game).empty());
  EXPECT_EQ(improving_switches(three.game, three.initial).size(), 3u);
}

TEST(Gadgets, ControllerExclusionAlongTraces) {
  for (int n : {2, 3}) {
    auto g = check::with_controllers(n);
    EXPECT_TRUE(validate_game(g.game).empty());
    EXPECT_EQ(g.game.player0_edge_count(), 3 * gen_counter_game(n).game.player0_edge_count());
    auto r = check::controller_run(g);
    EXPECT_TRUE(r.ok) << r.detail;
  }
}

TEST(Gadgets, ControllerRejectsLowPriorityReach) {
  auto g = gen_counter_game(1);
  g = gadget_delayer(g, g.game.vertex_by_name("a1"), 1, g.game.vertex_by_name("top"), g.game.vertex_by_name("b2"));
  int z = g.game.vertex_by_name("a1~z1_1");
  int e = g.game.find_edge(z, g.initial.choice[z]);
  EXPECT_THROW(gadget_controller(g, g.game.edges[e]), GameError);
}

TEST(Gadgets, FillerOffersOneEdgeUntilTaken) {
  auto g = gen_counter_game(2);
  const auto before = g.game.player0_edge_count();
  g = gadget_filler(g, 1);
  g = gadget_filler(g, 4);
  g = gadget_filler(g, g.game.player0_edge_count() + 1);
  EXPECT_EQ(g.game.player0_edge_count(), before + 9);
  EXPECT_TRUE(validate_game(g.game).empty());
  auto r = check::filler_run(g);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Gadgets, DelayerDrainsInKPlusOneSteps) {
  for (int k : {1, 2, 3}) {
    auto r = check::delayer_run(2, k);
    EXPECT_TRUE(r.ok) << r.detail;
  }
}
