#pragma once

// Trace-level checks shared by the unit tests and the acceptance binary.

#include "oracles.hpp"
#include "pivotforge/decompose.hpp"
#include "pivotforge/gadgets.hpp"
#include "pivotforge/parity_game.hpp"

#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace check {

struct Result {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct Snapshot {
  pf::Strategy strategy;
  std::vector<pf::Integer> score;
  std::set<int> improving;  // edge indices
};

struct Recorded {
  pf::RunTrace trace;
  std::vector<Snapshot> states;  // one per visited strategy, the terminal one last
};

inline Recorded record(const pf::GameInstance& g, const pf::PivotRule& rule, unsigned long long cap = 1ULL << 24) {
  Recorded r;
  pf::ParityRunOptions opt;
  opt.cap = cap;
  opt.observer = [&](const pf::Strategy& s, const pf::ValuationMap& v, const std::vector<int>& imp,
                     std::map<std::string, std::string>&) {
    r.states.push_back({s, v.score, {imp.begin(), imp.end()}});
  };
  r.trace = pf::strategy_improvement(g.game, g.initial, rule, opt);
  return r;
}

inline int vertex(const pf::SinkParityGame& g, const std::string& name) {
  int v = g.vertex_by_name(name);
  if (v < 0) throw std::invalid_argument("no vertex " + name);
  return v;
}

// Bland SI on G_n: 2^n - 1 iterations and the order of a1 against b1 flips at every step.
inline Result counter_run(int n) {
  Result res;
  auto g = pf::gen_counter_game(n);
  auto rec = record(g, pf::greedy_rule(pf::NeighborRanking::bland()));
  const unsigned long long want = (1ULL << n) - 1;
  if (rec.trace.iterations() != want) {
    res.fail("n=" + std::to_string(n) + ": " + std::to_string(rec.trace.iterations()) + " iterations, expected " +
             std::to_string(want));
  }
  int a1 = vertex(g.game, "a1"), b1 = vertex(g.game, "b1");
  for (std::size_t i = 1; i < rec.states.size(); ++i) {
    auto before = rec.states[i - 1].score[a1] > rec.states[i - 1].score[b1];
    auto after = rec.states[i].score[a1] > rec.states[i].score[b1];
    if (before == after || rec.states[i].score[a1] == rec.states[i].score[b1])
      res.fail("n=" + std::to_string(n) + ": a1/b1 order did not flip at iteration " + std::to_string(i));
  }
  return res;
}

inline pf::GameInstance with_controllers(int n) {
  auto g = pf::gen_counter_game(n);
  std::vector<pf::Edge> original;
  for (std::size_t e = 0; e < g.game.edges.size(); ++e)
    if (g.game.is_player0_edge(static_cast<int>(e))) original.push_back(g.game.edges[e]);
  for (const auto& e : original) g = pf::gadget_controller(g, e);
  return g;
}

// While z still uses a: a' improving <=> (x, y) not improving; the improving count stays fixed until an a' switch.
inline Result controller_run(const pf::GameInstance& g) {
  Result res;
  struct Widget {
    int x, y, z, a, a_prime, xy;
  };
  std::vector<Widget> widgets;
  const auto& game = g.game;
  for (std::size_t v = 0; v < game.vertices.size(); ++v) {
    const auto& name = game.vertices[v].name;
    if (name.size() < 3 || name.compare(name.size() - 2, 2, "~z") != 0) continue;
    auto stem = name.substr(0, name.size() - 2);
    auto cut = stem.find('>');
    Widget w{};
    w.x = vertex(game, stem.substr(0, cut));
    w.y = vertex(game, stem.substr(cut + 1));
    w.z = static_cast<int>(v);
    w.a = game.find_edge(w.z, vertex(game, stem + "~v"));
    w.a_prime = game.find_edge(w.z, w.x);
    w.xy = game.find_edge(w.x, w.y);
    if (w.a < 0 || w.a_prime < 0 || w.xy < 0) {
      res.fail("controller " + stem + " is missing an edge");
      return res;
    }
    widgets.push_back(w);
  }
  if (widgets.empty()) res.fail("no controllers found");
  auto rec = record(g, pf::greedy_rule(pf::NeighborRanking::bland()));
  std::optional<std::size_t> count;
  bool any_prime = false;
  for (std::size_t i = 0; i < rec.states.size(); ++i) {
    const auto& st = rec.states[i];
    for (const auto& w : widgets) {
      if (st.strategy.choice[w.z] != game.edges[w.a].target) {
        any_prime = true;
        continue;
      }
      bool prime = st.improving.count(w.a_prime) > 0, edge = st.improving.count(w.xy) > 0;
      if (prime == edge)
        res.fail("step " + std::to_string(i) + ": controller at " + game.vertices[w.z].name + " has a' " +
                 (prime ? "and" : "nor") + " (x,y) improving");
    }
    if (!any_prime && i + 1 < rec.states.size()) {
      if (!count) count = st.improving.size();
      else if (*count != st.improving.size())
        res.fail("step " + std::to_string(i) + ": improving count " + std::to_string(st.improving.size()) +
                 " differs from " + std::to_string(*count));
    }
  }
  return res;
}

// Each filler offers its one edge until it is taken, and nothing afterwards.
inline Result filler_run(const pf::GameInstance& g) {
  Result res;
  const auto& game = g.game;
  struct Widget {
    int x, y, y_x, x_sink, y_sink;
  };
  std::vector<Widget> widgets;
  for (int j = 1;; ++j) {
    int x = game.vertex_by_name("fx_" + std::to_string(j)), y = game.vertex_by_name("fy_" + std::to_string(j));
    if (x < 0 || y < 0) break;
    widgets.push_back({x, y, game.find_edge(y, x), game.find_edge(x, game.sink), game.find_edge(y, game.sink)});
  }
  if (widgets.empty()) res.fail("no fillers found");
  auto rec = record(g, pf::greedy_rule(pf::NeighborRanking::bland()));
  for (std::size_t i = 0; i < rec.states.size(); ++i) {
    const auto& st = rec.states[i];
    for (const auto& w : widgets) {
      bool open = st.strategy.choice[w.y] == game.sink;
      if ((st.improving.count(w.y_x) > 0) != open)
        res.fail("step " + std::to_string(i) + ": filler edge improving state is wrong");
      if (st.improving.count(w.x_sink) || st.improving.count(w.y_sink))
        res.fail("step " + std::to_string(i) + ": a filler offers a second improving edge");
    }
  }
  return res;
}

// Delayer on a1 between a2 and b2: silent while the chosen side is better, then exactly one
// internal improving edge per iteration for k + 1 internal switches after each flip.
inline Result delayer_run(int n, int k) {
  Result res;
  auto base = pf::gen_counter_game(n);
  const auto& bg = base.game;
  auto g = pf::gadget_delayer(base, vertex(bg, "a1"), k, vertex(bg, "a2"), vertex(bg, "b2"));
  const auto& game = g.game;
  std::set<int> inside;
  for (int j = 1; j <= k + 1; ++j) inside.insert(vertex(game, "a1~z" + std::to_string(j) + "_1"));
  int x = vertex(game, "a2"), y = vertex(game, "b2");
  auto rec = record(g, pf::greedy_rule(pf::NeighborRanking::bland()));
  std::string tag = "k=" + std::to_string(k) + " ";
  int side = 1;        // side the chain routes to: +1 for x (the initial choice), -1 for y
  int drained = 0;     // internal switches since the last flip
  int flips = 0;
  for (std::size_t i = 0; i < rec.states.size(); ++i) {
    const auto& st = rec.states[i];
    int now = st.score[x] > st.score[y] ? 1 : -1;
    if (now != side) {
      if (flips > 0 && drained != k + 1)
        res.fail(tag + "flip at step " + std::to_string(i) + " after " + std::to_string(drained) + " internal switches");
      side = now;
      drained = 0;
      ++flips;
    }
    int internal = 0;
    for (int e : st.improving) internal += inside.count(game.edges[e].source) > 0;
    if (internal > 1) res.fail(tag + "step " + std::to_string(i) + ": " + std::to_string(internal) + " internal improving edges");
    if (flips == 0 && internal > 0) res.fail(tag + "improving edge inside the gadget before the first flip");
    if (flips > 0 && drained < k + 1 && internal != 1)
      res.fail(tag + "step " + std::to_string(i) + ": drain stalled after " + std::to_string(drained) + " switches");
    if (i + 1 < rec.states.size()) {
      for (int v : inside)
        if (rec.states[i + 1].strategy.choice[v] != st.strategy.choice[v]) ++drained;
    }
  }
  if (flips == 0) res.fail(tag + "the outside never flipped");
  else if (drained != k + 1) res.fail(tag + "last drain took " + std::to_string(drained) + " switches");
  return res;
}

inline void for_each_sequence(long long m, long long l, const std::function<void(const std::vector<long long>&)>& f) {
  std::vector<long long> seq;
  std::function<void()> rec = [&] {
    if (!seq.empty()) f(seq);
    if (static_cast<long long>(seq.size()) == l) return;
    for (long long x = 1; x <= m; ++x) {
      seq.push_back(x);
      rec();
      seq.pop_back();
    }
  };
  rec();
}

// decompose passes both the library verifier and the transcribed definitions for every sequence.
inline Result decompose_exhaustive(long long m, long long l, long long* count = nullptr) {
  Result res;
  long long n = 0;
  for_each_sequence(m, l, [&](const std::vector<long long>& seq) {
    ++n;
    if (!res.ok) return;
    auto cert = pf::decompose(seq, m, l);
    bool oracle_ok = std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, pf::ClusteredCertificate>) return oracle::clustered_ok(c, seq, m, l);
          else return oracle::dispersed_ok(c, seq, m, l);
        },
        cert);
    std::string why;
    if (!oracle_ok || !pf::verify_certificate(cert, seq, m, l, &why)) {
      std::ostringstream os;
      os << "m=" << m << " l=" << l << " seq=(";
      for (auto x : seq) os << x << ' ';
      os << ") " << why;
      res.fail(os.str());
    }
  });
  if (count) *count = n;
  return res;
}

}  // namespace check
