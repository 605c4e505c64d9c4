#include "pivotforge/parity_game.hpp"

#include "pivotforge/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace pf {

int SinkParityGame::add_vertex(Owner owner, Priority priority, std::string name) {
  vertices.push_back({owner, priority, std::move(name)});
  return static_cast<int>(vertices.size()) - 1;
}

int SinkParityGame::add_sink(std::string name) {
  sink = add_vertex(Owner::Sink, Priority::bottom(), std::move(name));
  add_edge(sink, sink);
  return sink;
}

int SinkParityGame::add_edge(int source, int target, long long bland_number) {
  edges.push_back({source, target});
  bland.push_back(bland_number);
  return static_cast<int>(edges.size()) - 1;
}

std::int64_t SinkParityGame::base() const {
  return static_cast<std::int64_t>(vertices.size()) - (sink >= 0 ? 1 : 0);
}

std::size_t SinkParityGame::player0_edge_count() const {
  std::size_t n = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) n += is_player0_edge(static_cast<int>(e));
  return n;
}

std::vector<std::vector<int>> SinkParityGame::out_edges() const {
  std::vector<std::vector<int>> out(vertices.size());
  for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].source].push_back(static_cast<int>(e));
  return out;
}

int SinkParityGame::find_edge(int source, int target) const {
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].source == source && edges[e].target == target) return static_cast<int>(e);
  return -1;
}

int SinkParityGame::vertex_by_name(const std::string& name) const {
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].name == name) return static_cast<int>(v);
  return -1;
}

std::vector<std::string> validate_game(const SinkParityGame& g) {
  std::vector<std::string> out;
  const int n = static_cast<int>(g.vertices.size());
  if (g.sink < 0 || g.sink >= n) {
    out.push_back("sink missing");
    return out;
  }
  if (g.bland.size() != g.edges.size()) out.push_back("bland table size mismatch");
  for (const auto& e : g.edges)
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
      out.push_back("edge endpoint out of range");
      return out;
    }
  auto adj = g.out_edges();
  for (int v = 0; v < n; ++v)
    if (adj[v].empty()) out.push_back("vertex " + g.vertices[v].name + " has no outgoing edge");
  const auto& sink_out = adj[g.sink];
  if (sink_out.size() != 1 || g.edges[sink_out.front()].target != g.sink) out.push_back("sink self-loop missing");
  for (int v = 0; v < n; ++v) {
    bool bottom = g.vertices[v].priority.is_bottom();
    if (v == g.sink && !bottom) out.push_back("sink priority is not bottom");
    if (v != g.sink && bottom) out.push_back("vertex " + g.vertices[v].name + " has bottom priority");
    if (v != g.sink && g.vertices[v].owner == Owner::Sink) out.push_back("second sink vertex");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : g.edges)
    if (!seen.insert({e.source, e.target}).second) {
      out.push_back("duplicate edge");
      break;
    }
  std::vector<long long> numbers;
  for (std::size_t e = 0; e < g.edges.size() && e < g.bland.size(); ++e)
    if (g.is_player0_edge(static_cast<int>(e))) numbers.push_back(g.bland[e]);
  std::sort(numbers.begin(), numbers.end());
  for (std::size_t i = 0; i < numbers.size(); ++i)
    if (numbers[i] != static_cast<long long>(i + 1)) {
      out.push_back("bland not bijective");
      break;
    }
  std::set<std::string> names;
  for (const auto& v : g.vertices)
    if (!names.insert(v.name).second) {
      out.push_back("duplicate vertex name " + v.name);
      break;
    }
  return out;
}

ParityEvaluator::ParityEvaluator(const SinkParityGame& g) : g_(g), out_(g.out_edges()) {
  auto problems = validate_game(g);
  if (!problems.empty()) throw GameError("invalid game: " + problems.front());
  const std::int64_t t = g.base();
  std::map<int, Integer> cache;
  std::set<int> odd;
  for (const auto& v : g.vertices) {
    if (v.priority.is_bottom()) {
      weight_.push_back(0);
      continue;
    }
    int p = v.priority.value();
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, signed_power(t, v.priority)).first;
    weight_.push_back(it->second);
    if (p % 2 != 0) odd.insert(p);
  }
  odd_priorities_.assign(odd.begin(), odd.end());
  long long m = static_cast<long long>(g.player0_edge_count());
  by_bland_.assign(m + 1, -1);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.is_player0_edge(static_cast<int>(e))) by_bland_[g.bland[e]] = static_cast<int>(e);
}

int ParityEvaluator::edge_of_bland(long long b) const { return by_bland_.at(b); }

namespace {

// Successor lists of E_sigma without the sink loop.
std::vector<std::vector<int>> strategy_graph(const SinkParityGame& g, const std::vector<std::vector<int>>& out,
                                             const Strategy& s) {
  std::vector<std::vector<int>> succ(g.vertices.size());
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (static_cast<int>(v) == g.sink) continue;
    if (g.vertices[v].owner == Owner::Player0) {
      succ[v].push_back(s.choice.at(v));
    } else {
      for (int e : out[v]) succ[v].push_back(g.edges[e].target);
    }
  }
  return succ;
}

}  // namespace

bool ParityEvaluator::admissible(const Strategy& s) const {
  const int n = static_cast<int>(g_.vertices.size());
  if (static_cast<int>(s.choice.size()) != n) return false;
  for (int v = 0; v < n; ++v) {
    if (g_.vertices[v].owner != Owner::Player0) continue;
    int w = s.choice[v];
    bool ok = false;
    for (int e : out_[v]) ok = ok || g_.edges[e].target == w;
    if (!ok) return false;
  }
  auto succ = strategy_graph(g_, out_, s);
  // A cycle with odd maximum p lies inside the subgraph of priorities <= p and contains a p-vertex.
  for (int p : odd_priorities_) {
    std::vector<char> allowed(n, 0);
    for (int v = 0; v < n; ++v)
      allowed[v] = v != g_.sink && g_.vertices[v].priority.value() <= p;
    auto comp = strongly_connected_components(succ, allowed);
    std::vector<int> size(n, 0);
    for (int v = 0; v < n; ++v)
      if (comp[v] >= 0) ++size[comp[v]];
    for (int v = 0; v < n; ++v) {
      if (!allowed[v] || g_.vertices[v].priority.value() != p) continue;
      if (size[comp[v]] > 1) return false;
      for (int w : succ[v])
        if (w == v) return false;
    }
  }
  return true;
}

ValuationMap ParityEvaluator::evaluate(const Strategy& s, bool with_multisets) const {
  if (!admissible(s)) throw GameError("strategy is not admissible");
  const int n = static_cast<int>(g_.vertices.size());
  auto succ = strategy_graph(g_, out_, s);

  std::vector<char> known(n, 0);
  std::vector<Integer> score(n);
  std::vector<int> next(n, -1);
  known[g_.sink] = 1;

  auto relax = [&](int v) {
    bool have = false;
    Integer best;
    int arg = -1;
    for (int w : succ[v]) {
      if (!known[w]) continue;
      if (!have || score[w] < best || (score[w] == best && w < arg)) {
        best = score[w];
        arg = w;
        have = true;
      }
    }
    if (!have) return false;
    Integer cand = best + weight_[v];
    if (!known[v] || cand < score[v] || (cand == score[v] && arg < next[v])) {
      bool changed = !known[v] || cand != score[v] || arg != next[v];
      score[v] = std::move(cand);
      next[v] = arg;
      known[v] = 1;
      return changed;
    }
    return false;
  };

  // Try a topological order first.
  std::vector<int> order;
  {
    std::vector<int> state(n, 0);
    bool cyclic = false;
    for (int root = 0; root < n && !cyclic; ++root) {
      if (state[root] || root == g_.sink) continue;
      std::vector<std::pair<int, std::size_t>> st{{root, 0}};
      state[root] = 1;
      while (!st.empty() && !cyclic) {
        auto& [v, i] = st.back();
        if (i < succ[v].size()) {
          int w = succ[v][i++];
          if (w == g_.sink) continue;
          if (state[w] == 1) cyclic = true;
          else if (state[w] == 0) {
            state[w] = 1;
            st.push_back({w, 0});
          }
        } else {
          state[v] = 2;
          order.push_back(v);
          st.pop_back();
        }
      }
    }
    if (cyclic) order.clear();
  }
  if (!order.empty() || n == 1) {
    for (int v : order) relax(v);
  } else {
    bool changed = true;
    int rounds = 0;
    while (changed) {
      if (++rounds > n + 1) throw GameError("valuations did not converge; strategy is not admissible");
      changed = false;
      for (int v = 0; v < n; ++v)
        if (v != g_.sink && relax(v)) changed = true;
    }
  }
  for (int v = 0; v < n; ++v)
    if (!known[v]) throw GameError("vertex " + g_.vertices[v].name + " cannot reach the sink");

  ValuationMap out;
  out.score = std::move(score);
  out.counter.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (g_.vertices[v].owner == Owner::Player1) out.counter[v] = next[v];
  if (with_multisets) {
    out.val.assign(n, ValuationMultiset{});
    std::vector<char> done(n, 0);
    done[g_.sink] = 1;
    for (int v = 0; v < n; ++v) {
      std::vector<int> path;
      int u = v;
      while (!done[u]) {
        path.push_back(u);
        u = next[u];
      }
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        out.val[*it] = multiset_insert(out.val[next[*it]], g_.vertices[*it].priority);
        done[*it] = 1;
      }
    }
  }
  return out;
}

std::vector<int> ParityEvaluator::improving_edges(const Strategy& s, const ValuationMap& v) const {
  std::vector<int> out;
  for (std::size_t b = 1; b < by_bland_.size(); ++b) {
    int e = by_bland_[b];
    const auto& [src, dst] = g_.edges[e];
    if (dst != s.choice[src] && v.score[dst] > v.score[s.choice[src]]) out.push_back(e);
  }
  return out;
}

bool is_admissible(const SinkParityGame& g, const Strategy& s) { return ParityEvaluator(g).admissible(s); }

ValuationMap valuations(const SinkParityGame& g, const Strategy& s) {
  return ParityEvaluator(g).evaluate(s, true);
}

std::vector<Edge> improving_switches(const SinkParityGame& g, const Strategy& s) {
  ParityEvaluator ev(g);
  auto v = ev.evaluate(s, false);
  std::vector<Edge> out;
  for (int e : ev.improving_edges(s, v)) out.push_back(g.edges[e]);
  return out;
}

Strategy apply_switch(const Strategy& s, const Edge& e) {
  Strategy out = s;
  out.choice.at(e.source) = e.target;
  return out;
}

SinkParityGame standard_transformation(const SinkParityGame& g) {
  std::vector<int> order;
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    if (!g.vertices[v].priority.is_bottom()) order.push_back(static_cast<int>(v));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.vertices[a].priority.value() < g.vertices[b].priority.value();
  });
  // Every collision shifts all not-yet-placed vertices by the same +2.
  SinkParityGame out = g;
  int shift = 0;
  std::optional<int> previous;
  for (int v : order) {
    int p = g.vertices[v].priority.value() + shift;
    if (previous && p == *previous) {
      shift += 2;
      p += 2;
    }
    out.vertices[v].priority = Priority(p);
    previous = p;
  }
  return out;
}

namespace {

class ParitySource : public RankingSource {
 public:
  ParitySource(const ParityEvaluator& ev, const Strategy& s, const ValuationMap& v, std::vector<ElementId> improving)
      : ev_(ev), s_(s), v_(v), improving_(std::move(improving)) {}

  const std::vector<ElementId>& improving() const override { return improving_; }

  Rational reduced_cost(ElementId b) const override {
    const auto& e = ev_.game().edges[ev_.edge_of_bland(b)];
    return Rational(v_.score[e.target] - v_.score[s_.choice[e.source]]);
  }

  Rational objective_after(ElementId b) const override {
    const auto& e = ev_.game().edges[ev_.edge_of_bland(b)];
    auto after = ev_.evaluate(apply_switch(s_, e), false);
    return Rational(std::accumulate(after.score.begin(), after.score.end(), Integer(0)));
  }

 private:
  const ParityEvaluator& ev_;
  const Strategy& s_;
  const ValuationMap& v_;
  std::vector<ElementId> improving_;
};

std::vector<long long> strategy_state(const Strategy& s) {
  return std::vector<long long>(s.choice.begin(), s.choice.end());
}

}  // namespace

RunTrace strategy_improvement(const SinkParityGame& g, const Strategy& s0, const PivotRule& rule,
                              const ParityRunOptions& options) {
  ParityEvaluator ev(g);
  if (!ev.admissible(s0)) throw GameError("initial strategy is not admissible");
  RunTrace trace;
  trace.engine = "parity";
  trace.rule = rule.name;
  trace.element_count = static_cast<long long>(g.player0_edge_count());

  Strategy s = s0;
  ValuationMap v = ev.evaluate(s, options.need_multisets);
  int memory = 1;
  auto objective = [&](const ValuationMap& val) {
    if (!options.record_objective) return std::string();
    return std::accumulate(val.score.begin(), val.score.end(), Integer(0)).str();
  };
  while (true) {
    auto imp = ev.improving_edges(s, v);
    std::map<std::string, std::string> marks;
    if (options.observer) options.observer(s, v, imp, marks);
    if (imp.empty()) {
      trace.terminal = {hash_state(strategy_state(s)), objective(v), strategy_state(s), std::move(marks)};
      break;
    }
    if (trace.steps.size() >= options.cap) {
      trace.complete = false;
      trace.terminal = {hash_state(strategy_state(s)), objective(v), strategy_state(s), std::move(marks)};
      break;
    }
    std::vector<ElementId> ids;
    for (int e : imp) ids.push_back(g.bland[e]);
    ParitySource src(ev, s, v, ids);
    Choice c = choose(rule, src, trace.element_count, memory);

    TraceStep step;
    step.state_hash = hash_state(strategy_state(s));
    step.improving = ids;
    step.ranks = std::move(c.ranks);
    step.chosen = c.element;
    step.chosen_rank = c.rank;
    step.memory = memory;
    step.objective = objective(v);
    step.diverged = c.diverged;
    step.marks = std::move(marks);
    trace.steps.push_back(std::move(step));

    const Edge& e = g.edges[ev.edge_of_bland(c.element)];
    Strategy next = apply_switch(s, e);
    ValuationMap nv = ev.evaluate(next, options.need_multisets);
    if (options.check_invariants) {
      for (std::size_t u = 0; u < g.vertices.size(); ++u)
        if (nv.score[u] < v.score[u])
          throw GameError("valuation of " + g.vertices[u].name + " decreased");
      if (!(nv.score[e.source] > v.score[e.source]))
        throw GameError("switched vertex " + g.vertices[e.source].name + " did not improve");
    }
    s = std::move(next);
    v = std::move(nv);
    memory = c.next_memory;
  }
  return trace;
}

}  // namespace pf
