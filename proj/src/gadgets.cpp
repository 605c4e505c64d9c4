#include "pivotforge/gadgets.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace pf {

GameDraft::GameDraft() {
  game_.add_sink("top");
  key_.resize(game_.edges.size());
  removed_.resize(game_.edges.size(), 0);
  choice_.assign(game_.vertices.size(), -1);
}

GameDraft GameDraft::from(const GameInstance& inst) {
  GameDraft d;
  d.game_ = inst.game;
  d.key_.clear();
  for (long long b : inst.game.bland) d.key_.emplace_back(b);
  d.removed_.assign(inst.game.edges.size(), 0);
  d.choice_ = inst.initial.choice;
  d.choice_.resize(inst.game.vertices.size(), -1);
  for (const auto& v : inst.game.vertices) d.name_counter_[v.name] = 1;
  return d;
}

int GameDraft::add_vertex(Owner owner, Priority priority, std::string name) {
  if (name_counter_.count(name)) name = fresh_name(name);
  name_counter_[name] = 1;
  int v = game_.add_vertex(owner, priority, std::move(name));
  choice_.push_back(-1);
  return v;
}

std::string GameDraft::fresh_name(const std::string& stem) {
  int& next = name_counter_[stem + "#"];
  std::string name;
  do {
    name = stem + "_" + std::to_string(++next);
  } while (name_counter_.count(name));
  return name;
}

int GameDraft::add_edge(int source, int target, Rational key) {
  int e = game_.add_edge(source, target);
  key_.push_back(std::move(key));
  removed_.push_back(0);
  return e;
}

void GameDraft::remove_edge(int e) {
  removed_.at(e) = 1;
  int s = game_.edges[e].source;
  if (choice_[s] == game_.edges[e].target) choice_[s] = -1;
}

std::vector<int> GameDraft::live_out(int v) const {
  std::vector<int> out;
  for (std::size_t e = 0; e < game_.edges.size(); ++e)
    if (!removed_[e] && game_.edges[e].source == v) out.push_back(static_cast<int>(e));
  return out;
}

std::vector<int> GameDraft::live_player0_edges() const {
  std::vector<int> out;
  for (std::size_t e = 0; e < game_.edges.size(); ++e)
    if (!removed_[e] && game_.is_player0_edge(static_cast<int>(e))) out.push_back(static_cast<int>(e));
  return out;
}

Rational GameDraft::max_key() const {
  Rational best = 0;
  for (int e : live_player0_edges()) best = std::max(best, key_[e]);
  return best;
}

GameInstance GameDraft::finalize(std::vector<int>* edge_index) const {
  GameInstance inst;
  inst.game.vertices = game_.vertices;
  inst.game.sink = game_.sink;
  std::vector<int> index(game_.edges.size(), -1);
  for (std::size_t e = 0; e < game_.edges.size(); ++e) {
    if (removed_[e]) continue;
    index[e] = inst.game.add_edge(game_.edges[e].source, game_.edges[e].target);
  }
  std::vector<int> p0 = live_player0_edges();
  std::stable_sort(p0.begin(), p0.end(), [&](int a, int b) { return key_[a] < key_[b]; });
  for (std::size_t r = 0; r < p0.size(); ++r) inst.game.bland[index[p0[r]]] = static_cast<long long>(r) + 1;

  inst.initial.choice.assign(game_.vertices.size(), -1);
  for (std::size_t v = 0; v < game_.vertices.size(); ++v) {
    if (game_.vertices[v].owner != Owner::Player0) continue;
    std::vector<int> out = live_out(static_cast<int>(v));
    int want = choice_[v];
    if (want < 0 && out.size() == 1) want = game_.edges[out[0]].target;
    bool ok = std::any_of(out.begin(), out.end(), [&](int e) { return game_.edges[e].target == want; });
    if (!ok) throw GameError("no initial choice for vertex " + game_.vertices[v].name);
    inst.initial.choice[v] = want;
  }
  if (edge_index) *edge_index = std::move(index);
  return inst;
}

std::vector<int> draft_improving(const GameDraft& d) {
  std::vector<int> index;
  GameInstance inst = d.finalize(&index);
  ParityEvaluator ev(inst.game);
  std::vector<int> live = ev.improving_edges(inst.initial, ev.evaluate(inst.initial, false));
  std::vector<int> back(inst.game.edges.size(), -1);
  for (std::size_t e = 0; e < index.size(); ++e)
    if (index[e] >= 0) back[index[e]] = static_cast<int>(e);
  std::vector<int> out;
  for (int e : live) out.push_back(back[e]);
  return out;
}

std::vector<int> draft_multiplier(GameDraft& d, int edge, int copies) {
  if (copies < 1) throw GameError("multiplier needs at least one copy");
  const SinkParityGame& g = d.game();
  if (!g.is_player0_edge(edge) || d.removed(edge)) throw GameError("multiplier needs a live player-0 edge");
  int x = g.edges[edge].source, y = g.edges[edge].target;
  Rational base = d.key(edge);
  bool chosen = d.choice(x) == y;
  std::string stem = g.vertices[x].name + ">" + g.vertices[y].name + "~h";
  d.remove_edge(edge);
  // Later copies get smaller ids so that the first copy ends up with the highest shifted priority.
  std::vector<int> hubs(copies);
  for (int j = copies; j >= 1; --j) hubs[j - 1] = d.add_vertex(Owner::Player1, Priority(0), stem + std::to_string(j));
  std::vector<int> edges;
  for (int j = 1; j <= copies; ++j) {
    edges.push_back(d.add_edge(x, hubs[j - 1], base + Rational(j - 1, copies)));
    d.add_edge(hubs[j - 1], y);
  }
  if (chosen) d.choose(x, hubs[0]);
  return edges;
}

ControllerParts draft_controller(GameDraft& d, int edge) {
  const SinkParityGame& g = d.game();
  if (!g.is_player0_edge(edge) || d.removed(edge)) throw GameError("controller needs a live player-0 edge");
  int x = g.edges[edge].source, y = g.edges[edge].target;
  std::string stem = g.vertices[x].name + ">" + g.vertices[y].name;
  Priority px = g.vertices[x].priority;
  ControllerParts c;
  c.z = d.add_vertex(Owner::Player0, Priority(2), stem + "~z");
  c.v = d.add_vertex(Owner::Player1, px, stem + "~v");
  c.w = d.add_vertex(Owner::Player1, Priority(1), stem + "~w");
  Rational top = d.max_key();
  c.a = d.add_edge(c.z, c.v, top + 1);
  c.a_prime = d.add_edge(c.z, x, top + 2);
  d.add_edge(c.v, c.w);
  d.add_edge(c.w, y);
  d.choose(c.z, c.v);
  return c;
}

FillerParts draft_filler(GameDraft& d, const std::string& prefix) {
  FillerParts f;
  f.x = d.add_vertex(Owner::Player0, Priority(2), d.fresh_name(prefix + "x"));
  f.y = d.add_vertex(Owner::Player0, Priority(3), d.fresh_name(prefix + "y"));
  Rational top = d.max_key();
  f.y_x = d.add_edge(f.y, f.x, top + 1);
  f.x_sink = d.add_edge(f.x, d.sink(), top + 2);
  f.y_sink = d.add_edge(f.y, d.sink(), top + 3);
  d.choose(f.x, d.sink());
  d.choose(f.y, d.sink());
  return f;
}

DelayerParts draft_delayer(GameDraft& d, int vertex, int k, int x, int y, int l_count, const std::string& prefix) {
  if (k < 0) throw GameError("delayer needs k >= 0");
  if (l_count < 0 || l_count > k + 1) throw GameError("delayer initial split out of range");
  DelayerParts p;
  p.z.assign(k + 2, -1);
  for (int j = 1; j <= k + 1; ++j)
    p.z[j] = d.add_vertex(Owner::Player0, Priority(1), d.fresh_name(prefix + "z" + std::to_string(j)));
  p.exit_x = d.add_vertex(Owner::Player1, Priority(2), d.fresh_name(prefix + "ux"));
  p.exit_y = d.add_vertex(Owner::Player1, Priority(2), d.fresh_name(prefix + "uy"));
  Rational top = d.max_key();
  p.l.assign(k + 1, -1);
  p.r.assign(k + 1, -1);
  p.l[0] = d.add_edge(p.z[1], p.exit_x, top + 1);
  for (int j = 1; j <= k; ++j) p.l[j] = d.add_edge(p.z[j + 1], p.z[j], top + 1 + j);
  p.r[0] = d.add_edge(p.z[k + 1], p.exit_y, top + k + 2);
  for (int j = 1; j <= k; ++j) p.r[j] = d.add_edge(p.z[k + 1 - j], p.z[k + 2 - j], top + k + 2 + j);
  d.add_edge(p.exit_x, p.z[k + 1]);
  d.add_edge(p.exit_x, x);
  d.add_edge(p.exit_y, p.z[1]);
  d.add_edge(p.exit_y, y);
  for (int j = 1; j <= k + 1; ++j) {
    int e = j <= l_count ? p.l[j - 1] : p.r[k + 1 - j];
    d.choose(p.z[j], d.game().edges[e].target);
  }
  if (vertex >= 0) {
    for (int e : d.live_out(vertex)) d.remove_edge(e);
    d.set_owner(vertex, Owner::Player1);
    d.choose(vertex, -1);
    d.add_edge(vertex, p.z[1]);
  }
  return p;
}

DoubleFillerParts draft_double_filler(GameDraft& d, const std::string& prefix) {
  DoubleFillerParts f;
  f.x = d.add_vertex(Owner::Player0, Priority(2), d.fresh_name(prefix + "x"));
  f.y = d.add_vertex(Owner::Player0, Priority(1), d.fresh_name(prefix + "y"));
  f.z = d.add_vertex(Owner::Player1, Priority(3), d.fresh_name(prefix + "z"));
  f.w = d.add_vertex(Owner::Player0, Priority(1), d.fresh_name(prefix + "w"));
  Rational top = d.max_key();
  f.a1 = d.add_edge(f.x, d.sink(), top + 1);
  f.a2 = d.add_edge(f.y, f.x, top + 2);
  f.a3 = d.add_edge(f.y, d.sink(), top + 3);
  f.b1 = d.add_edge(f.x, f.z, top + 4);
  f.b2 = d.add_edge(f.w, f.x, top + 5);
  f.b3 = d.add_edge(f.w, f.z, top + 6);
  d.add_edge(f.z, d.sink());
  d.choose(f.x, f.z);
  d.choose(f.y, d.sink());
  d.choose(f.w, f.z);
  return f;
}

namespace {

int find_live_player0_edge(const GameDraft& d, const Edge& e) {
  const SinkParityGame& g = d.game();
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (!d.removed(static_cast<int>(i)) && g.edges[i] == e) {
      if (!g.is_player0_edge(static_cast<int>(i))) throw GameError("edge is not a player-0 edge");
      return static_cast<int>(i);
    }
  throw GameError("edge not found");
}

GameInstance carry_metadata(GameInstance out, const GameInstance& in) {
  out.metadata = in.metadata;
  return out;
}

// Key strictly between the (rank-1)-th and rank-th entries of the sorted list.
Rational key_at_rank(std::vector<Rational> keys, int rank) {
  std::sort(keys.begin(), keys.end());
  if (keys.empty()) return 0;
  if (rank <= 1) return keys.front() - 1;
  if (rank > static_cast<int>(keys.size())) return keys.back() + 1;
  return (keys[rank - 2] + keys[rank - 1]) / 2;
}

}  // namespace

GameInstance gadget_multiplier(const GameInstance& g, const Edge& e, int copies) {
  GameDraft d = GameDraft::from(g);
  draft_multiplier(d, find_live_player0_edge(d, e), copies);
  return carry_metadata(d.finalize(), g);
}

GameInstance gadget_controller(const GameInstance& g, const Edge& e, bool check_precondition) {
  GameDraft d = GameDraft::from(g);
  int edge = find_live_player0_edge(d, e);
  if (check_precondition) {
    auto low = min_reachable_priority(g.game, e.source);
    if (low && *low < 2) throw GameError("controller precondition: a priority below 2 is reachable from the source");
  }
  draft_controller(d, edge);
  return carry_metadata(d.finalize(), g);
}

GameInstance gadget_filler(const GameInstance& g, long long bland_position) {
  GameDraft d = GameDraft::from(g);
  long long m = static_cast<long long>(d.live_player0_edges().size());
  if (bland_position < 1 || bland_position > m + 1) throw GameError("filler position out of range");
  FillerParts f = draft_filler(d);
  Rational base(bland_position - 1);
  d.set_key(f.y_x, base + Rational(1, 4));
  d.set_key(f.x_sink, base + Rational(1, 2));
  d.set_key(f.y_sink, base + Rational(3, 4));
  return carry_metadata(d.finalize(), g);
}

GameInstance gadget_delayer(const GameInstance& g, int vertex, int k, int x, int y) {
  if (k < 1) throw GameError("delayer needs k >= 1");
  GameDraft d = GameDraft::from(g);
  const SinkParityGame& game = d.game();
  if (vertex < 0 || vertex >= static_cast<int>(game.vertices.size()) || game.vertices[vertex].owner != Owner::Player0)
    throw GameError("delayer needs a player-0 vertex");
  std::vector<int> out = d.live_out(vertex);
  if (out.size() != 2) throw GameError("delayer vertex must have exactly two successors");
  auto target_of = [&](int e) { return game.edges[e].target; };
  if (!((target_of(out[0]) == x && target_of(out[1]) == y) || (target_of(out[0]) == y && target_of(out[1]) == x)))
    throw GameError("delayer vertex successors must be x and y");
  Rational low = std::min(d.key(out[0]), d.key(out[1]));
  int l_count = d.choice(vertex) == x ? k + 1 : 0;
  DelayerParts p = draft_delayer(d, vertex, k, x, y, l_count, game.vertices[vertex].name + "~");
  Rational step(1, 2 * k + 3);
  for (int j = 0; j <= k; ++j) {
    d.set_key(p.l[j], low - 1 + step * (j + 1));
    d.set_key(p.r[j], low - 1 + step * (k + 2 + j));
  }
  return carry_metadata(d.finalize(), g);
}

GameInstance gadget_double_filler(const GameInstance& g, long long slot_a, long long slot_b, int a1_rank) {
  GameDraft d = GameDraft::from(g);
  long long m = static_cast<long long>(d.live_player0_edges().size());
  for (long long s : {slot_a, slot_b})
    if (s < 1 || s > m + 1) throw GameError("double filler slot out of range");
  DoubleFillerParts f = draft_double_filler(d);
  Rational a(slot_a - 1), b(slot_b - 1);
  d.set_key(f.a2, a + Rational(1, 4));
  d.set_key(f.a3, a + Rational(1, 2));
  d.set_key(f.a1, a + Rational(3, 4));
  d.set_key(f.b2, b + Rational(1, 5));
  d.set_key(f.b1, b + Rational(2, 5));
  d.set_key(f.b3, b + Rational(3, 5));
  std::vector<Rational> others;
  for (int e : draft_improving(d))
    if (e != f.a1) others.push_back(d.key(e));
  d.set_key(f.a1, key_at_rank(others, a1_rank));
  return carry_metadata(d.finalize(), g);
}

std::optional<int> min_reachable_priority(const SinkParityGame& g, int v) {
  auto out = g.out_edges();
  std::vector<char> seen(g.vertices.size(), 0);
  std::deque<int> queue;
  for (int e : out[v]) queue.push_back(g.edges[e].target);
  std::optional<int> best;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (seen[u]) continue;
    seen[u] = 1;
    if (u == g.sink) continue;
    int p = g.vertices[u].priority.value();
    if (!best || p < *best) best = p;
    for (int e : out[u]) queue.push_back(g.edges[e].target);
  }
  return best;
}

}  // namespace pf
