#include "pivotforge/gadgets.hpp"

namespace pf {

CounterParts draft_counter(GameDraft& d, int n, const std::string& prefix) {
  if (n < 1) throw GameError("counter needs n >= 1");
  CounterParts c;
  c.a.assign(n + 2, -1);
  c.b.assign(n + 2, -1);
  for (int i = 1; i <= n + 1; ++i) {
    if (i <= n) c.a[i] = d.add_vertex(Owner::Player0, Priority(2 * i + 1), prefix + "a" + std::to_string(i));
    c.b[i] = d.add_vertex(Owner::Player1, Priority(2 * i + 2), prefix + "b" + std::to_string(i));
  }
  c.a[n + 1] = d.sink();
  for (int i = 1; i <= n; ++i) {
    c.edges.push_back(d.add_edge(c.a[i], c.a[i + 1], 2 * i - 1));
    c.edges.push_back(d.add_edge(c.a[i], c.b[i + 1], 2 * i));
    d.choose(c.a[i], c.a[i + 1]);
  }
  for (int i = 1; i <= n; ++i) {
    d.add_edge(c.b[i], c.b[i + 1]);
    d.add_edge(c.b[i], c.a[i + 1]);
  }
  d.add_edge(c.b[n + 1], d.sink());
  return c;
}

GameInstance gen_counter_game(int n) {
  GameDraft d;
  draft_counter(d, n);
  GameInstance inst = d.finalize();
  inst.metadata["family"] = "counter-parity";
  inst.metadata["n"] = std::to_string(n);
  return inst;
}

}  // namespace pf
