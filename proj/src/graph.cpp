#include "pivotforge/graph.hpp"

#include <algorithm>

namespace pf {

std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& succ,
                                               const std::vector<char>& allowed_in) {
  const int n = static_cast<int>(succ.size());
  std::vector<char> allowed = allowed_in.empty() ? std::vector<char>(n, 1) : allowed_in;
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on(n, 0);
  int counter = 0, ncomp = 0;
  struct Frame { int v; std::size_t i; };
  for (int root = 0; root < n; ++root) {
    if (!allowed[root] || index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.i < succ[f.v].size()) {
        int w = succ[f.v][f.i++];
        if (!allowed[w]) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on[w] = 1;
          frames.push_back({w, 0});
        } else if (on[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      int v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
    }
  }
  return comp;
}

}  // namespace pf
