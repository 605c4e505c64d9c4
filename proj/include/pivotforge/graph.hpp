#pragma once

#include <vector>

namespace pf {

// Tarjan components over vertices with allowed[v] (all when empty); ids are
// assigned in reverse topological order, so successors get smaller ids.
std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& succ,
                                               const std::vector<char>& allowed = {});

}  // namespace pf
