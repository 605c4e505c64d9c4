#pragma once

#include <vector>

namespace pf {

using ElementId = long long;

// Tiers least-preferred first; elements outside the improving set are absent.
struct TotalPreorder {
  std::vector<std::vector<ElementId>> tiers;
  friend bool operator==(const TotalPreorder&, const TotalPreorder&) = default;
};

}  // namespace pf
