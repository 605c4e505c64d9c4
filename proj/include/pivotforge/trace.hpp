#pragma once

#include "pivotforge/pivot_types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pf {

// One row per iteration: the state before the switch and the rule's choice.
struct TraceStep {
  std::uint64_t state_hash = 0;
  std::vector<ElementId> improving;   // Bland numbers, ascending
  std::vector<TotalPreorder> ranks;   // per ranking, tiers of 1-based positions in `improving`
  ElementId chosen = 0;
  int chosen_rank = 0;                // position of `chosen` in `improving`
  int memory = 1;
  std::string objective;
  bool diverged = false;
  std::map<std::string, std::string> marks;
};

struct TerminalRecord {
  std::uint64_t state_hash = 0;
  std::string objective;
  std::vector<long long> state;       // strategy targets, policy actions or basis indices
  std::map<std::string, std::string> marks;
};

struct RunTrace {
  std::string engine;
  std::string rule;
  long long element_count = 0;
  std::vector<TraceStep> steps;
  TerminalRecord terminal;
  bool complete = true;               // false when the iteration cap stopped the run

  std::size_t iterations() const { return steps.size(); }
};

std::uint64_t hash_state(const std::vector<long long>& state);

}  // namespace pf

namespace pf {

std::string serialize_trace(const RunTrace& trace);
RunTrace parse_trace(const std::string& text);

}  // namespace pf
