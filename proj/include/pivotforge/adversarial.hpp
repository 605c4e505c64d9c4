#pragma once

#include "pivotforge/decompose.hpp"
#include "pivotforge/gadgets.hpp"

#include <string>
#include <vector>

namespace pf {

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdversarialInstance {
  GameInstance raw;                 // before the standard transformation
  GameInstance game;                // priorities made unique
  Certificate certificate;
  CycleSequence cycle;
  std::vector<std::string> role;    // role[b - 1] for Bland number b
  int counter_levels = 0;           // levels of each embedded counter
  int delay = 1;                    // switches per counter step on the dispersed path
  long long improving_target = 0;   // m_i / 3
  long long min_counting_phase = 0; // prefix steps plus the counter switches of one counter
};

struct CountingPhaseReport {
  bool ok = true;
  long long iterations = 0;
  long long phase_length = 0;       // steps before the first helper-edge switch
  long long first_bad_step = -1;
  std::string note;
};

// Builds the game for an index selector; `verify` runs the unshifted game and throws on a count violation.
AdversarialInstance build_adversarial_parity(const IndexSelector& p, long long m_i, int l_i, bool verify = true);

// Runs SI with the selector's index rule and checks the improving count during the counting phase.
CountingPhaseReport audit_counting_phase(const AdversarialInstance& inst, const SinkParityGame& g,
                                         const IndexSelector& p, unsigned long long cap = 1ULL << 24);

// iterations >= 2^(m_i / (12 l_i) - 1), compared exactly.
bool meets_exponential_bound(long long iterations, long long m_i, long long l_i);

}  // namespace pf
