#pragma once

#include "pivotforge/mdp.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pf {

struct MdpInstance {
  MarkovDecisionProcess mdp;
  Policy initial;
  std::map<std::string, std::string> metadata;
};

// Two-chain binary counter with L+1 levels; eps > 0 randomizes every alpha action towards the sink.
MdpInstance gen_mdp_counter(int levels, const Rational& eps = 0);

// The b for which the policy is canonical, judged on the unperturbed counter with the same action ids.
std::optional<long long> canonical_index(const MdpInstance& unperturbed, int levels, const Policy& p);

// 1 / (largest value magnitude along the f = 1 run on the unperturbed counter * 2^10).
Rational default_counter_epsilon(int levels);

// Every non-sink action becomes k two-hop copies through fresh states.
MdpInstance gen_mdp_copied(const MdpInstance& base, int k);

// Counter with each action routed through a delta/epsilon gate; gate probabilities scale with powers of 1/scale.
MdpInstance gen_mdp_delta(int levels, long long scale);

enum class DeltaKind { Entry, Back, Gate, Exit, Other };
DeltaKind delta_kind(const Action& a);

struct DeltaAudit {
  bool agreement = true;         // all three rankings agree at every visited policy
  bool entry_most_preferred = true;
  long long iterations = 0;
  long long counter_advances = 0;  // switches of the form x -> delta(x, y)
  long long first_failure = -1;
  std::string note;
};

DeltaAudit audit_delta(const MdpInstance& inst, unsigned long long cap = 1ULL << 24);
// Doubles the scale from 2 until audit_delta passes; returns the final scale.
long long find_delta_scale(int levels, int max_doublings = 24);

struct GammaParams {
  int levels = 2;
  long long scale = 2;
  long long counter_scale = 2;
  long long m_i = 0;
  long long f_m = 0;             // f(m_i)
  Rational lower;                // L_bound
  Rational upper;                // U_bound
  std::string bounds_method;     // "enumeration" or "analytic"
};

struct GammaInstance {
  MdpInstance inst;
  MdpInstance counter;           // embedded delta counter padded to f(m_i) + 1 actions
  GammaParams params;
  std::vector<int> s1, s2, s3;   // action ids per preference class
  std::vector<int> s2_source;    // counter action behind each s2 entry
};

// Largest L whose delta counter has at most f(m_i) + 1 actions, or nullopt.
std::optional<int> gamma_levels(long long f_m);
// scale spaces the wrapper probabilities; counter_scale (0 = searched) drives the embedded delta counter.
GammaInstance gen_mdp_gamma(int levels, long long scale, const std::function<long long(long long)>& f, long long m_i,
                            long long counter_scale = 0);

struct GammaAudit {
  bool count_ok = true;          // m_i improving switches along the phase
  bool pick_ok = true;           // the pick is the most-preferred improving switch of S_2
  bool mimic_ok = true;          // same switches as the f(k)=k run on the embedded counter
  bool agreement = true;
  bool decoy_ok = true;          // rc of each decoy equals U + k
  long long phase_length = 0;
  long long iterations = 0;
  std::string note;
};

GammaAudit audit_gamma(const GammaInstance& g, const RankPicker& f, unsigned long long cap = 1ULL << 20);
// Smallest power of two above 1 + 2U/L.
long long gamma_scale_floor(const GammaParams& p);
// Doubles the wrapper scale from gamma_scale_floor until every gamma audit passes.
long long find_gamma_scale(int levels, const std::function<long long(long long)>& f, long long m_i,
                           const RankPicker& pick, int max_doublings = 24);

}  // namespace pf
