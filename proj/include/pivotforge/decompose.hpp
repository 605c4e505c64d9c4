#pragma once

#include "pivotforge/pivot_rules.hpp"

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pf {

// Closed interval [p, p + q].
struct Interval {
  long long p = 1;
  long long q = 0;
  long long end() const { return p + q; }
  bool contains(long long x) const { return p <= x && x <= end(); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ClusteredCertificate {
  std::vector<Interval> intervals;
};

struct DispersedCertificate {
  long long psi = 1;
  long long xi = 0;
  std::vector<Interval> intervals;
};

using Certificate = std::variant<ClusteredCertificate, DispersedCertificate>;

struct DecomposeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws DecomposeError unless m >= 4*l, 1 <= |seq| <= l and seq lies in [1, m].
Certificate decompose(const std::vector<long long>& seq, long long m, long long l);

bool verify_clustered(const ClusteredCertificate& cert, const std::vector<long long>& seq, long long m, long long l,
                      std::string* why = nullptr);
bool verify_dispersed(const DispersedCertificate& cert, const std::vector<long long>& seq, long long m, long long l,
                      std::string* why = nullptr);
bool verify_certificate(const Certificate& cert, const std::vector<long long>& seq, long long m, long long l,
                        std::string* why = nullptr);

// Disjoint intervals inside [lo, hi] covering seq, each of length twice its element count.
std::vector<Interval> double_intervals(const std::vector<long long>& seq, long long lo, long long hi);

struct CycleSequence {
  std::vector<long long> g;  // g[0] is the first pick
  std::vector<int> h;        // h[0] = 1
  int cycle_end = 0;         // number of distinct memory states visited
  int reentry = 1;           // 1-based index of the state the selector returns to
  std::vector<long long> cycle() const { return {g.begin() + (reentry - 1), g.end()}; }
};

CycleSequence cycle_sequence(const IndexSelector& p, long long m_i);

std::string certificate_to_json(const Certificate& cert);

}  // namespace pf
