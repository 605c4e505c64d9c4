#pragma once

#include "pivotforge/pivot_rules.hpp"
#include "pivotforge/rational.hpp"
#include "pivotforge/trace.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pf {

// max c'x subject to Ax = b, x >= 0.
struct LinearProgram {
  RationalMatrix a;
  RationalVector b;
  RationalVector c;

  std::size_t rows() const { return a.size(); }
  std::size_t cols() const { return c.size(); }
};

// Column indices are 0-based internally; traces and JSON use 1-based element ids.
struct Basis {
  std::vector<int> indices;  // sorted ascending
  friend bool operator==(const Basis&, const Basis&) = default;
};

struct LpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateStep : LpError {
  DegenerateStep() : LpError("degenerate step") {}
};
struct UnboundedDirection : LpError {
  UnboundedDirection() : LpError("unbounded direction") {}
};

void validate_lp(const LinearProgram& lp);

struct BasicSolution {
  RationalVector x;
  bool feasible = false;
};

BasicSolution bfs_from_basis(const LinearProgram& lp, const Basis& basis);
// Full-length vector; basic entries are zero.
RationalVector reduced_costs(const LinearProgram& lp, const Basis& basis);
Basis pivot(const LinearProgram& lp, const Basis& basis, int entering);
Rational brute_force_optimum(const LinearProgram& lp);

// One basis with its solves, plus lazily computed edge directions.
class LpState {
 public:
  LpState(const LinearProgram& lp, Basis basis);
  const Basis& basis() const { return basis_; }
  const RationalVector& x() const { return x_; }
  const RationalVector& reduced_costs() const { return rc_; }
  Rational objective() const;
  bool feasible() const;
  bool nondegenerate() const;
  std::vector<int> improving() const;
  // Change of x per unit of the entering variable.
  const RationalVector& direction(int entering) const;
  // Step length of the ratio test; throws DegenerateStep or UnboundedDirection.
  Rational step_length(int entering, int* leaving = nullptr) const;
  Basis neighbor(int entering) const;

 private:
  const LinearProgram* lp_;
  Basis basis_;
  RationalMatrix ab_;
  RationalVector x_, rc_;
  mutable std::map<int, RationalVector> directions_;
};

using SimplexObserver = std::function<void(const LpState&, const std::vector<int>& improving,
                                           std::map<std::string, std::string>& marks)>;

struct SimplexRunOptions {
  unsigned long long cap = 1ULL << 40;
  bool check_invariants = true;
  bool record_objective = true;
  bool record_reduced_costs = false;
  SimplexObserver observer;
};

RunTrace simplex(const LinearProgram& lp, const Basis& basis0, const PivotRule& rule,
                 const SimplexRunOptions& options = {});

std::string lp_to_json(const LinearProgram& lp, const Basis* basis = nullptr);
LinearProgram lp_from_json(const std::string& text, std::optional<Basis>* basis = nullptr);
// Plain equality-form listing for external cross-checks.
std::string lp_to_text(const LinearProgram& lp);

}  // namespace pf
