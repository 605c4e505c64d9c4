#pragma once

#include "pivotforge/rational.hpp"

#include <stdexcept>

namespace pf {

struct SingularMatrix : std::runtime_error {
  SingularMatrix() : std::runtime_error("singular matrix") {}
};

// Solves a x = rhs_k for every right-hand side with fraction-free (Bareiss)
// elimination and partial pivoting on the largest exact magnitude.
std::vector<RationalVector> solve_linear(const RationalMatrix& a, const std::vector<RationalVector>& rhs);
RationalVector solve_linear(const RationalMatrix& a, const RationalVector& rhs);

std::size_t matrix_rank(const RationalMatrix& a);

}  // namespace pf
