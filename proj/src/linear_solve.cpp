#include "pivotforge/linear_solve.hpp"

#include <boost/multiprecision/integer.hpp>

namespace pf {
namespace {

Integer lcm_of_denominators(const RationalVector& row, const std::vector<RationalVector>& rhs, std::size_t r) {
  Integer l = 1;
  auto absorb = [&](const Rational& v) {
    const Integer& d = denominator(v);
    if (d != 1) l = boost::multiprecision::lcm(l, d);
  };
  for (const auto& v : row) absorb(v);
  for (const auto& col : rhs) absorb(col[r]);
  return l;
}

}  // namespace

std::vector<RationalVector> solve_linear(const RationalMatrix& a, const std::vector<RationalVector>& rhs) {
  const std::size_t n = a.size();
  const std::size_t cols = n + rhs.size();
  for (const auto& row : a)
    if (row.size() != n) throw std::invalid_argument("solve_linear: matrix is not square");
  for (const auto& col : rhs)
    if (col.size() != n) throw std::invalid_argument("solve_linear: right-hand side has wrong length");

  std::vector<std::vector<Integer>> m(n, std::vector<Integer>(cols));
  for (std::size_t r = 0; r < n; ++r) {
    Integer scale = lcm_of_denominators(a[r], rhs, r);
    for (std::size_t c = 0; c < n; ++c) m[r][c] = numerator(a[r][c]) * (scale / denominator(a[r][c]));
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      const Rational& v = rhs[k][r];
      m[r][n + k] = numerator(v) * (scale / denominator(v));
    }
  }

  Integer prev = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (abs(m[r][k]) > abs(m[pivot][k])) pivot = r;
    if (m[pivot][k] == 0) throw SingularMatrix();
    if (pivot != k) std::swap(m[pivot], m[k]);
    for (std::size_t r = k + 1; r < n; ++r) {
      for (std::size_t c = k + 1; c < cols; ++c) {
        m[r][c] = (m[r][c] * m[k][k] - m[r][k] * m[k][c]) / prev;
      }
      m[r][k] = 0;
    }
    prev = m[k][k];
  }

  std::vector<RationalVector> out(rhs.size(), RationalVector(n));
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    for (std::size_t ii = n; ii-- > 0;) {
      Rational acc = Rational(m[ii][n + k]);
      for (std::size_t c = ii + 1; c < n; ++c)
        if (m[ii][c] != 0) acc -= Rational(m[ii][c]) * out[k][c];
      out[k][ii] = acc / Rational(m[ii][ii]);
    }
  }
  return out;
}

RationalVector solve_linear(const RationalMatrix& a, const RationalVector& rhs) {
  return solve_linear(a, std::vector<RationalVector>{rhs}).front();
}

std::size_t matrix_rank(const RationalMatrix& a) {
  RationalMatrix m = a;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rows;
    for (std::size_t r = rank; r < rows; ++r)
      if (m[r][c] != 0) { pivot = r; break; }
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0) continue;
      Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace pf
