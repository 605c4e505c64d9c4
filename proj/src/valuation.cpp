#include "pivotforge/valuation.hpp"

#include <stdexcept>

namespace pf {

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(text));
    Integer num(text.substr(0, slash));
    Integer den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
}

std::string format_rational(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

int Priority::value() const {
  if (bottom_) throw std::logic_error("bottom priority has no value");
  return value_;
}

std::string Priority::to_string() const { return bottom_ ? "-inf" : std::to_string(value_); }

const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::Less: return "Less";
    case Ordering::Equal: return "Equal";
    case Ordering::Greater: return "Greater";
  }
  return "?";
}

ValuationMultiset::ValuationMultiset(std::initializer_list<int> priorities) {
  for (int p : priorities) ++counts_[p];
}

std::size_t ValuationMultiset::size() const {
  std::size_t n = 0;
  for (const auto& [p, c] : counts_) n += c;
  return n;
}

std::string ValuationMultiset::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [p, c] : counts_) {
    for (std::uint32_t i = 0; i < c; ++i) {
      if (!first) out += ",";
      out += std::to_string(p);
      first = false;
    }
  }
  return out + "}";
}

Integer signed_power(std::int64_t t, Priority p) {
  if (t < 1) throw std::invalid_argument("base t must be positive");
  if (p.is_bottom()) return 0;
  if (p.value() < 0) throw std::invalid_argument("negative priorities are not supported");
  Integer r = boost::multiprecision::pow(Integer(t), static_cast<unsigned>(p.value()));
  return (p.value() % 2 == 0) ? r : Integer(-r);
}

Integer eval_multiset(const ValuationMultiset& s, std::int64_t t) {
  Integer sum = 0;
  for (const auto& [p, c] : s.counts()) sum += signed_power(t, Priority(p)) * c;
  return sum;
}

Ordering compare_valuations(const ValuationMultiset& s1, const ValuationMultiset& s2, std::int64_t t) {
  Integer a = eval_multiset(s1, t);
  Integer b = eval_multiset(s2, t);
  if (a < b) return Ordering::Less;
  if (a > b) return Ordering::Greater;
  return Ordering::Equal;
}

ValuationMultiset multiset_insert(const ValuationMultiset& s, Priority p) {
  ValuationMultiset out = s;
  if (!p.is_bottom()) ++out.counts_[p.value()];
  return out;
}

}  // namespace pf
