#pragma once

#include "pivotforge/rational.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <string>

namespace pf {

// A vertex priority; the bottom element stands for minus infinity.
class Priority {
 public:
  Priority() = default;
  explicit Priority(int value) : value_(value), bottom_(false) {}
  static Priority bottom() { return Priority(); }

  bool is_bottom() const { return bottom_; }
  int value() const;

  friend bool operator==(const Priority&, const Priority&) = default;
  friend std::strong_ordering operator<=>(const Priority& a, const Priority& b) {
    if (a.bottom_ || b.bottom_) return b.bottom_ <=> a.bottom_;
    return a.value_ <=> b.value_;
  }

  std::string to_string() const;

 private:
  int value_ = 0;
  bool bottom_ = true;
};

enum class Ordering { Less, Equal, Greater };

const char* to_string(Ordering o);

// Multiset of finite priorities; bottom is never stored.
class ValuationMultiset {
 public:
  ValuationMultiset() = default;
  ValuationMultiset(std::initializer_list<int> priorities);

  const std::map<int, std::uint32_t>& counts() const { return counts_; }
  bool empty() const { return counts_.empty(); }
  std::size_t size() const;

  friend bool operator==(const ValuationMultiset&, const ValuationMultiset&) = default;

  std::string to_string() const;

 private:
  friend ValuationMultiset multiset_insert(const ValuationMultiset&, Priority);
  std::map<int, std::uint32_t> counts_;
};

// (-t)^p; zero for bottom.
Integer signed_power(std::int64_t t, Priority p);

Integer eval_multiset(const ValuationMultiset& s, std::int64_t t);
Ordering compare_valuations(const ValuationMultiset& s1, const ValuationMultiset& s2, std::int64_t t);
ValuationMultiset multiset_insert(const ValuationMultiset& s, Priority p);

}  // namespace pf
