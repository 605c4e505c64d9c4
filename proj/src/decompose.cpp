#include "pivotforge/decompose.hpp"

#include <algorithm>
#include <map>
#include <json.hpp>

namespace pf {

namespace {

long long count_in(const std::vector<long long>& seq, const Interval& iv) {
  return std::count_if(seq.begin(), seq.end(), [&](long long x) { return iv.contains(x); });
}

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

bool disjoint_and_inside(std::vector<Interval> all, long long m, std::string* why) {
  for (const auto& iv : all) {
    if (iv.q < 0) return fail(why, "negative interval length");
    if (iv.p < 1 || iv.end() > m) return fail(why, "interval outside [1,m]");
  }
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.p < b.p; });
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i].p <= all[i - 1].end()) return fail(why, "intervals overlap");
  return true;
}

bool covers(const std::vector<Interval>& all, const std::vector<long long>& seq, std::string* why) {
  for (long long x : seq)
    if (std::none_of(all.begin(), all.end(), [&](const Interval& iv) { return iv.contains(x); }))
      return fail(why, "element " + std::to_string(x) + " not covered");
  return true;
}

std::vector<Interval> shifted(std::vector<Interval> v, long long by) {
  for (auto& iv : v) iv.p += by;
  return v;
}

Certificate shifted(Certificate c, long long by) {
  if (auto* cl = std::get_if<ClusteredCertificate>(&c)) {
    cl->intervals = shifted(cl->intervals, by);
  } else {
    auto& d = std::get<DispersedCertificate>(c);
    d.psi += by;
    d.intervals = shifted(d.intervals, by);
  }
  return c;
}

Certificate solve(const std::vector<long long>& seq, long long m, long long l) {
  const long long d = m / (2 * l);
  const long long lp = static_cast<long long>(seq.size());
  if (lp == 1) {
    long long i = seq[0];
    DispersedCertificate c;
    if (i <= d) {
      c.psi = i;
    } else {
      c.psi = i - d + 1;
    }
    c.xi = d - 1;
    return c;
  }
  long long lo = *std::min_element(seq.begin(), seq.end());
  long long hi = *std::max_element(seq.begin(), seq.end());
  long long lambda = std::count(seq.begin(), seq.end(), lo);
  long long lambda_top = std::count(seq.begin(), seq.end(), hi);

  if (hi <= 2 * lp) return ClusteredCertificate{{Interval{1, 2 * d * lp - 1}}};
  if (lo >= m - 2 * lp + 1) return ClusteredCertificate{{Interval{m - 2 * d * lp + 1, 2 * d * lp - 1}}};

  if (lambda * d < lo) {
    DispersedCertificate c;
    c.psi = lo - lambda * d + 1;
    c.xi = lambda * d - 1;
    std::vector<long long> rest;
    for (long long x : seq)
      if (x != lo) rest.push_back(x);
    c.intervals = double_intervals(rest, lo + 1, m);
    return c;
  }
  if (hi < m - lambda_top * d + 1) {
    DispersedCertificate c;
    c.psi = hi;
    c.xi = lambda_top * d - 1;
    std::vector<long long> rest;
    for (long long x : seq)
      if (x != hi) rest.push_back(x);
    c.intervals = double_intervals(rest, 1, hi - 1);
    return c;
  }

  // Split at a fixed point of eta -> |{c : i_c <= 2 d eta}|.
  long long eta = -1;
  for (long long e = lambda; e <= lp - lambda_top; ++e) {
    long long f = std::count_if(seq.begin(), seq.end(), [&](long long x) { return x <= 2 * d * e; });
    if (f == e) {
      eta = e;
      break;
    }
  }
  if (eta < 1) throw DecomposeError("no split point found");
  const long long cut = 2 * d * eta;
  std::vector<long long> left, right;
  for (long long x : seq) (x <= cut ? left : right).push_back(x);
  for (long long& x : right) x -= cut;
  Certificate a = solve(left, cut, eta);
  Certificate b = shifted(solve(right, m - cut, l - eta), cut);

  auto* ca = std::get_if<ClusteredCertificate>(&a);
  auto* cb = std::get_if<ClusteredCertificate>(&b);
  if (ca && cb) {
    ClusteredCertificate c = *ca;
    c.intervals.insert(c.intervals.end(), cb->intervals.begin(), cb->intervals.end());
    return c;
  }
  std::vector<long long> right_orig;
  for (long long x : right) right_orig.push_back(x + cut);
  if (!ca) {
    DispersedCertificate c = std::get<DispersedCertificate>(a);
    auto extra = double_intervals(right_orig, cut + 1, m);
    c.intervals.insert(c.intervals.end(), extra.begin(), extra.end());
    return c;
  }
  DispersedCertificate c = std::get<DispersedCertificate>(b);
  auto extra = double_intervals(left, 1, cut);
  c.intervals.insert(c.intervals.end(), extra.begin(), extra.end());
  return c;
}

}  // namespace

std::vector<Interval> double_intervals(const std::vector<long long>& seq, long long lo, long long hi) {
  std::map<long long, long long> mult;
  for (long long x : seq) {
    if (x < lo || x > hi) throw DecomposeError("element outside the range");
    ++mult[x];
  }
  if (2 * static_cast<long long>(seq.size()) > hi - lo + 1) throw DecomposeError("range too short for doubling");
  // Left-anchored greedy, then push overflowing blocks back from the right edge.
  std::vector<Interval> out;
  for (auto [x, c] : mult) {
    if (!out.empty() && x <= out.back().end()) {
      out.back().q += 2 * c;
    } else {
      out.push_back(Interval{x, 2 * c - 1});
    }
  }
  if (!out.empty() && out.back().end() > hi) {
    out.back().p = hi - out.back().q;
    while (out.size() > 1 && out[out.size() - 2].end() >= out.back().p) {
      Interval last = out.back();
      out.pop_back();
      out.back().q += last.q + 1;
      out.back().p = hi - out.back().q;
    }
  }
  return out;
}

Certificate decompose(const std::vector<long long>& seq, long long m, long long l) {
  if (l < 1 || m < 4 * l) throw DecomposeError("decompose needs m >= 4l");
  if (seq.empty() || static_cast<long long>(seq.size()) > l) throw DecomposeError("sequence length must be in [1, l]");
  for (long long x : seq)
    if (x < 1 || x > m) throw DecomposeError("sequence element outside [1, m]");
  return solve(seq, m, l);
}

bool verify_clustered(const ClusteredCertificate& cert, const std::vector<long long>& seq, long long m, long long l,
                      std::string* why) {
  if (cert.intervals.empty()) return fail(why, "no intervals");
  if (!disjoint_and_inside(cert.intervals, m, why) || !covers(cert.intervals, seq, why)) return false;
  const long long d = m / (2 * l);
  long long total = 0;
  for (const auto& iv : cert.intervals) {
    total += iv.q + 1;
    std::vector<long long> k;
    for (long long x : seq)
      if (iv.contains(x)) k.push_back(x);
    if (k.empty()) continue;
    long long lo = *std::min_element(k.begin(), k.end()), hi = *std::max_element(k.begin(), k.end());
    long long reach = std::min(hi - iv.p + 1, iv.end() - lo + 1);
    if (iv.q + 1 < d * reach) return fail(why, "interval too short for its elements");
  }
  if (total + 2 * (l - static_cast<long long>(seq.size())) > m) return fail(why, "intervals leave too little room");
  return true;
}

bool verify_dispersed(const DispersedCertificate& cert, const std::vector<long long>& seq, long long m, long long l,
                      std::string* why) {
  Interval main{cert.psi, cert.xi};
  if (cert.xi < 0) return fail(why, "negative width");
  std::vector<Interval> all = cert.intervals;
  all.push_back(main);
  if (!disjoint_and_inside(all, m, why) || !covers(all, seq, why)) return false;
  for (const auto& iv : cert.intervals)
    if (iv.q < 2 * count_in(seq, iv) - 1) return fail(why, "side interval too short");
  std::vector<long long> k;
  for (long long x : seq)
    if (main.contains(x) && std::find(k.begin(), k.end(), x) == k.end()) k.push_back(x);
  if (k.size() != 1 || (k[0] != main.p && k[0] != main.end()))
    return fail(why, "main interval must hold exactly one element at an end");
  const long long d = m / (2 * l);
  if (cert.xi < d * count_in(seq, main) - 1) return fail(why, "main interval too short");
  long long total = cert.xi + 1;
  for (const auto& iv : cert.intervals) total += iv.q + 1;
  if (total + 2 * (l - static_cast<long long>(seq.size())) > m) return fail(why, "intervals leave too little room");
  return true;
}

bool verify_certificate(const Certificate& cert, const std::vector<long long>& seq, long long m, long long l,
                        std::string* why) {
  if (auto* c = std::get_if<ClusteredCertificate>(&cert)) return verify_clustered(*c, seq, m, l, why);
  return verify_dispersed(std::get<DispersedCertificate>(cert), seq, m, l, why);
}

CycleSequence cycle_sequence(const IndexSelector& p, long long m_i) {
  if (m_i <= 0 || m_i % 3 != 0) throw DecomposeError("m_i must be a positive multiple of 3");
  CycleSequence out;
  std::map<int, int> seen;
  int h = 1;
  while (true) {
    if (h < 1 || h > p.memory_bound) throw DecomposeError("selector left its memory range");
    auto it = seen.find(h);
    if (it != seen.end()) {
      out.reentry = it->second;
      break;
    }
    seen[h] = static_cast<int>(out.h.size()) + 1;
    out.h.push_back(h);
    auto [g, next] = p.select(static_cast<int>(m_i / 3), m_i, h);
    out.g.push_back(g);
    h = next;
  }
  out.cycle_end = static_cast<int>(out.h.size());
  return out;
}

std::string certificate_to_json(const Certificate& cert) {
  using nlohmann::json;
  auto ivs = [](const std::vector<Interval>& v) {
    json a = json::array();
    for (const auto& iv : v) a.push_back({{"p", iv.p}, {"q", iv.q}});
    return a;
  };
  json j;
  if (auto* c = std::get_if<ClusteredCertificate>(&cert)) {
    j["kind"] = "clustered";
    j["intervals"] = ivs(c->intervals);
  } else {
    const auto& d = std::get<DispersedCertificate>(cert);
    j["kind"] = "dispersed";
    j["psi"] = d.psi;
    j["xi"] = d.xi;
    j["intervals"] = ivs(d.intervals);
  }
  return j.dump(1);
}

}  // namespace pf
