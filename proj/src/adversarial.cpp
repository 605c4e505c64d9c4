#include "pivotforge/adversarial.hpp"

#include <algorithm>
#include <set>

namespace pf {

namespace {

struct Builder {
  GameDraft d;
  std::vector<std::string> role;  // per draft edge

  void tag(int e, const std::string& r) {
    if (static_cast<int>(role.size()) <= e) role.resize(e + 1);
    role[e] = r;
  }

  // Ascending local order inside the block that starts at position `start`.
  void place(long long start, const std::vector<int>& order) {
    for (std::size_t i = 0; i < order.size(); ++i)
      d.set_key(order[i], Rational(start) + Rational(static_cast<long long>(i) + 1, static_cast<long long>(order.size()) + 2));
  }

  FillerParts filler(const std::string& prefix) {
    FillerParts f = draft_filler(d, prefix);
    tag(f.y_x, "filler");
    tag(f.x_sink, "filler");
    tag(f.y_sink, "filler");
    return f;
  }

  void free_filler(long long position) {
    FillerParts f = filler("f");
    d.set_key(f.y_x, Rational(position) + Rational(1, 4));
    d.set_key(f.x_sink, Rational(position) + Rational(1, 2));
    d.set_key(f.y_sink, Rational(position) + Rational(3, 4));
  }

  // Wraps each edge in a controller; returns the a' and a edges.
  std::pair<std::vector<int>, std::vector<int>> control(const std::vector<int>& edges) {
    std::vector<int> primes, anchors;
    for (int e : edges) {
      ControllerParts c = draft_controller(d, e);
      tag(c.a_prime, "control");
      tag(c.a, "anchor");
      primes.push_back(c.a_prime);
      anchors.push_back(c.a);
    }
    return {primes, anchors};
  }

  std::vector<int> fillers(long long count, std::vector<int>* improving_edges) {
    std::vector<int> out;
    for (long long i = 0; i < count; ++i) {
      FillerParts f = filler("f");
      out.insert(out.end(), {f.y_x, f.x_sink, f.y_sink});
      if (improving_edges) improving_edges->push_back(f.y_x);
    }
    return out;
  }
};

void append(std::vector<int>& to, const std::vector<int>& from) { to.insert(to.end(), from.begin(), from.end()); }

Rational key_at_rank(std::vector<Rational> keys, long long rank) {
  std::sort(keys.begin(), keys.end());
  if (keys.empty()) return 0;
  if (rank <= 1) return keys.front() - Rational(1, 1024);
  if (rank > static_cast<long long>(keys.size())) return keys.back() + Rational(1, 1024);
  return (keys[rank - 2] + keys[rank - 1]) / 2;
}

}  // namespace

bool meets_exponential_bound(long long iterations, long long m_i, long long l_i) {
  // (2 * iterations)^(12 l_i) >= 2^(m_i)
  if (iterations <= 0) return false;
  Integer lhs = 1, base = 2 * static_cast<Integer>(iterations);
  for (long long i = 0; i < 12 * l_i; ++i) lhs *= base;
  Integer rhs = 1;
  for (long long i = 0; i < m_i; ++i) rhs *= 2;
  return lhs >= rhs;
}

AdversarialInstance build_adversarial_parity(const IndexSelector& p, long long m_i, int l_i, bool verify) {
  if (m_i <= 0 || m_i % 3 != 0) throw ConstructionError("m_i must be a positive multiple of 3");
  if (l_i < 1 || m_i < 12LL * l_i) throw ConstructionError("m_i must be at least 12 * l_i");
  if (p.memory_bound > l_i) throw ConstructionError("selector uses more memory states than l_i");
  const long long m = m_i / 3;
  const long long dd = m / (2LL * l_i);
  const int levels = static_cast<int>(dd / 2);

  AdversarialInstance inst;
  inst.cycle = cycle_sequence(p, m_i);
  for (long long g : inst.cycle.g)
    if (g < 1 || g > m) throw ConstructionError("selector picks a rank outside [1, m_i/3]");
  std::vector<long long> cyc = inst.cycle.cycle();
  inst.certificate = decompose(cyc, m, l_i);
  std::string why;
  if (!verify_certificate(inst.certificate, cyc, m, l_i, &why)) throw ConstructionError("certificate rejected: " + why);
  inst.counter_levels = levels;
  inst.improving_target = m;

  Builder b;
  std::set<long long> used;
  auto mark_used = [&](const Interval& iv) {
    for (long long x = iv.p; x <= iv.end(); ++x) used.insert(x);
  };

  if (auto* cl = std::get_if<ClusteredCertificate>(&inst.certificate)) {
    int idx = 0;
    for (const Interval& iv : cl->intervals) {
      mark_used(iv);
      ++idx;
      std::vector<long long> k;
      for (long long x : cyc)
        if (iv.contains(x)) k.push_back(x);
      long long width = iv.q + 1;
      long long copies = width / dd;
      std::vector<int> order;
      long long improving = 0;
      if (!k.empty() && copies >= 1) {
        long long lo = *std::min_element(k.begin(), k.end()), hi = *std::max_element(k.begin(), k.end());
        CounterParts c = draft_counter(b.d, levels, "c" + std::to_string(idx) + ".");
        std::vector<int> counter_edges;
        for (int e : c.edges) {
          auto cp = draft_multiplier(b.d, e, static_cast<int>(copies));
          for (int x : cp) b.tag(x, "counter");
          append(counter_edges, cp);
        }
        auto [primes, anchors] = b.control(counter_edges);
        improving = static_cast<long long>(counter_edges.size());
        append(order, counter_edges);
        append(order, primes);
        append(order, anchors);
        append(order, b.fillers(width - improving, nullptr));
        if (hi - iv.p + 1 > iv.end() - lo + 1) std::reverse(order.begin(), order.end());
      } else {
        append(order, b.fillers(width, nullptr));
      }
      b.place(iv.p, order);
    }
    inst.min_counting_phase = (1LL << levels) - 1;
  } else {
    const auto& ds = std::get<DispersedCertificate>(inst.certificate);
    Interval main{ds.psi, ds.xi};
    mark_used(main);
    const long long kappa = std::count_if(cyc.begin(), cyc.end(), [&](long long x) { return main.contains(x); });
    inst.delay = static_cast<int>(kappa);
    CounterParts c = draft_counter(b.d, levels, "c.");
    std::vector<int> counter_edges;
    if (kappa > 1) {
      std::vector<std::vector<int>> per_level(levels + 1);
      for (int i = levels; i >= 1; --i) {
        DelayerParts g = draft_delayer(b.d, c.a[i], static_cast<int>(kappa - 1), c.b[i + 1], c.a[i + 1], 0,
                                       "c.a" + std::to_string(i) + "~");
        append(per_level[i], g.l);
        append(per_level[i], g.r);
      }
      for (int i = 1; i <= levels; ++i) append(counter_edges, per_level[i]);
    } else {
      counter_edges = c.edges;
    }
    for (int e : counter_edges) b.tag(e, "counter");
    auto [primes, anchors] = b.control(counter_edges);
    std::vector<int> order = counter_edges;
    append(order, primes);
    append(order, anchors);
    long long width = ds.xi + 1;
    if (static_cast<long long>(counter_edges.size()) > width) throw ConstructionError("main interval too narrow");
    append(order, b.fillers(width - static_cast<long long>(counter_edges.size()), nullptr));
    if (main.q > 0 && std::count(cyc.begin(), cyc.end(), main.end()) > 0) std::reverse(order.begin(), order.end());
    b.place(main.p, order);
    inst.min_counting_phase = kappa * ((1LL << levels) - 1);

    // Picks outside the main interval are served by decoys hanging off the counter's lowest level.
    long long phi = -1;
    for (std::size_t c2 = 0; c2 < cyc.size(); ++c2)
      if (main.contains(cyc[c2])) phi = static_cast<long long>(c2);
    std::vector<long long> reordered(cyc.begin() + phi + 1, cyc.end());
    reordered.insert(reordered.end(), cyc.begin(), cyc.begin() + phi + 1);
    int idx = 0;
    for (const Interval& iv : ds.intervals) {
      mark_used(iv);
      ++idx;
      std::string prefix = "d" + std::to_string(idx) + ".";
      std::vector<long long> hs;
      for (long long x : reordered)
        if (iv.contains(x)) hs.push_back(x);
      const long long q = static_cast<long long>(hs.size());
      long long before = 0;
      for (long long c2 = 0; c2 < phi; ++c2) before += iv.contains(cyc[c2]);
      std::vector<int> l, r;
      if (q == 0) {
        std::vector<int> order2 = b.fillers(iv.q + 1, nullptr);
        b.place(iv.p, order2);
        continue;
      }
      if (q == 1) {
        int v = b.d.add_vertex(Owner::Player0, Priority(1), prefix + "v");
        r.push_back(b.d.add_edge(v, c.a[1]));
        l.push_back(b.d.add_edge(v, c.b[1]));
        b.d.choose(v, before == 1 ? c.a[1] : c.b[1]);
      } else {
        DelayerParts g = draft_delayer(b.d, -1, static_cast<int>(q - 1), c.b[1], c.a[1],
                                       static_cast<int>(q - before), prefix);
        l = g.l;
        r = g.r;
      }
      std::vector<int> gadget = l;
      append(gadget, r);
      for (int e : gadget) b.tag(e, "decoy");
      std::vector<int> primes, anchors, improving_fill;
      std::vector<std::pair<int, int>> prime_of;  // gadget edge -> its a'
      for (int e : gadget) {
        ControllerParts cp = draft_controller(b.d, e);
        b.tag(cp.a_prime, "control");
        b.tag(cp.a, "anchor");
        primes.push_back(cp.a_prime);
        anchors.push_back(cp.a);
        prime_of.emplace_back(e, cp.a_prime);
      }
      if (2 * q > iv.q + 1) throw ConstructionError("side interval too narrow");
      std::vector<int> others = primes;
      append(others, anchors);
      append(others, b.fillers(iv.q + 1 - 2 * q, &improving_fill));
      b.place(iv.p, others);
      for (long long s = 0; s < q; ++s) {
        long long target = hs[s] - iv.p + 1;
        for (int e : {l[s], r[s]}) {
          std::vector<Rational> keys;
          for (auto [ge, pr] : prime_of)
            if (ge != e) keys.push_back(b.d.key(pr));
          for (int f : improving_fill) keys.push_back(b.d.key(f));
          b.d.set_key(e, key_at_rank(keys, target));
        }
      }
    }
  }

  std::vector<long long> free_positions;
  for (long long x = 1; x <= m; ++x)
    if (!used.count(x)) free_positions.push_back(x);
  const int prefix_len = inst.cycle.reentry - 1;
  if (static_cast<long long>(free_positions.size()) < 2LL * prefix_len)
    throw ConstructionError("not enough free positions for the prefix");
  std::vector<std::pair<long long, long long>> slots;
  for (int j = 0; j < prefix_len; ++j) slots.emplace_back(free_positions[2 * j], free_positions[2 * j + 1]);
  std::set<long long> slot_positions;
  for (auto [a, c2] : slots) slot_positions.insert({a, c2});
  for (long long x : free_positions)
    if (!slot_positions.count(x)) b.free_filler(x);

  // Double fillers consume the one-off prefix picks, latest first.
  for (int j = prefix_len; j >= 1; --j) {
    auto [sa, sb] = slots[j - 1];
    DoubleFillerParts f = draft_double_filler(b.d, "df" + std::to_string(j) + ".");
    b.tag(f.a1, "prefix");
    for (int e : {f.a2, f.a3, f.b1, f.b2, f.b3}) b.tag(e, "double");
    b.d.set_key(f.a2, Rational(sa) + Rational(1, 4));
    b.d.set_key(f.a3, Rational(sa) + Rational(1, 2));
    b.d.set_key(f.b2, Rational(sb) + Rational(1, 4));
    b.d.set_key(f.b1, Rational(sb) + Rational(1, 2));
    b.d.set_key(f.b3, Rational(sb) + Rational(3, 4));
    b.d.set_key(f.a1, Rational(sa) + Rational(3, 4));
    std::vector<Rational> keys;
    for (int e : draft_improving(b.d))
      if (e != f.a1) keys.push_back(b.d.key(e));
    // Slots of earlier prefix steps still hold the equivalent of a plain filler at this point.
    for (int j2 = 1; j2 < j; ++j2) {
      keys.push_back(Rational(slots[j2 - 1].first) + Rational(1, 4));
      keys.push_back(Rational(slots[j2 - 1].second) + Rational(1, 4));
    }
    b.d.set_key(f.a1, key_at_rank(keys, inst.cycle.g[j - 1]));
  }
  inst.min_counting_phase += prefix_len;

  std::vector<int> index;
  inst.raw = b.d.finalize(&index);
  if (static_cast<long long>(inst.raw.game.player0_edge_count()) != m_i)
    throw ConstructionError("player-0 edge count " + std::to_string(inst.raw.game.player0_edge_count()) +
                            " differs from m_i");
  inst.role.assign(m_i, "");
  for (std::size_t e = 0; e < index.size(); ++e) {
    if (index[e] < 0 || !inst.raw.game.is_player0_edge(index[e])) continue;
    inst.role[inst.raw.game.bland[index[e]] - 1] = e < b.role.size() ? b.role[e] : "";
  }
  auto problems = validate_game(inst.raw.game);
  if (!problems.empty()) throw ConstructionError("invalid game: " + problems.front());

  auto& md = inst.raw.metadata;
  md["family"] = "adversarial-parity";
  md["selector"] = p.name;
  md["m_i"] = std::to_string(m_i);
  md["l_i"] = std::to_string(l_i);
  md["kind"] = std::holds_alternative<ClusteredCertificate>(inst.certificate) ? "clustered" : "dispersed";
  md["counter_levels"] = std::to_string(levels);
  md["delay"] = std::to_string(inst.delay);
  md["prefix"] = std::to_string(prefix_len);
  inst.game = inst.raw;
  inst.game.game = standard_transformation(inst.raw.game);
  inst.game.metadata["transformed"] = "true";

  if (verify) {
    CountingPhaseReport rep = audit_counting_phase(inst, inst.raw.game, p);
    if (!rep.ok) throw ConstructionError("constant improving count violated: " + rep.note);
  }
  return inst;
}

CountingPhaseReport audit_counting_phase(const AdversarialInstance& inst, const SinkParityGame& g,
                                         const IndexSelector& p, unsigned long long cap) {
  CountingPhaseReport rep;
  ParityRunOptions opt;
  opt.cap = cap;
  opt.record_objective = false;
  RunTrace t = strategy_improvement(g, inst.game.initial, index_based_rule(p), opt);
  rep.iterations = static_cast<long long>(t.iterations());
  static const std::set<std::string> helper = {"control", "anchor", "filler", "double"};
  long long phase = static_cast<long long>(t.steps.size());
  for (std::size_t i = 0; i < t.steps.size(); ++i)
    if (helper.count(inst.role.at(t.steps[i].chosen - 1))) {
      phase = static_cast<long long>(i);
      break;
    }
  rep.phase_length = phase;
  for (long long i = 0; i <= phase && i < static_cast<long long>(t.steps.size()); ++i) {
    if (static_cast<long long>(t.steps[i].improving.size()) != inst.improving_target) {
      rep.ok = false;
      rep.first_bad_step = i;
      rep.note = "step " + std::to_string(i) + " has " + std::to_string(t.steps[i].improving.size()) +
                 " improving switches";
      return rep;
    }
  }
  if (phase < inst.min_counting_phase) {
    rep.ok = false;
    rep.note = "counting phase ended after " + std::to_string(phase) + " steps, expected at least " +
               std::to_string(inst.min_counting_phase);
  }
  return rep;
}

}  // namespace pf
