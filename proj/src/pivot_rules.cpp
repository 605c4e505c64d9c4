#include "pivotforge/pivot_rules.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pf {

std::string NeighborRanking::name() const {
  switch (kind) {
    case RankingKind::Bland: return "bland";
    case RankingKind::Dantzig: return "dantzig";
    case RankingKind::LargestIncrease: return "largest-increase";
    case RankingKind::SteepestEdge: return "steepest-edge";
    case RankingKind::ShadowVertex: return "shadow-vertex";
  }
  return "?";
}

Rational RankingSource::steepest_edge_score(ElementId) const {
  throw std::logic_error("steepest-edge ranking is only defined for linear programs");
}

Rational RankingSource::shadow_vertex_score(ElementId, const RationalVector&) const {
  throw std::logic_error("shadow-vertex ranking is only defined for linear programs");
}

TotalPreorder rank_bland(const std::vector<ElementId>& improving) {
  std::vector<ElementId> ids = improving;
  std::sort(ids.begin(), ids.end(), std::greater<>());
  TotalPreorder out;
  for (ElementId e : ids) out.tiers.push_back({e});
  return out;
}

TotalPreorder tier_by_score(const std::vector<ElementId>& ids, const std::function<Rational(ElementId)>& score) {
  std::map<Rational, std::vector<ElementId>> groups;
  for (ElementId e : ids) groups[score(e)].push_back(e);
  TotalPreorder out;
  for (auto& [s, members] : groups) {
    std::sort(members.begin(), members.end());
    out.tiers.push_back(std::move(members));
  }
  return out;
}

TotalPreorder rank_dantzig(const RankingSource& src) {
  return tier_by_score(src.improving(), [&](ElementId e) { return src.reduced_cost(e); });
}

TotalPreorder rank_largest_increase(const RankingSource& src) {
  return tier_by_score(src.improving(), [&](ElementId e) { return src.objective_after(e); });
}

TotalPreorder rank_steepest_edge(const RankingSource& src) {
  return tier_by_score(src.improving(), [&](ElementId e) { return src.steepest_edge_score(e); });
}

TotalPreorder rank_shadow_vertex(const RankingSource& src, const RationalVector& d) {
  return tier_by_score(src.improving(), [&](ElementId e) { return src.shadow_vertex_score(e, d); });
}

TotalPreorder evaluate_ranking(const NeighborRanking& r, const RankingSource& src) {
  switch (r.kind) {
    case RankingKind::Bland: return rank_bland(src.improving());
    case RankingKind::Dantzig: return rank_dantzig(src);
    case RankingKind::LargestIncrease: return rank_largest_increase(src);
    case RankingKind::SteepestEdge: return rank_steepest_edge(src);
    case RankingKind::ShadowVertex: return rank_shadow_vertex(src, r.direction);
  }
  throw std::logic_error("unknown ranking");
}

bool rankings_agree(const std::vector<TotalPreorder>& preorders) {
  if (preorders.empty()) throw std::invalid_argument("rankings_agree needs at least one preorder");
  for (const auto& p : preorders)
    if (!(p == preorders.front())) return false;
  return true;
}

RankPicker pick_first() {
  return {"one", [](int) { return 1; }};
}

RankPicker pick_last() {
  return {"identity", [](int k) { return k; }};
}

RankPicker pick_sqrt_ceil() {
  return {"sqrt-ceil", [](int k) {
            int r = static_cast<int>(std::sqrt(static_cast<double>(k)));
            while (r * r < k) ++r;
            while (r > 1 && (r - 1) * (r - 1) >= k) --r;
            return std::max(r, 1);
          }};
}

RankPicker pick_half_ceil() {
  return {"half-ceil", [](int k) { return (k + 1) / 2; }};
}

PivotRule greedy_rule(const NeighborRanking& r) {
  PivotRule rule;
  rule.name = "greedy-" + r.name();
  rule.rankings = {r};
  rule.decide = [](const std::vector<TotalPreorder>& ranks, int, long long, int) {
    const auto& best = ranks.front().tiers.back();
    return Decision{static_cast<int>(*std::min_element(best.begin(), best.end())), 1, false};
  };
  return rule;
}

PivotRule index_based_rule(const IndexSelector& p) {
  PivotRule rule;
  rule.name = "index-" + p.name;
  rule.rankings = {NeighborRanking::bland()};
  rule.memory_bound = p.memory_bound;
  auto select = p.select;
  rule.decide = [select](const std::vector<TotalPreorder>&, int k, long long n, int memory) {
    auto [rank, next] = select(k, n, memory);
    return Decision{rank, next, false};
  };
  return rule;
}

PivotRule f_rule(const RankPicker& f) {
  PivotRule rule;
  rule.name = "f-" + f.name;
  rule.rankings = {NeighborRanking::bland(), NeighborRanking::dantzig(), NeighborRanking::largest_increase()};
  auto pick = f.f;
  rule.decide = [pick](const std::vector<TotalPreorder>& ranks, int k, long long, int) {
    int i = pick(k);
    if (i < 1 || i > k) throw RuleContractError("rank picker returned " + std::to_string(i) + " for k=" + std::to_string(k));
    // With agreement the common order is the Bland order, so both branches read ranks[0].
    std::vector<ElementId> order;
    for (const auto& tier : ranks.front().tiers) order.insert(order.end(), tier.begin(), tier.end());
    return Decision{static_cast<int>(order[i - 1]), 1, !rankings_agree(ranks)};
  };
  return rule;
}

IndexSelector constant_selector(int rank) {
  return {"constant-" + std::to_string(rank), 1,
          [rank](int k, long long, int) { return std::pair{std::min(rank, std::max(k, 1)), 1}; }};
}

IndexSelector alternating_selector() {
  return {"alternating", 2,
          [](int k, long long, int h) { return h == 1 ? std::pair{1, 2} : std::pair{std::min(2, std::max(k, 1)), 1}; }};
}

IndexSelector table_selector(std::string name, std::vector<std::pair<int, int>> per_state) {
  const int bound = static_cast<int>(per_state.size());
  for (auto [rank, next] : per_state)
    if (rank < 1 || next < 1 || next > bound) throw std::invalid_argument("selector table entry out of range");
  return {std::move(name), bound, [per_state](int k, long long, int h) {
            auto [rank, next] = per_state.at(h - 1);
            return std::pair{std::min(rank, std::max(k, 1)), next};
          }};
}

IndexSelector index_rule_from_trace(const RunTrace& trace, int memory_bound) {
  if (trace.steps.empty()) return constant_selector(1);
  const int length = static_cast<int>(trace.steps.size());
  if (length > memory_bound)
    throw std::invalid_argument("trace has " + std::to_string(length) + " steps but the memory bound is " +
                                std::to_string(memory_bound));
  std::vector<int> ranks;
  for (const auto& s : trace.steps) ranks.push_back(s.chosen_rank);
  return {"replay", length, [ranks, length](int, long long, int h) {
            return std::pair{ranks[h - 1], std::min(h + 1, length)};
          }};
}

Choice choose(const PivotRule& rule, const RankingSource& src, long long element_count, int memory) {
  const auto& improving = src.improving();
  const int k = static_cast<int>(improving.size());
  if (k == 0) throw std::logic_error("choose called without improving elements");
  std::map<ElementId, int> position;
  for (int i = 0; i < k; ++i) position[improving[i]] = i + 1;

  Choice c;
  for (const auto& r : rule.rankings) {
    TotalPreorder by_id = evaluate_ranking(r, src);
    TotalPreorder by_pos;
    for (const auto& tier : by_id.tiers) {
      std::vector<ElementId> t;
      for (ElementId e : tier) t.push_back(position.at(e));
      std::sort(t.begin(), t.end());
      by_pos.tiers.push_back(std::move(t));
    }
    c.ranks.push_back(std::move(by_pos));
  }
  Decision d = rule.decide(c.ranks, k, element_count, memory);
  if (d.rank < 1 || d.rank > k)
    throw RuleContractError("rule returned a non-improving element (rank " + std::to_string(d.rank) +
                            " of " + std::to_string(k) + ")");
  if (d.next_memory < 1 || d.next_memory > rule.memory_bound)
    throw RuleContractError("rule returned memory state " + std::to_string(d.next_memory) + " outside 1.." +
                            std::to_string(rule.memory_bound));
  c.element = improving[d.rank - 1];
  c.rank = d.rank;
  c.next_memory = d.next_memory;
  c.diverged = d.diverged;
  return c;
}

}  // namespace pf
