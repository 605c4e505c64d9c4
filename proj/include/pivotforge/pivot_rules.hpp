#pragma once

#include "pivotforge/pivot_types.hpp"
#include "pivotforge/rational.hpp"
#include "pivotforge/trace.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace pf {

enum class RankingKind { Bland, Dantzig, LargestIncrease, SteepestEdge, ShadowVertex };

struct NeighborRanking {
  RankingKind kind = RankingKind::Bland;
  RationalVector direction;  // shadow-vertex objective d, fixed in advance

  static NeighborRanking bland() { return {RankingKind::Bland, {}}; }
  static NeighborRanking dantzig() { return {RankingKind::Dantzig, {}}; }
  static NeighborRanking largest_increase() { return {RankingKind::LargestIncrease, {}}; }
  static NeighborRanking steepest_edge() { return {RankingKind::SteepestEdge, {}}; }
  static NeighborRanking shadow_vertex(RationalVector d) { return {RankingKind::ShadowVertex, std::move(d)}; }
  std::string name() const;
};

struct RuleContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Engine view of one state, queried lazily by the rankings a rule asks for.
class RankingSource {
 public:
  virtual ~RankingSource() = default;
  // Improving elements by global index, ascending.
  virtual const std::vector<ElementId>& improving() const = 0;
  virtual Rational reduced_cost(ElementId e) const = 0;
  // Objective after applying the single switch or pivot.
  virtual Rational objective_after(ElementId e) const = 0;
  // Signed squared ratio (c'D)^2/|D|^2 of the edge direction D.
  virtual Rational steepest_edge_score(ElementId e) const;
  // d'D / c'D for the edge direction D.
  virtual Rational shadow_vertex_score(ElementId e, const RationalVector& d) const;
};

TotalPreorder rank_bland(const std::vector<ElementId>& improving);
TotalPreorder tier_by_score(const std::vector<ElementId>& ids, const std::function<Rational(ElementId)>& score);
TotalPreorder rank_dantzig(const RankingSource& src);
TotalPreorder rank_largest_increase(const RankingSource& src);
TotalPreorder rank_steepest_edge(const RankingSource& src);
TotalPreorder rank_shadow_vertex(const RankingSource& src, const RationalVector& d);
TotalPreorder evaluate_ranking(const NeighborRanking& r, const RankingSource& src);

bool rankings_agree(const std::vector<TotalPreorder>& preorders);

struct Decision {
  int rank = 1;         // 1-based position among the improving elements in Bland order
  int next_memory = 1;
  bool diverged = false;
};

// Receives only rank tuples (tiers of positions), k, n and the memory state.
using DecisionFunction =
    std::function<Decision(const std::vector<TotalPreorder>& ranks, int k, long long n, int memory)>;

struct PivotRule {
  std::string name;
  std::vector<NeighborRanking> rankings;
  int memory_bound = 1;
  DecisionFunction decide;
};

struct IndexSelector {
  std::string name;
  int memory_bound = 1;
  std::function<std::pair<int, int>(int k, long long n, int h)> select;
};

struct RankPicker {
  std::string name;
  std::function<int(int)> f;
};

RankPicker pick_first();
RankPicker pick_last();
RankPicker pick_sqrt_ceil();
RankPicker pick_half_ceil();

PivotRule greedy_rule(const NeighborRanking& r);
PivotRule index_based_rule(const IndexSelector& p);
PivotRule f_rule(const RankPicker& f);

IndexSelector constant_selector(int rank = 1);
IndexSelector alternating_selector();
// Memory state h (1-based) maps to per_state[h-1] = (rank, next state); ranks above k are clamped to k.
IndexSelector table_selector(std::string name, std::vector<std::pair<int, int>> per_state);
IndexSelector index_rule_from_trace(const RunTrace& trace, int memory_bound);

struct Choice {
  ElementId element = 0;
  int rank = 0;
  int next_memory = 1;
  bool diverged = false;
  std::vector<TotalPreorder> ranks;
};

// Runs the information and decision functions and checks the rule contract.
Choice choose(const PivotRule& rule, const RankingSource& src, long long element_count, int memory);

}  // namespace pf
