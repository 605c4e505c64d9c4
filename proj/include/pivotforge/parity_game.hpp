#pragma once

#include "pivotforge/pivot_rules.hpp"
#include "pivotforge/trace.hpp"
#include "pivotforge/valuation.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pf {

enum class Owner { Player0, Player1, Sink };

struct Vertex {
  Owner owner = Owner::Player0;
  Priority priority;
  std::string name;
};

struct Edge {
  int source = 0;
  int target = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct SinkParityGame {
  std::vector<Vertex> vertices;
  int sink = -1;
  std::vector<Edge> edges;
  std::vector<long long> bland;  // per edge; 0 unless the source is a player-0 vertex

  int add_vertex(Owner owner, Priority priority, std::string name);
  int add_sink(std::string name = "top");
  int add_edge(int source, int target, long long bland_number = 0);

  // Size of V_0 and V_1 together, the base of the signed-power order.
  std::int64_t base() const;
  bool is_player0_edge(int e) const { return vertices[edges[e].source].owner == Owner::Player0; }
  std::size_t player0_edge_count() const;
  std::vector<std::vector<int>> out_edges() const;
  int find_edge(int source, int target) const;
  int vertex_by_name(const std::string& name) const;
};

struct Strategy {
  std::vector<int> choice;  // successor for player-0 vertices, -1 elsewhere
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct ValuationMap {
  std::vector<ValuationMultiset> val;
  std::vector<Integer> score;    // eval of val under the game's base
  std::vector<int> counter;      // player-1 best responses, -1 elsewhere
};

struct GameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> validate_game(const SinkParityGame& g);
bool is_admissible(const SinkParityGame& g, const Strategy& s);
ValuationMap valuations(const SinkParityGame& g, const Strategy& s);
std::vector<Edge> improving_switches(const SinkParityGame& g, const Strategy& s);
Strategy apply_switch(const Strategy& s, const Edge& e);
SinkParityGame standard_transformation(const SinkParityGame& g);

// Hooks receive every visited strategy (the terminal one included) and may attach marks.
using ParityObserver = std::function<void(const Strategy&, const ValuationMap&, const std::vector<int>& improving,
                                          std::map<std::string, std::string>& marks)>;

struct ParityRunOptions {
  unsigned long long cap = 1ULL << 40;
  bool check_invariants = true;
  bool record_objective = true;
  bool need_multisets = false;  // observers that read ValuationMap::val need this
  ParityObserver observer;
};

RunTrace strategy_improvement(const SinkParityGame& g, const Strategy& s0, const PivotRule& rule,
                              const ParityRunOptions& options = {});

// Scores and counterstrategy without building multisets; shared by the loop and tests.
class ParityEvaluator {
 public:
  explicit ParityEvaluator(const SinkParityGame& g);
  const SinkParityGame& game() const { return g_; }
  // Throws GameError when the strategy is not admissible.
  ValuationMap evaluate(const Strategy& s, bool with_multisets) const;
  std::vector<int> improving_edges(const Strategy& s, const ValuationMap& v) const;
  bool admissible(const Strategy& s) const;
  int edge_of_bland(long long b) const;

 private:
  const SinkParityGame& g_;
  std::vector<Integer> weight_;
  std::vector<std::vector<int>> out_;
  std::vector<int> by_bland_;
  std::vector<int> odd_priorities_;
};

// JSON schema: {player0, player1, sink, priorities, edges, bland} keyed by vertex names.
std::string game_to_json(const SinkParityGame& g, const Strategy* initial = nullptr,
                         const std::map<std::string, std::string>& metadata = {});
SinkParityGame game_from_json(const std::string& text, std::optional<Strategy>* initial = nullptr);

}  // namespace pf
