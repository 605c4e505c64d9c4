#pragma once

#include "pivotforge/parity_game.hpp"

#include <map>
#include <string>
#include <vector>

namespace pf {

struct GameInstance {
  SinkParityGame game;
  Strategy initial;
  std::map<std::string, std::string> metadata;
};

// Mutable game under construction. Player-0 edges carry rational sort keys that
// become Bland numbers 1..m on finalize (ties broken by creation order).
class GameDraft {
 public:
  GameDraft();
  static GameDraft from(const GameInstance& inst);

  int add_vertex(Owner owner, Priority priority, std::string name);
  int add_edge(int source, int target, Rational key = 0);
  void remove_edge(int e);
  void choose(int vertex, int target) { choice_.at(vertex) = target; }
  int choice(int vertex) const { return choice_.at(vertex); }
  void set_key(int e, Rational key) { key_.at(e) = std::move(key); }
  const Rational& key(int e) const { return key_.at(e); }
  void set_owner(int v, Owner owner) { game_.vertices.at(v).owner = owner; }

  const SinkParityGame& game() const { return game_; }
  int sink() const { return game_.sink; }
  bool removed(int e) const { return removed_.at(e) != 0; }
  std::vector<int> live_out(int v) const;
  std::vector<int> live_player0_edges() const;
  Rational max_key() const;
  std::string fresh_name(const std::string& stem);

  // Bland numbers by key order; returns the instance and, per draft edge, its final edge index (-1 if removed).
  GameInstance finalize(std::vector<int>* edge_index = nullptr) const;

 private:
  SinkParityGame game_;
  std::vector<Rational> key_;
  std::vector<char> removed_;
  std::vector<int> choice_;
  std::map<std::string, int> name_counter_;
};

struct CounterParts {
  std::vector<int> a, b;         // a[1..n], b[1..n+1]; index 0 unused
  std::vector<int> edges;        // player-0 edges in counter Bland order
};

struct ControllerParts {
  int z = -1, v = -1, w = -1;
  int a = -1, a_prime = -1;      // a is initially chosen
};

struct FillerParts {
  int x = -1, y = -1;
  int x_sink = -1, y_sink = -1, y_x = -1;  // y_x is the one improving edge
};

struct DelayerParts {
  std::vector<int> z;            // z[1..k+1]
  int exit_x = -1, exit_y = -1;  // player-1 exits towards x and y
  std::vector<int> l, r;         // l[0..k], r[0..k]
};

struct DoubleFillerParts {
  int x = -1, y = -1, z = -1, w = -1;
  int a1 = -1, a2 = -1, a3 = -1, b1 = -1, b2 = -1, b3 = -1;
};

CounterParts draft_counter(GameDraft& d, int n, const std::string& prefix = "");
std::vector<int> draft_multiplier(GameDraft& d, int edge, int copies);
ControllerParts draft_controller(GameDraft& d, int edge);
FillerParts draft_filler(GameDraft& d, const std::string& prefix = "f");
// Replaces `vertex` (if >= 0) by the chain; l-edges lead towards x, r-edges towards y.
// The first `l_count` l-edges and the remaining r-edges are chosen initially.
DelayerParts draft_delayer(GameDraft& d, int vertex, int k, int x, int y, int l_count, const std::string& prefix = "");
DoubleFillerParts draft_double_filler(GameDraft& d, const std::string& prefix = "df");

GameInstance gen_counter_game(int n);

// Whole-game forms of the gadgets; new edges are spliced into the Bland order as documented per call.
GameInstance gadget_multiplier(const GameInstance& g, const Edge& e, int copies);
GameInstance gadget_controller(const GameInstance& g, const Edge& e, bool check_precondition = true);
GameInstance gadget_filler(const GameInstance& g, long long bland_position);
GameInstance gadget_delayer(const GameInstance& g, int vertex, int k, int x, int y);
GameInstance gadget_double_filler(const GameInstance& g, long long slot_a, long long slot_b, int a1_rank);

// Smallest priority over vertices reachable from v by at least one edge, sink ignored.
std::optional<int> min_reachable_priority(const SinkParityGame& g, int v);

// Draft edges improving under the draft's current initial strategy.
std::vector<int> draft_improving(const GameDraft& d);

}  // namespace pf
