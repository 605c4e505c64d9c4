#include "pivotforge/parity_game.hpp"

#include <json.hpp>

namespace pf {

using nlohmann::json;

std::string game_to_json(const SinkParityGame& g, const Strategy* initial,
                         const std::map<std::string, std::string>& metadata) {
  json p0 = json::array(), p1 = json::array(), edges = json::array();
  json priorities = json::object(), bland = json::object();
  for (const auto& v : g.vertices) {
    if (v.owner == Owner::Player0) p0.push_back(v.name);
    if (v.owner == Owner::Player1) p1.push_back(v.name);
    if (v.priority.is_bottom()) priorities[v.name] = "-inf";
    else priorities[v.name] = v.priority.value();
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& src = g.vertices[g.edges[e].source].name;
    const auto& dst = g.vertices[g.edges[e].target].name;
    edges.push_back({src, dst});
    if (g.is_player0_edge(static_cast<int>(e))) bland[src + "," + dst] = g.bland[e];
  }
  json j = {{"player0", p0}, {"player1", p1}, {"sink", g.vertices[g.sink].name},
            {"priorities", priorities}, {"edges", edges}, {"bland", bland}};
  if (initial) {
    json init = json::object();
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
      if (g.vertices[v].owner == Owner::Player0) init[g.vertices[v].name] = g.vertices[initial->choice[v]].name;
    j["initial"] = init;
  }
  if (!metadata.empty()) j["metadata"] = metadata;
  return j.dump(1) + "\n";
}

SinkParityGame game_from_json(const std::string& text, std::optional<Strategy>* initial) {
  json j = json::parse(text);
  SinkParityGame g;
  std::map<std::string, int> id;
  auto priority_of = [&](const std::string& name) {
    const auto& p = j.at("priorities").at(name);
    if (p.is_string()) {
      if (p.get<std::string>() != "-inf") throw GameError("bad priority for " + name);
      return Priority::bottom();
    }
    return Priority(p.get<int>());
  };
  auto add = [&](const std::string& name, Owner owner) {
    if (id.count(name)) throw GameError("vertex listed twice: " + name);
    id[name] = g.add_vertex(owner, priority_of(name), name);
  };
  for (const auto& v : j.at("player0")) add(v.get<std::string>(), Owner::Player0);
  for (const auto& v : j.at("player1")) add(v.get<std::string>(), Owner::Player1);
  std::string sink = j.at("sink").get<std::string>();
  add(sink, Owner::Sink);
  g.sink = id.at(sink);
  const auto& bland = j.at("bland");
  for (const auto& e : j.at("edges")) {
    std::string src = e.at(0).get<std::string>(), dst = e.at(1).get<std::string>();
    if (!id.count(src) || !id.count(dst)) throw GameError("edge references unknown vertex");
    long long b = 0;
    if (g.vertices[id[src]].owner == Owner::Player0) {
      auto key = src + "," + dst;
      if (!bland.contains(key)) throw GameError("missing Bland number for edge " + key);
      b = bland.at(key).get<long long>();
    }
    g.add_edge(id[src], id[dst], b);
  }
  if (initial) {
    initial->reset();
    if (j.contains("initial")) {
      Strategy s;
      s.choice.assign(g.vertices.size(), -1);
      for (const auto& [v, w] : j.at("initial").items()) {
        if (!id.count(v) || !id.count(w.get<std::string>())) throw GameError("initial strategy names unknown vertex");
        s.choice[id[v]] = id[w.get<std::string>()];
      }
      *initial = s;
    }
  }
  return g;
}

}  // namespace pf
