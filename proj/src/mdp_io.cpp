#include "pivotforge/mdp.hpp"

#include <json.hpp>

namespace pf {

using nlohmann::json;

std::string mdp_to_json(const MarkovDecisionProcess& m, const Policy* initial,
                        const std::map<std::string, std::string>& metadata) {
  json actions = json::array();
  for (const auto& a : m.actions) {
    json tr = json::array();
    for (const auto& t : a.transitions) tr.push_back({m.states[t.target], format_rational(t.probability)});
    actions.push_back({{"name", a.name}, {"source", m.states[a.source]}, {"reward", format_rational(a.reward)},
                       {"transitions", tr}, {"bland", a.bland}});
  }
  json j = {{"states", m.states}, {"sink", m.states[m.sink]}, {"actions", actions}};
  if (initial) {
    json init = json::object();
    for (std::size_t s = 0; s < m.states.size(); ++s) init[m.states[s]] = m.actions[initial->choice[s]].name;
    j["initial"] = init;
  }
  if (!metadata.empty()) j["metadata"] = metadata;
  return j.dump(1) + "\n";
}

MarkovDecisionProcess mdp_from_json(const std::string& text, std::optional<Policy>* initial) {
  json j = json::parse(text);
  MarkovDecisionProcess m;
  std::map<std::string, int> sid;
  for (const auto& s : j.at("states")) {
    auto name = s.get<std::string>();
    if (sid.count(name)) throw MdpError("state listed twice: " + name);
    sid[name] = m.add_state(name);
  }
  auto state = [&](const std::string& name) {
    auto it = sid.find(name);
    if (it == sid.end()) throw MdpError("unknown state " + name);
    return it->second;
  };
  m.sink = state(j.at("sink").get<std::string>());
  std::map<std::string, int> aid;
  for (const auto& a : j.at("actions")) {
    std::vector<Transition> tr;
    for (const auto& t : a.at("transitions"))
      tr.push_back({state(t.at(0).get<std::string>()), parse_rational(t.at(1).get<std::string>())});
    auto name = a.at("name").get<std::string>();
    if (aid.count(name)) throw MdpError("action listed twice: " + name);
    aid[name] = m.add_action(state(a.at("source").get<std::string>()), parse_rational(a.at("reward").get<std::string>()),
                             std::move(tr), name, a.at("bland").get<long long>());
  }
  if (initial) {
    initial->reset();
    if (j.contains("initial")) {
      Policy p;
      p.choice.assign(m.states.size(), -1);
      for (const auto& [s, a] : j.at("initial").items()) {
        auto it = aid.find(a.get<std::string>());
        if (it == aid.end()) throw MdpError("initial policy names unknown action");
        p.choice[state(s)] = it->second;
      }
      *initial = p;
    }
  }
  return m;
}

}  // namespace pf
