#include "pivotforge/rule_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>

namespace pf {

using json = nlohmann::json;

RankPicker picker_by_name(const std::string& name) {
  if (name == "one") return pick_first();
  if (name == "identity") return pick_last();
  if (name == "sqrt-ceil") return pick_sqrt_ceil();
  if (name == "half-ceil") return pick_half_ceil();
  throw RuleConfigError("unknown rank function: " + name);
}

IndexSelector three_state_selector() { return table_selector("three-state", {{3, 2}, {1, 3}, {2, 2}}); }

IndexSelector selector_preset(const std::string& name) {
  if (name == "constant") return constant_selector(1);
  if (name == "alternating") return alternating_selector();
  if (name == "three-state") return three_state_selector();
  throw RuleConfigError("unknown selector preset: " + name);
}

namespace {

NeighborRanking ranking_by_name(const json& j) {
  std::string name = j.at("ranking").get<std::string>();
  if (name == "bland") return NeighborRanking::bland();
  if (name == "dantzig") return NeighborRanking::dantzig();
  if (name == "largest-increase") return NeighborRanking::largest_increase();
  if (name == "steepest-edge") return NeighborRanking::steepest_edge();
  if (name == "shadow-vertex") {
    RationalVector d;
    for (const auto& x : j.at("direction")) d.push_back(parse_rational(x.is_string() ? x.get<std::string>() : x.dump()));
    return NeighborRanking::shadow_vertex(std::move(d));
  }
  throw RuleConfigError("unknown ranking: " + name);
}

IndexSelector selector_from_transitions(const json& j) {
  int memory = j.value("memory", 1);
  if (memory < 1) throw RuleConfigError("memory must be positive");
  std::vector<std::array<long long, 5>> rows;
  for (const auto& t : j.at("transitions")) {
    auto r = t.get<std::vector<long long>>();
    if (r.size() != 5) throw RuleConfigError("transition rows are [k, n, h, rank, h']");
    if (r[0] < 0 || r[1] < 0 || r[2] < 1 || r[2] > memory || r[3] < 1 || r[4] < 1 || r[4] > memory)
      throw RuleConfigError("transition row out of range");
    if (r[0] > 0 && r[3] > r[0]) throw RuleConfigError("transition rank exceeds k");
    rows.push_back({r[0], r[1], r[2], r[3], r[4]});
  }
  IndexSelector p;
  p.name = j.value("name", std::string("custom"));
  p.memory_bound = memory;
  p.select = [rows](int k, long long n, int h) -> std::pair<int, int> {
    for (const auto& r : rows)
      if ((r[0] == 0 || r[0] == k) && (r[1] == 0 || r[1] == n) && r[2] == h)
        return {static_cast<int>(std::min<long long>(r[3], k)), static_cast<int>(r[4])};
    throw RuleContractError("no transition for k=" + std::to_string(k) + ", n=" + std::to_string(n) +
                            ", h=" + std::to_string(h));
  };
  return p;
}

}  // namespace

ParsedRule parse_rule(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw RuleConfigError(std::string("rule is not valid JSON: ") + e.what());
  }
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "greedy") return {greedy_rule(ranking_by_name(j)), std::nullopt, std::nullopt};
    if (kind == "f") {
      RankPicker fallback = picker_by_name(j.value("default", std::string("one")));
      std::map<int, int> table;
      if (j.contains("table"))
        for (const auto& [k, v] : j.at("table").items()) table[std::stoi(k)] = v.get<int>();
      RankPicker picker = fallback;
      if (!table.empty()) {
        picker.name = "table+" + fallback.name;
        picker.f = [table, fallback](int k) {
          auto it = table.find(k);
          return it != table.end() ? it->second : fallback.f(k);
        };
      }
      return {f_rule(picker), std::nullopt, picker};
    }
    if (kind == "index-selector") {
      IndexSelector p = j.contains("preset") ? selector_preset(j.at("preset").get<std::string>())
                                             : selector_from_transitions(j);
      return {index_based_rule(p), p, std::nullopt};
    }
    throw RuleConfigError("unknown rule kind: " + kind);
  } catch (const json::exception& e) {
    throw RuleConfigError(std::string("malformed rule: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw RuleConfigError("malformed rule table key");
  }
}

}  // namespace pf
