#include "pivotforge/trace.hpp"

#include <json.hpp>

namespace pf {

using nlohmann::json;

std::uint64_t hash_state(const std::vector<long long>& state) {
  std::uint64_t h = 1469598103934665603ULL;
  for (long long v : state) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (u >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

json preorder_json(const TotalPreorder& p) { return p.tiers; }

TotalPreorder preorder_from(const json& j) {
  TotalPreorder p;
  p.tiers = j.get<std::vector<std::vector<ElementId>>>();
  return p;
}

}  // namespace

std::string serialize_trace(const RunTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json ranks = json::array();
    for (const auto& r : s.ranks) ranks.push_back(preorder_json(r));
    json row = {{"hash", s.state_hash}, {"improving", s.improving}, {"ranks", ranks},
                {"chosen", s.chosen},   {"rank", s.chosen_rank},    {"memory", s.memory},
                {"objective", s.objective}};
    if (s.diverged) row["diverged"] = true;
    if (!s.marks.empty()) row["marks"] = s.marks;
    steps.push_back(std::move(row));
  }
  json terminal = {{"hash", trace.terminal.state_hash},
                   {"objective", trace.terminal.objective},
                   {"state", trace.terminal.state}};
  if (!trace.terminal.marks.empty()) terminal["marks"] = trace.terminal.marks;
  json j = {{"engine", trace.engine},       {"rule", trace.rule},
            {"elements", trace.element_count}, {"iterations", trace.steps.size()},
            {"complete", trace.complete},   {"steps", steps},
            {"terminal", terminal}};
  return j.dump(1) + "\n";
}

RunTrace parse_trace(const std::string& text) {
  json j = json::parse(text);
  RunTrace t;
  t.engine = j.at("engine").get<std::string>();
  t.rule = j.at("rule").get<std::string>();
  t.element_count = j.at("elements").get<long long>();
  t.complete = j.at("complete").get<bool>();
  for (const auto& row : j.at("steps")) {
    TraceStep s;
    s.state_hash = row.at("hash").get<std::uint64_t>();
    s.improving = row.at("improving").get<std::vector<ElementId>>();
    for (const auto& r : row.at("ranks")) s.ranks.push_back(preorder_from(r));
    s.chosen = row.at("chosen").get<ElementId>();
    s.chosen_rank = row.at("rank").get<int>();
    s.memory = row.at("memory").get<int>();
    s.objective = row.at("objective").get<std::string>();
    s.diverged = row.value("diverged", false);
    if (row.contains("marks")) s.marks = row.at("marks").get<std::map<std::string, std::string>>();
    t.steps.push_back(std::move(s));
  }
  const auto& term = j.at("terminal");
  t.terminal.state_hash = term.at("hash").get<std::uint64_t>();
  t.terminal.objective = term.at("objective").get<std::string>();
  t.terminal.state = term.at("state").get<std::vector<long long>>();
  if (term.contains("marks")) t.terminal.marks = term.at("marks").get<std::map<std::string, std::string>>();
  return t;
}

}  // namespace pf
