#pragma once

#include "pivotforge/adversarial.hpp"
#include "pivotforge/mdp_families.hpp"
#include "pivotforge/rule_config.hpp"
#include "pivotforge/simplex.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pf {

enum class InstanceKind { Parity, Mdp, Lp };

struct LoadedInstance {
  InstanceKind kind = InstanceKind::Parity;
  std::string family;
  std::string params;  // compact JSON
  SinkParityGame game;
  Strategy strategy;
  MarkovDecisionProcess mdp;
  Policy policy;
  LinearProgram lp;
  Basis basis;
  std::map<std::string, std::string> metadata;
  long long n_or_l = 0;
  long long size = 0;  // player-0 edges, non-sink actions or columns
  std::optional<AdversarialInstance> adversarial;
  std::optional<GammaInstance> gamma;
};

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  std::string family;
  std::string params = "{}";
  std::string file;
  std::string rule = R"({"kind":"greedy","ranking":"bland"})";
  std::optional<std::vector<long long>> initial;
  unsigned long long cap = 1ULL << 24;
  std::vector<std::string> audits;
};

const std::vector<std::string>& known_audits();
const std::vector<std::string>& known_families();

// A JSON array of spec objects.
std::vector<ExperimentSpec> parse_experiments(const std::string& text);

// Construction and precondition failures throw ConstructionError, MdpError, GameError or LpError.
LoadedInstance generate_instance(const std::string& family, const std::string& params_json,
                                 const std::optional<IndexSelector>& selector = std::nullopt);
LoadedInstance load_instance_file(const std::string& path);
std::string instance_to_json(const LoadedInstance& inst);

struct AuditResult {
  std::string name;
  bool pass = true;
  long long first_failure = -1;
  std::string note;
};

struct RunResult {
  ExperimentSpec spec;
  LoadedInstance instance;
  std::string rule_name;
  RunTrace trace;
  std::vector<AuditResult> audits;
  bool optimal = false;
  bool cap_exceeded = false;
};

RunResult run_experiment(const ExperimentSpec& spec);

// Evaluates audits from the marks a run leaves in its trace.
std::vector<AuditResult> audit_trace(const RunTrace& trace, const std::vector<std::string>& audits);
bool all_passed(const std::vector<AuditResult>& audits);

std::string csv_header();
std::string csv_row(const RunResult& r);
std::string result_json(const RunResult& r);
std::string audits_json(const std::vector<AuditResult>& audits);

}  // namespace pf
