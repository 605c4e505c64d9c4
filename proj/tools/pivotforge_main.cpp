#include "pivotforge/decompose.hpp"
#include "pivotforge/experiment.hpp"
#include "pivotforge/reductions.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit { Ok = 0, Usage = 1, Construction = 2, AuditFailure = 3, CapExceeded = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pf::SpecError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw pf::SpecError("cannot write " + path);
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pivot rule lower-bound instances: generate, run, audit"};
  app.require_subcommand(1);

  unsigned long long cap = 1ULL << 24;
  std::string audits_arg, out_path, format = "csv";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--cap", cap, "iteration cap");
    sub->add_option("--audits", audits_arg, "comma-separated audits");
    sub->add_option("--out", out_path, "output file or directory");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  std::string family, params = "{}";
  auto* gen = app.add_subcommand("generate", "write an instance file");
  gen->add_option("family", family, "generator family")->required();
  gen->add_option("--params", params, "generator parameters as JSON");
  std::string gen_rule;
  gen->add_option("--rule", gen_rule, "index-selector rule for adversarial-parity");
  add_common(gen);

  std::string config, rule_json = R"({"kind":"greedy","ranking":"bland"})", run_family, run_file;
  auto* run = app.add_subcommand("run", "run experiments from a config file or a single inline spec");
  run->add_option("config", config, "JSON array of experiment specs");
  run->add_option("--family", run_family, "generator family for an inline spec");
  run->add_option("--file", run_file, "instance file for an inline spec");
  run->add_option("--params", params, "generator parameters as JSON");
  run->add_option("--rule", rule_json, "rule as JSON");
  add_common(run);

  std::string trace_path;
  auto* audit = app.add_subcommand("audit", "evaluate audits on a stored trace");
  audit->add_option("trace", trace_path, "trace file written by run")->required();
  add_common(audit);

  std::string mdp_path;
  auto* lock = app.add_subcommand("lockstep", "run policy iteration and simplex side by side");
  lock->add_option("mdp", mdp_path, "MDP file")->required();
  lock->add_option("--rule", rule_json, "rule as JSON");
  add_common(lock);

  std::string seq_arg;
  long long m = 0, l = 0;
  auto* dec = app.add_subcommand("decompose", "classify an index sequence as clustered or dispersed");
  dec->add_option("--seq", seq_arg, "comma-separated indices in [1, m]")->required();
  dec->add_option("-m,--m", m, "range size")->required();
  dec->add_option("-l,--l", l, "length bound")->required();
  add_common(dec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? Ok : Usage;
  }

  auto audits = split_list(audits_arg);
  try {
    for (const auto& a : audits)
      if (std::find(pf::known_audits().begin(), pf::known_audits().end(), a) == pf::known_audits().end())
        throw pf::SpecError("unknown audit: " + a);
    if (*gen) {
      std::optional<pf::IndexSelector> sel;
      if (!gen_rule.empty()) sel = pf::parse_rule(gen_rule).selector;
      write_output(out_path, pf::instance_to_json(pf::generate_instance(family, params, sel)));
      return Ok;
    }
    if (*run) {
      std::vector<pf::ExperimentSpec> specs;
      if (!config.empty()) {
        specs = pf::parse_experiments(read_file(config));
      } else {
        if (run_family.empty() == run_file.empty()) throw pf::SpecError("give a config file, --family or --file");
        pf::ExperimentSpec s;
        s.family = run_family;
        s.file = run_file;
        s.params = params;
        s.rule = rule_json;
        s.audits = audits;
        s.cap = cap;
        pf::parse_rule(s.rule);
        specs.push_back(s);
      }
      std::string table = format == "csv" ? pf::csv_header() : "";
      bool audit_failed = false, capped = false;
      if (!out_path.empty()) std::filesystem::create_directories(out_path);
      for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!config.empty()) {
          if (app.get_subcommand("run")->count("--cap")) specs[i].cap = cap;
          if (!audits.empty()) specs[i].audits = audits;
        }
        auto r = pf::run_experiment(specs[i]);
        table += format == "csv" ? pf::csv_row(r) : pf::result_json(r);
        if (!out_path.empty()) {
          auto base = std::filesystem::path(out_path) / ("run-" + std::to_string(i + 1));
          write_output(base.string() + ".trace.json", pf::serialize_trace(r.trace));
        }
        audit_failed |= !pf::all_passed(r.audits);
        capped |= r.cap_exceeded;
      }
      if (!out_path.empty()) write_output((std::filesystem::path(out_path) / ("summary." + format)).string(), table);
      std::cout << table;
      if (capped) return CapExceeded;
      return audit_failed ? AuditFailure : Ok;
    }
    if (*audit) {
      auto results = pf::audit_trace(pf::parse_trace(read_file(trace_path)), audits);
      std::string text;
      if (format == "json") {
        text = pf::audits_json(results);
      } else {
        text = "audit,pass,first_failure,note\n";
        for (const auto& a : results)
          text += a.name + "," + (a.pass ? "true" : "false") + "," + std::to_string(a.first_failure) + ",\"" +
                  a.note + "\"\n";
      }
      write_output(out_path, text);
      return pf::all_passed(results) ? Ok : AuditFailure;
    }
    if (*lock) {
      std::optional<pf::Policy> init;
      auto mdp = pf::mdp_from_json(read_file(mdp_path), &init);
      if (!init) throw pf::SpecError("MDP file has no initial policy");
      auto rep = pf::lockstep_check(mdp, pf::parse_rule(rule_json).rule, *init, cap);
      write_output(out_path, pf::lockstep_to_json(rep));
      if (rep.note.find("cap") != std::string::npos) return CapExceeded;
      return rep.ok ? Ok : AuditFailure;
    }
    if (*dec) {
      std::vector<long long> seq;
      for (const auto& x : split_list(seq_arg)) seq.push_back(std::stoll(x));
      auto cert = pf::decompose(seq, m, l);
      std::string why;
      if (!pf::verify_certificate(cert, seq, m, l, &why)) {
        std::cerr << "certificate failed verification: " << why << "\n";
        return AuditFailure;
      }
      write_output(out_path, pf::certificate_to_json(cert));
      return Ok;
    }
  } catch (const pf::SpecError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const pf::RuleConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Construction;
  }
  return Usage;
}
