#include "pivotforge/experiment.hpp"
#include "pivotforge/trace.hpp"

#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pf;
namespace fs = std::filesystem;

namespace {

ExperimentSpec spec(std::string family, std::string params, std::vector<std::string> audits = {},
                    std::string rule = R"({"kind":"greedy","ranking":"bland"})") {
  ExperimentSpec s;
  s.family = std::move(family);
  s.params = std::move(params);
  s.audits = std::move(audits);
  s.rule = std::move(rule);
  return s;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("pivotforge-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args) {
    std::string cmd = std::string(PIVOTFORGE_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string path(const std::string& name) { return (dir / name).string(); }

  fs::path dir;
};

}  // namespace

TEST(Experiments, ParseAndReject) {
  auto specs = parse_experiments(
      R"([{"family":"counter-parity","params":{"n":3},"audits":["alternation"]},{"family":"mdp-counter","params":{"L":2}}])");
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].audits, std::vector<std::string>{"alternation"});
  EXPECT_THROW(parse_experiments(R"([{"family":"counter-parity","audits":["nonsense"]}])"), SpecError);
  EXPECT_THROW(parse_experiments("{not json"), SpecError);
  EXPECT_THROW(parse_experiments(R"([{"family":"counter-parity","rule":{"kind":"nope"}}])"), SpecError);
}

TEST(Experiments, GenerateSizes) {
  auto g = generate_instance("counter-parity", R"({"n":3})");
  EXPECT_EQ(g.kind, InstanceKind::Parity);
  EXPECT_EQ(g.n_or_l, 3);
  EXPECT_EQ(g.size, 6);
  auto m = generate_instance("mdp-counter", R"({"L":3})");
  EXPECT_EQ(m.kind, InstanceKind::Mdp);
  EXPECT_EQ(m.mdp.actions.size(), 15u);
  EXPECT_EQ(m.size, 14);
  auto lp = generate_instance("mdp-counter-lp", R"({"L":2})");
  EXPECT_EQ(lp.kind, InstanceKind::Lp);
  EXPECT_EQ(lp.size, 10);
  EXPECT_THROW(generate_instance("no-such-family", "{}"), SpecError);
}

TEST(Experiments, CounterParityAlternates) {
  auto r = run_experiment(spec("counter-parity", R"({"n":4})", {"alternation"}));
  EXPECT_EQ(r.trace.iterations(), 15u);
  EXPECT_TRUE(r.optimal);
  EXPECT_FALSE(r.cap_exceeded);
  EXPECT_TRUE(all_passed(r.audits));
  EXPECT_EQ(csv_row(r), "counter-parity,\"{\"\"n\"\":4}\",greedy-bland,4,8,15,true,alternation=pass\n");
}

TEST(Experiments, MdpCounterAgreementAndLadder) {
  auto r = run_experiment(spec("mdp-counter", R"({"L":3})", {"agreement", "canonical-ladder", "lockstep"},
                               R"({"kind":"f","default":"one"})"));
  EXPECT_EQ(r.trace.iterations(), 11u);
  for (const auto& a : r.audits) EXPECT_TRUE(a.pass) << a.name << ": " << a.note;
}

TEST(Experiments, AgreementFailsWithoutPerturbation) {
  auto r = run_experiment(spec("mdp-counter", R"({"L":3,"eps":"0"})", {"agreement"}, R"({"kind":"f","default":"one"})"));
  ASSERT_EQ(r.audits.size(), 1u);
  EXPECT_FALSE(r.audits[0].pass);
  EXPECT_GE(r.audits[0].first_failure, 0);
}

TEST(Experiments, AuditFlagsBrokenMark) {
  auto r = run_experiment(spec("mdp-counter", R"({"L":2})", {"agreement"}, R"({"kind":"f","default":"one"})"));
  ASSERT_TRUE(all_passed(r.audits));
  auto broken = r.trace;
  broken.steps.at(2).marks["agree"] = "0";
  auto a = audit_trace(broken, {"agreement"});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_FALSE(a[0].pass);
  EXPECT_EQ(a[0].first_failure, 2);
}

TEST(Experiments, AdversarialCountIsConstant) {
  auto r = run_experiment(spec("adversarial-parity", R"({"m_i":36,"l_i":1,"transformed":false})",
                               {"constant-improving-count"},
                               R"({"kind":"index-selector","preset":"constant"})"));
  EXPECT_EQ(r.instance.size, 36);
  for (const auto& a : r.audits) EXPECT_TRUE(a.pass) << a.note;
}

TEST(Experiments, CapStopsRun) {
  auto s = spec("counter-parity", R"({"n":6})");
  s.cap = 10;
  auto r = run_experiment(s);
  EXPECT_TRUE(r.cap_exceeded);
  EXPECT_EQ(r.trace.iterations(), 10u);
  EXPECT_FALSE(r.optimal);
}

TEST(Experiments, DeterministicTraces) {
  auto s = spec("mdp-delta", R"({"L":2,"M":2})", {}, R"({"kind":"f","default":"identity"})");
  EXPECT_EQ(serialize_trace(run_experiment(s).trace), serialize_trace(run_experiment(s).trace));
}

TEST(Experiments, TraceRoundTrip) {
  auto r = run_experiment(spec("counter-parity", R"({"n":3})", {"alternation"}));
  auto text = serialize_trace(r.trace);
  EXPECT_EQ(serialize_trace(parse_trace(text)), text);
  EXPECT_TRUE(all_passed(audit_trace(parse_trace(text), {"alternation"})));
}

TEST(Experiments, CsvHeader) {
  EXPECT_EQ(csv_header(), "family,params,rule,n_or_L,edges_or_actions,iterations,optimal,audits\n");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("run --family counter-parity --params '{\"n\":3}' --audits bogus --out " + path("a")), 1);
  EXPECT_EQ(run("generate adversarial-parity --params '{\"m_i\":35,\"l_i\":1}' --rule "
                "'{\"kind\":\"index-selector\",\"preset\":\"constant\"}' --out " + path("x.json")),
            2);
  EXPECT_EQ(run("run --family mdp-counter --params '{\"L\":3,\"eps\":\"0\"}' --rule '{\"kind\":\"f\",\"default\":\"one\"}'"
                " --audits agreement --out " + path("b")),
            3);
  EXPECT_EQ(run("run --family counter-parity --params '{\"n\":6}' --cap 10 --out " + path("c")), 4);
  EXPECT_EQ(run("decompose --seq 3 -m 8 -l 2"), 0);
  auto cert = nlohmann::json::parse(slurp(dir / "stdout.txt"));
  EXPECT_EQ(cert["kind"], "dispersed");
  EXPECT_EQ(cert["psi"], 2);
}

TEST_F(Cli, GenerateRunAudit) {
  ASSERT_EQ(run("generate mdp-counter --params '{\"L\":3}' --out " + path("m3.json")), 0);
  auto inst = nlohmann::json::parse(slurp(dir / "m3.json"));
  EXPECT_EQ(inst["actions"].size(), 15u);
  ASSERT_EQ(run("lockstep " + path("m3.json") + " --rule '{\"kind\":\"greedy\",\"ranking\":\"dantzig\"}'"), 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "stdout.txt"))["ok"].get<bool>());

  std::ofstream(dir / "batch.json") << R"([{"family":"counter-parity","params":{"n":4},"audits":["alternation"]},
    {"file":")" << path("m3.json") << R"(","rule":{"kind":"f","default":"one"}}])";
  ASSERT_EQ(run("run " + path("batch.json") + " --out " + path("out1")), 0);
  ASSERT_EQ(run("run " + path("batch.json") + " --out " + path("out2") + " --format json"), 0);
  auto csv = slurp(dir / "out1" / "summary.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n') + 1), csv_header());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  for (const char* t : {"run-1.trace.json", "run-2.trace.json"})
    EXPECT_EQ(slurp(dir / "out1" / t), slurp(dir / "out2" / t)) << t;
  EXPECT_EQ(run("audit " + path("out1/run-1.trace.json") + " --audits alternation"), 0);
}
