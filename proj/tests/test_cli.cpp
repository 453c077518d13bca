#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include "midas/assets.hpp"
#include "support.hpp"

using namespace midas;
using namespace midas::testing;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome midas_cli(const std::string& args) {
  std::string cmd = quote(MIDAS_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) o.out.append(buf, n);
  int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

class Cli : public ::testing::Test {
 protected:
  std::string store() const { return "--store " + quote((dir_.path() / "store").string()); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = dir_.path() / name;
    std::ofstream(p) << text;
    return quote(p.string());
  }
  std::string sim_config() const {
    return write("sim.json",
                 R"({"session": {"raw_idea_budget": 20, "max_rounds": 3, "mint_list_size": 5, "scout_top_k": 6},
                     "providers": {"chat": {"kind": "simulated"}, "embedding": {"kind": "hashing"}}})");
  }
  std::string problem() const {
    return write("problem.json", json{{"problem_text", kProblemText}, {"ideas", {"A spring seat"}}}.dump());
  }

  TempDir dir_;
};

}  // namespace

TEST_F(Cli, HeadlessPs1RunWritesReport) {
  Outcome o = midas_cli(store() + " run --headless --config " + quote(fixture("ps1/config.json").string()) +
                        " --problem " + quote(fixture("ps1/problem.json").string()));
  ASSERT_EQ(o.code, 0);
  std::string id = trim(o.out);
  auto report_path = dir_.path() / "store" / id / "report.json";
  ASSERT_TRUE(std::filesystem::exists(report_path));
  json report = json::parse(slurp(report_path));
  EXPECT_EQ(report.at("phase"), "Done");
  EXPECT_EQ(report.at("counts").at("forge"), 75);
  EXPECT_EQ(report.at("counts").at("scout"), 400);
}

TEST_F(Cli, GatedRunStopsAndResumes) {
  std::string config = sim_config();
  Outcome o = midas_cli(store() + " run --seed 4 --config " + config + " --problem " + problem());
  ASSERT_EQ(o.code, 0);
  std::string id = trim(o.out);
  Session s = Store(dir_.path() / "store").load(id);
  EXPECT_EQ(s.phase, Phase::Definition);
  EXPECT_EQ(s.phase_state, PhaseState::Completed);

  EXPECT_EQ(midas_cli(store() + " resume --session " + id + " --config " + config).code, 1);
  for (int i = 0; i < 10 && s.phase != Phase::Done; ++i) {
    ASSERT_EQ(midas_cli(store() + " resume --approve --session " + id + " --config " + config).code, 0);
    s = Store(dir_.path() / "store").load(id);
  }
  EXPECT_EQ(s.phase, Phase::Done);
  for (const auto& e : s.event_log) {
    if (e.kind == EventKind::GateApproved) {
      EXPECT_EQ(e.actor, Actor::Human);
    }
  }
}

TEST_F(Cli, ExportAndPlot) {
  Outcome o = midas_cli(store() + " run --headless --seed 7 --config " + sim_config() + " --problem " + problem());
  ASSERT_EQ(o.code, 0);
  std::string id = trim(o.out);
  Outcome md = midas_cli(store() + " export --format markdown --session " + id);
  EXPECT_EQ(md.code, 0);
  EXPECT_NE(md.out.find("## Curated ideas"), std::string::npos);
  Outcome js = midas_cli(store() + " export --session " + id);
  EXPECT_EQ(js.code, 0);
  EXPECT_EQ(json::parse(js.out).at("session_id"), id);

  auto plot = dir_.path() / "plot.json";
  EXPECT_EQ(midas_cli(store() + " plot --session " + id + " --out " + quote(plot.string())).code, 0);
  EXPECT_FALSE(schema_violation(json::parse(slurp(plot)), assets::schema("plot_data")).has_value());
  EXPECT_EQ(midas_cli(store() + " export --format pdf --session " + id).code, 2);
}

TEST_F(Cli, ValidationFailuresExit2) {
  EXPECT_EQ(midas_cli(store() + " run --config " + quote((dir_.path() / "missing.json").string()) + " --problem " +
                      problem())
                .code,
            2);
  EXPECT_EQ(midas_cli(store() + " run --config " + write("bad.json", "{nope") + " --problem " + problem()).code, 2);
  EXPECT_EQ(midas_cli(store() + " run --config " + write("range.json", R"({"session": {"gatekeeper_eps": -1}})") +
                      " --problem " + problem())
                .code,
            2);
  EXPECT_EQ(midas_cli(store() + " export --session ses-0000000000000000").code, 2);
  EXPECT_EQ(midas_cli(store() + " frobnicate").code, 2);
  EXPECT_EQ(midas_cli(store() + " run --problem " + problem()).code, 2);
}

TEST_F(Cli, ProviderFailureExits3AndKeepsTheSession) {
  write("empty.json", R"({"chat": []})");
  std::string config = write("scripted.json", R"({"providers": {"transcript": "empty.json", "chat": {"kind": "scripted"}}})");
  Outcome o = midas_cli(store() + " run --headless --config " + config + " --problem " + problem());
  EXPECT_EQ(o.code, 3);
  auto ids = Store(dir_.path() / "store").list();
  ASSERT_EQ(ids.size(), 1u);
  Session s = Store(dir_.path() / "store").load(ids[0]);
  EXPECT_EQ(s.phase_state, PhaseState::Failed);
}
