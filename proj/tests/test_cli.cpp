#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "evcs/codec.hpp"
#include "evcs/json_io.hpp"

using namespace evcs;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("evcs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result run(const std::string& args, const std::string& stdin_from = "") const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    std::string cmd = std::string("'") + EVCS_CLI_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    if (!stdin_from.empty()) cmd += " <'" + stdin_from + "'";
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), read_file(out), read_file(err)};
  }

  // shell pipeline; returns the exit status of the last stage
  int shell(const std::string& script) const {
    const std::string cmd = "bash -o pipefail -c \"" + script + "\" >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, BuildDrosteN3) {
  const auto r = run("build --n 3 --family all --mode droste --out " + path("t.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json_file(path("t.json"))["m"], 13);
  EXPECT_TRUE(fs::exists(path("t.json.manifest.json")));
}

TEST_F(Cli, BuildImprovedTwoSingletons) {
  const auto r = run("build --n 2 --family '[[1],[2]]' --mode improved --out " + path("t.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json_file(path("t.json"))["m"], 1);
}

TEST_F(Cli, ImprovedFallsBackWithNotice) {
  const auto r = run("build --n 3 --family all --mode improved --out " + path("t.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("notice"), std::string::npos);
  EXPECT_EQ(read_json_file(path("t.json"))["provenance"]["construction"], "droste");
}

TEST_F(Cli, InfeasibleDeltaNamesSubset) {
  const auto r = run("build --n 2 --family all --mode tight --delta '[[[1],1],[[2],1],[[1,2],0]]'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("{1,2}"), std::string::npos) << r.err;
  const auto s = run("build --n 2 --family all --mode tight --levels '[[[1],1,0],[[2],1,0],[[1,2],1,0]]'");
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.err.find("S = {}"), std::string::npos) << s.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("build").code, 1);
  EXPECT_EQ(run("build --n 2 --mode nope").code, 1);
  EXPECT_EQ(run("verify --in " + path("missing.json")).code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, VerifyAndStamp) {
  ASSERT_EQ(run("build --n 2 --family all --out " + path("t.json")).code, 0);
  auto r = run("report --in " + path("t.json"));
  EXPECT_NE(r.out.find("UNVERIFIED"), std::string::npos);
  r = run("verify --in " + path("t.json") + " --out " + path("c.json") + " --stamp");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_json_file(path("c.json"))["passed"].get<bool>());
  r = run("report --in " + path("t.json"));
  EXPECT_NE(r.out.find("VERIFIED (stamp)"), std::string::npos);
  EXPECT_NE(r.out.find("m=4, sum 2^(|T|-1) alpha_T = 1\n"), std::string::npos) << r.out;

  Json doc = read_json_file(path("t.json"));
  doc["levels"][0][1] = 7;
  write_file_atomic(path("bad.json"), doc.dump());
  r = run("verify --in " + path("bad.json"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("FAILED"), std::string::npos);
  r = run("report --in " + path("bad.json"));
  EXPECT_NE(r.out.find("UNVERIFIED"), std::string::npos);
  EXPECT_EQ(run("report --check --in " + path("bad.json")).code, 3);
}

TEST_F(Cli, ReportImproved) {
  ASSERT_EQ(run("build --n 2 --family '[[1],[2]]' --mode improved --out " + path("t.json")).code, 0);
  const auto r = run("report --in " + path("t.json"));
  EXPECT_NE(r.out.find("m=1, droste would use 2"), std::string::npos) << r.out;
  const auto j = run("--json report --in " + path("t.json"));
  EXPECT_EQ(Json::parse(j.out)["m"], 1);
}

TEST_F(Cli, BuildVerifyPipelineEveryFamilyUpToN3) {
  int failures = 0;
  for (int n = 1; n <= 3; ++n) {
    const std::uint32_t sets = (1u << n) - 1;
    for (std::uint32_t bits = 1; bits < (1u << sets); ++bits) {
      std::string fam = "[";
      for (std::uint32_t i = 0; i < sets; ++i) {
        if (!((bits >> i) & 1u)) continue;
        if (fam.size() > 1) fam += ",";
        fam += to_json(subset_at(i)).dump();
      }
      fam += "]";
      for (const char* mode : {"droste", "tight", "improved"}) {
        const std::string cli = std::string("'") + EVCS_CLI_PATH + "'";
        const std::string script = cli + " build --n " + std::to_string(n) + " --family '" + fam + "' --mode " +
                                   mode + " | " + cli + " verify";
        if (shell(script) != 0) {
          ++failures;
          ADD_FAILURE() << script;
        }
      }
    }
  }
  EXPECT_EQ(failures, 0);
}

TEST_F(Cli, SearchAndGate) {
  auto r = run("search --n 3 --family all --out " + path("s.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json_file(path("s.json"))["m_star"], 13);
  r = run("--json search --n 2 --family '[[1],[2]]'");
  EXPECT_EQ(Json::parse(r.out)["m_star"], 1);
  r = run("search --n 5 --family all");
  EXPECT_EQ(r.code, 4);
  r = run("search --n 3 --family all --node-limit 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("budget exhausted"), std::string::npos);
  r = run("gap --n 3 --family '[[1],[3],[1,3],[2],[2,3],[1,2,3]]'");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("droste=11"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("m_star=10"), std::string::npos) << r.out;
}

TEST_F(Cli, Conjecture) {
  const auto r = run("conjecture --n 2 --out " + path("c.csv") + " --counterexamples " + path("x.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(path("c.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(read_json_file(path("x.json")).size(), 0u);
  EXPECT_NE(r.err.find("0 disagreements"), std::string::npos);
}

TEST_F(Cli, EncodeStackMeasureAndReplay) {
  ASSERT_EQ(run("build --n 2 --family all --out " + path("t.json")).code, 0);
  BitImage a(8, 8), b(8, 8), c(8, 8);
  for (int i = 0; i < 8; ++i) {
    a.set(i, i, true);
    b.set(i, 7 - i, true);
    c.set(i, 3, true);
  }
  write_file_atomic(path("a.pbm"), format_pbm(a));
  write_file_atomic(path("b.pbm"), format_pbm(b, false));
  write_file_atomic(path("c.pbm"), format_pbm(c));
  auto r = run("encode --scheme " + path("t.json") + " --secret 1=" + path("a.pbm") + " --secret 2=" + path("b.pbm") +
               " --secret 1,2=" + path("c.pbm") + " --seed 42 --out " + path("shares"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string share1 = read_file(path("shares/share_1.pbm"));
  EXPECT_EQ(read_json_file(path("shares/shares.json"))["layout"], "2x2");

  r = run("stack --shares " + path("shares") + " --select 1,2 --out " + path("s12.pbm"));
  ASSERT_EQ(r.code, 0) << r.err;
  r = run("--json measure --stacked " + path("s12.pbm") + " --secret " + path("c.pbm") + " --layout 2x2");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json m = Json::parse(r.out);
  EXPECT_EQ(m["h"], 4);
  EXPECT_EQ(m["l"], 3);
  EXPECT_EQ(m["alpha"], "1/4");

  r = run("measure --stacked " + path("s12.pbm") + " --secret " + path("a.pbm") + " --layout 2x2");
  EXPECT_EQ(r.code, 3);

  fs::remove(path("shares/share_1.pbm"));
  r = run("replay " + path("shares/manifest.json"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("shares/share_1.pbm")), share1);
  EXPECT_NE(r.out.find("reproduced"), std::string::npos);
}

TEST_F(Cli, VerifyFromStdin) {
  ASSERT_EQ(run("build --n 3 --family all-but-top --mode tight --out " + path("t.json")).code, 0);
  const auto r = run("verify", path("t.json"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("VERIFIED"), std::string::npos);
}
