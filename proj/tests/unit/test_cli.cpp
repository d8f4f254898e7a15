#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const fs::path& scratch) {
  const fs::path log = scratch / "stdout.txt";
  const std::string cmd = std::string("\"") + GF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_text(log);
  return r;
}

std::string datasets() {
  const auto f = testutil::fixture_dir();
  return "--real \"" + (f / "real" / "manifest.json").string() + "\" --synth \"" +
         (f / "synth" / "manifest.json").string() + "\"";
}

json rows(const fs::path& p) { return json::parse(testutil::read_text(p))["rows"]; }

}  // namespace

TEST_CASE("angles with 36 bins writes 15 joint rows") {
  testutil::TempDir tmp("cli_angles");
  auto r = run("angles " + datasets() + " --bins 36 --out \"" + (tmp / "o").string() + "\"", tmp.path());
  INFO(r.out);
  CHECK(r.code == 0);
  auto t = rows(tmp / "o" / "table3.json");
  CHECK(t.size() == 15);
  CHECK(json::parse(testutil::read_text(tmp / "o" / "table3.json"))["meta"]["bins"] == 36);
  CHECK(fs::exists(tmp / "o" / "provenance.json"));
  CHECK_FALSE(fs::exists(tmp / "o" / "table1.json"));
}

TEST_CASE("alignment with one alpha") {
  testutil::TempDir tmp("cli_align");
  auto r = run("alignment " + datasets() + " --alpha 0.5 --out \"" + (tmp / "o").string() + "\"", tmp.path());
  INFO(r.out);
  REQUIRE(r.code == 0);
  auto t = rows(tmp / "o" / "alignment.json");
  REQUIRE(t.size() == 6);
  for (const auto& row : t) {
    const double vas = row["vas"], pas = row["pas"], g = row["gas_0.5"];
    CHECK(g == doctest::Approx(0.5 * pas + 0.5 * vas).epsilon(1e-12));
  }
}

TEST_CASE("report in markdown and csv") {
  testutil::TempDir tmp("cli_report");
  for (const char* fmt : {"markdown", "csv"}) {
    auto out = tmp / fmt;
    auto r = run("report " + datasets() + " --perplexity 3 --format " + fmt + " --out \"" + out.string() + "\"",
                 tmp.path());
    INFO(r.out);
    CHECK(r.code == 0);
    CHECK(r.out.find("diversity: ok") != std::string::npos);
  }
  CHECK(fs::exists(tmp / "markdown" / "table2.md"));
  CHECK(fs::exists(tmp / "csv" / "tsne_points.csv"));
}

TEST_CASE("exit codes") {
  testutil::TempDir tmp("cli_codes");
  CHECK(run("", tmp.path()).code == 2);
  CHECK(run("angles " + datasets() + " --bins 1 --out \"" + (tmp / "o").string() + "\"", tmp.path()).code == 2);
  CHECK(run("angles " + datasets() + " --format xml --out \"" + (tmp / "o").string() + "\"", tmp.path()).code == 2);
  const std::string missing = "\"" + (tmp / "missing.json").string() + "\"";
  CHECK(run("report --real " + missing + " --synth " + missing + " --out \"" + (tmp / "o").string() + "\"",
            tmp.path())
            .code == 1);
  // --synth is required for report.
  CHECK(run("report --real " + missing + " --out \"" + (tmp / "o").string() + "\"", tmp.path()).code == 2);
  // Default perplexity is too high for 12 points: the section errors.
  auto r = run("diversity " + datasets() + " --out \"" + (tmp / "d").string() + "\"", tmp.path());
  CHECK(r.code == 1);
  CHECK(r.out.find("PerplexityTooHigh") != std::string::npos);
  CHECK(run("--help", tmp.path()).code == 0);
}

TEST_CASE("validate") {
  testutil::TempDir tmp("cli_validate");
  const auto f = testutil::fixture_dir();
  auto r = run("validate \"" + (f / "real" / "manifest.json").string() + "\" \"" +
                   (f / "synth" / "manifest.json").string() + "\" --out \"" + (tmp / "v").string() + "\"",
               tmp.path());
  INFO(r.out);
  CHECK(r.code == 0);
  auto v = json::parse(testutil::read_text(tmp / "v" / "validation.json"));
  CHECK(v.size() == 2);
  CHECK(v[0]["failures"] == 0);
}

TEST_CASE("prompts command") {
  testutil::TempDir tmp("cli_prompts");
  for (const char* obj : {"red_cup", "stapler"}) {
    testutil::write_text(tmp / "frames" / (std::string(obj) + "_start.png"), "x");
    testutil::write_text(tmp / "frames" / (std::string(obj) + "_end.png"), "x");
  }
  auto r = run("prompts --objects \"red cup,stapler\" --frames-dir \"" + (tmp / "frames").string() + "\" --out \"" +
                   (tmp / "p").string() + "\"",
               tmp.path());
  INFO(r.out);
  CHECK(r.code == 0);
  CHECK(r.out.find("jobs: 12, expected videos: 48") != std::string::npos);
  auto jobs = json::parse(testutil::read_text(tmp / "p" / "jobs.json"));
  CHECK(jobs.size() == 12);
  auto missing = run("prompts --objects lamp --frames-dir \"" + (tmp / "frames").string() + "\" --out \"" +
                         (tmp / "q").string() + "\"",
                     tmp.path());
  CHECK(missing.code == 1);
}

TEST_CASE("repeated runs produce identical files") {
  testutil::TempDir tmp("cli_repeat");
  for (const char* d : {"a", "b"}) {
    auto r = run("kinematics " + datasets() + " --threads 3 --out \"" + (tmp / d).string() + "\"", tmp.path());
    CHECK(r.code == 0);
  }
  for (const char* f : {"table2.json", "table2_per_video.json"}) {
    CHECK(testutil::read_text(tmp / "a" / f) == testutil::read_text(tmp / "b" / f));
  }
}

TEST_CASE("fixture generator reproduces the checked-in fixtures") {
  testutil::TempDir tmp("cli_fixtures");
  const std::string cmd = std::string("\"") + GF_FIXTURE_TOOL + "\" \"" + tmp.path().string() + "\" > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  for (const auto& e : fs::recursive_directory_iterator(testutil::fixture_dir())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), testutil::fixture_dir());
    INFO(rel.string());
    CHECK(testutil::read_text(tmp / rel.string()) == testutil::read_text(e.path()));
  }
}
