#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdlib>

#include "cds/analytics.hpp"
#include "cds/store.hpp"
#include "doctest.h"
#include "support/cli_script.hpp"
#include "support/oracles.hpp"
#include "wizard.hpp"

using namespace cds;
using oracle::run;

namespace {

const std::string kFixtures = std::string(CDS_TEST_DIR) + "/fixtures/";

std::vector<std::string> with_store(const oracle::TempDir& dir, std::vector<std::string> args) {
  args.insert(args.begin(), {"--store", dir.path().string()});
  return args;
}

std::string all_plus_two_answers() {
  std::string s = "item,value,note\nname,Poster,\nessence,Rain,\nwords,\"clear clever reliable organised useful\",\n";
  for (int n = 1; n <= 30; ++n) s += std::to_string(n) + ",2,\n";
  return s;
}

std::string wizard_input_all(int value) {
  std::string s = "Poster\nRain by month\nclear clever reliable organised useful\n";
  for (int n = 1; n <= 30; ++n) s += std::to_string(value) + "\n\n";
  return s;
}

}  // namespace

TEST_CASE("golden end-to-end script") {
  oracle::TempDir dir;
  const auto problems = oracle::run_golden_script(dir.path());
  for (const auto& p : problems) CHECK_MESSAGE(false, p.golden << ": " << p.detail);
  CHECK(problems.empty());
}

TEST_CASE("cli numbers equal module results") {
  oracle::TempDir dir;
  REQUIRE(oracle::run_golden_script(dir.path()).empty());
  FileRepository repo(dir.path());
  const auto v1 = repo.load("v1").sheet;
  const auto v2 = repo.load("v2").sheet;
  const auto s1 = compute_score(v1, default_catalog());

  // Hand-summed from the fixture: totals 11 and 18, User..Visual Marks 3,1,2,1,3,1.
  CHECK(oracle::brute_force(v1).total == 11);
  CHECK(oracle::brute_force(v2).total == 18);
  const auto score = run(with_store(dir, {"score", "v1"})).out;
  CHECK(score.rfind(fmt::format("total={} mean={:.2f}\n", s1.total, s1.mean.value()), 0) == 0);
  CHECK(score.rfind("total=11 mean=0.37\nmean_exact=11/30\nuser=3\nenvironment=1\ninterface=2\ncomponents=1\n"
                    "design=3\nvisual_marks=1\n",
                    0) == 0);

  const auto d = diff(v1, v2, default_catalog());
  CHECK(d.total_delta == 7);
  const auto diff_out = run(with_store(dir, {"diff", "v1", "v2"})).out;
  CHECK(diff_out.rfind("total_delta=+7\n", 0) == 0);
  CHECK(diff_out.find("#22=+3\n") != std::string::npos);
  CHECK(diff_out.find("words_added=beautiful,clever\nwords_removed=complex,vague\n") != std::string::npos);

  const auto alpha_csv = run({"stats", "alpha", "--matrix", kFixtures + "matrix_cohort.csv", "--output", "csv"}).out;
  const auto alpha = analytics::cronbach_alpha(analytics::import_matrix(oracle::slurp(kFixtures + "matrix_cohort.csv")));
  CHECK(alpha_csv.find(cli::format_number(alpha.alpha)) != std::string::npos);
  CHECK(std::fabs(alpha.alpha - 0.9804911766521577) < 1e-12);

  const auto t_out = run({"stats", "ttest", "--g1", kFixtures + "totals_experts.csv:total", "--g2",
                          kFixtures + "totals_novices.csv:2"})
                         .out;
  const auto t = analytics::t_test_independent(std::vector<double>{23, -5, 35, 28, 29, -32},
                                               std::vector<double>{30, -5, 27, -36, 30, -31});
  CHECK(t_out.rfind(fmt::format("t={} p={} df=10\n", cli::format_number(t.t), cli::format_number(t.p_two_tailed)), 0) ==
        0);
  CHECK(std::fabs(t.t - 0.6355859231047011) < 1e-12);
  CHECK(std::fabs(t.p_two_tailed - 0.5393181427612241) < 1e-9);
}

TEST_CASE("worked examples") {
  oracle::TempDir dir;
  const auto id = run(with_store(dir, {"new", "--artefact", "a"})).out;
  REQUIRE(id.size() > 1);
  const std::string sheet = id.substr(0, id.size() - 1);
  const auto answers = dir.path() / "answers.csv";
  std::ofstream(answers) << all_plus_two_answers();
  REQUIRE(run(with_store(dir, {"fill", sheet, "--answers", answers.string()})).exit_code == 0);
  CHECK(run(with_store(dir, {"score", sheet})).out.rfind("total=60 mean=2.00\n", 0) == 0);
  CHECK(run({"stats", "alpha", "--matrix", kFixtures + "matrix_constant.csv"}).out.rfind("alpha=1.000000\n", 0) == 0);
  CHECK(run({"stats", "ttest", "--g1", kFixtures + "totals_experts.csv:total", "--g2",
             kFixtures + "totals_experts.csv:total"})
            .out.rfind("t=0 p=1", 0) == 0);
}

TEST_CASE("exit codes") {
  oracle::TempDir dir;
  REQUIRE(run(with_store(dir, {"new", "--artefact", "a", "--id", "d1"})).exit_code == 0);
  REQUIRE(run(with_store(dir, {"new", "--artefact", "b", "--id", "d2"})).exit_code == 0);

  struct Case {
    std::vector<std::string> args;
    int code;
  };
  const Case cases[] = {
      // usage
      {{}, 2},
      {{"bogus"}, 2},
      {{"new"}, 2},
      {{"new", "--artefact"}, 2},
      {{"fill"}, 2},
      {{"fill", "d1", "--stage", "4"}, 2},
      {{"fill", "d1", "--answers", "/no/such/file.csv"}, 2},
      {{"fill", "d1", "--finalize"}, 2},
      {{"score"}, 2},
      {{"score", "d1", "--output", "xml"}, 2},
      {{"diff", "d1"}, 2},
      {{"report", "d1", "--format", "pdf"}, 2},
      {{"stats"}, 2},
      {{"stats", "alpha"}, 2},
      {{"stats", "ttest", "--g1", "x"}, 2},
      {{"serve", "--port", "0"}, 2},
      {{"--catalog", "/no/such/catalog.json", "score", "d1"}, 2},
      // domain
      {{"score", "missing"}, 1},
      {{"score", "d1"}, 1},
      {{"finalize", "d1"}, 1},
      {{"finalize", "missing"}, 1},
      {{"report", "d1"}, 1},
      {{"diff", "d1", "d2"}, 1},
      {{"new", "--artefact", ""}, 1},
      {{"new", "--artefact", "a", "--id", "d1"}, 1},
      {{"new", "--artefact", "a", "--id", "../x"}, 1},
      {{"stats", "alpha", "--matrix", kFixtures + "answers_v1.csv"}, 1},
      {{"stats", "ttest", "--g1", kFixtures + "totals_experts.csv:nope", "--g2", kFixtures + "totals_experts.csv"}, 1},
      {{"words", "--group-by", "colour"}, 1},
      {{"import", kFixtures + "answers_v1.csv"}, 1},
      // success
      {{"--help"}, 0},
      {{"list"}, 0},
      {{"words"}, 0},
  };
  for (const auto& c : cases) {
    const auto r = run(with_store(dir, c.args));
    CAPTURE(fmt::format("{}", fmt::join(c.args, " ")));
    CAPTURE(r.err);
    CHECK(r.exit_code == c.code);
    if (c.code == 1) CHECK(r.err.rfind("error: ", 0) == 0);
  }
}

TEST_CASE("domain errors mirror module messages") {
  oracle::TempDir dir;
  run(with_store(dir, {"new", "--artefact", "a", "--id", "d1"}));
  const auto r = run(with_store(dir, {"finalize", "d1"}));
  CHECK(r.err.find("heuristic #30 is unset") != std::string::npos);
  CHECK(r.err.find("design_name is empty") != std::string::npos);
  std::string flat = "respondent,group,stimulus";
  for (int q = 1; q <= 30; ++q) flat += ",q" + std::to_string(q);
  flat += "\na,g,s,1,2";
  for (int q = 3; q <= 30; ++q) flat += ",0";
  flat += "\nb,g,s,2,1";
  for (int q = 3; q <= 30; ++q) flat += ",0";
  flat += "\n";
  std::ofstream(dir.path() / "flat.csv") << flat;
  const auto z = run({"stats", "alpha", "--matrix", (dir.path() / "flat.csv").string()});
  CHECK(z.exit_code == 1);
  CHECK(z.err.find("alpha undefined") != std::string::npos);
}

TEST_CASE("unwritable store") {
  const auto r = run({"--store", "/proc/cds-no-store", "new", "--artefact", "a"});
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("/proc/cds-no-store") != std::string::npos);
}

TEST_CASE("CDS_STORE_DIR is honoured") {
  oracle::TempDir dir;
  ::setenv("CDS_STORE_DIR", dir.path().c_str(), 1);
  const auto r = run({"new", "--artefact", "env", "--id", "e1"});
  ::unsetenv("CDS_STORE_DIR");
  CHECK(r.exit_code == 0);
  CHECK(FileRepository(dir.path()).contains("e1"));
}

TEST_CASE("interactive wizard") {
  oracle::TempDir dir;
  run(with_store(dir, {"new", "--artefact", "a", "--id", "w"}));
  FileRepository repo(dir.path());

  SUBCASE("six words re-prompt") {
    const auto r = run(with_store(dir, {"fill", "w"}),
                       "P\nE\nclear clever reliable organised useful fair\nclear clever reliable organised useful\n:q\n");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("exactly 5 required") != std::string::npos);
    CHECK(repo.load("w").sheet.overview.circled_words.size() == 5);
  }
  SUBCASE("unknown word re-prompt") {
    const auto r = run(with_store(dir, {"fill", "w"}), "P\nE\nclear amazing\n1 2 3 4 5\n:q\n");
    CHECK(r.out.find("amazing") != std::string::npos);
    CHECK(repo.load("w").sheet.overview.circled_words ==
          std::vector<std::string>{"clear", "confusing", "sensible", "indifferent", "clever"});
  }
  SUBCASE("value 3 at #7 re-prompts with the range") {
    std::string input = "P\nE\n1 2 3 4 5\n";
    for (int n = 1; n <= 6; ++n) input += "1\n\n";
    input += "3\n-2\nnote seven\nq\n";
    const auto r = run(with_store(dir, {"fill", "w"}), input);
    CHECK(r.out.find("value must be an integer from -2 to +2") != std::string::npos);
    const auto s = repo.load("w").sheet;
    CHECK(s.response(7).value == -2);
    CHECK(s.response(7).note == "note seven");
    CHECK(s.answered_count() == 7);
    CHECK(r.out.find("Resume with: cds fill w") != std::string::npos);

    SUBCASE("resume at the first unset heuristic") {
      const auto again = run(with_store(dir, {"fill", "w"}), "0\n\nq\n");
      CHECK(again.out.find("Resuming at #8") != std::string::npos);
      CHECK(again.out.find("Stage 1") == std::string::npos);
      CHECK(repo.load("w").sheet.response(8).value == 0);
    }
  }
  SUBCASE("end of input saves the draft") {
    const auto r = run(with_store(dir, {"fill", "w"}), "P\nE\n1 2 3 4 5\n2\n");
    CHECK(r.exit_code == 0);
    CHECK(repo.load("w").sheet.overview.design_name == "P");
  }
  SUBCASE("complete session offers finalize") {
    const auto r = run(with_store(dir, {"fill", "w"}), wizard_input_all(1) + "Fine\nNothing\ny\n");
    CHECK(r.out.find("Total: 30 / 60") != std::string::npos);
    CHECK(r.out.find("Finalize now?") != std::string::npos);
    const auto s = repo.load("w").sheet;
    CHECK(s.finalized());
    CHECK(s.review.reflections == "Fine");
    const auto again = run(with_store(dir, {"fill", "w"}), "");
    CHECK(again.exit_code == 1);
    CHECK(again.err.find("finalized") != std::string::npos);
  }
  SUBCASE("declining finalize keeps a complete draft") {
    run(with_store(dir, {"fill", "w"}), wizard_input_all(-1) + "\n\nn\n");
    const auto s = repo.load("w").sheet;
    CHECK_FALSE(s.finalized());
    CHECK(s.answered_count() == 30);
  }
  SUBCASE("explicit stage 3") {
    const auto r = run(with_store(dir, {"fill", "w", "--stage", "3"}), "R\nN\n");
    CHECK(r.out.find("Stage 3: Review") != std::string::npos);
    CHECK(r.out.find("Not ready to finalize") != std::string::npos);
    CHECK(repo.load("w").sheet.review.next_steps == "N");
  }
}

TEST_CASE("answers file validation") {
  oracle::TempDir dir;
  run(with_store(dir, {"new", "--artefact", "a", "--id", "w"}));
  auto write = [&](const std::string& body) {
    const auto p = dir.path() / "a.csv";
    std::ofstream(p) << body;
    return run(with_store(dir, {"fill", "w", "--answers", p.string()}));
  };
  CHECK(write("item,value\n7,3\n").err.find("answers line 2") != std::string::npos);
  CHECK(write("item,value\n7,3\n").exit_code == 1);
  CHECK(write("nope\n").exit_code == 1);
  CHECK(write("item,value\nwords,clear clever\n").err.find("exactly 5 required") != std::string::npos);
  CHECK(write("item,value\ncolour,red\n").exit_code == 1);
  CHECK(write("item,value\n1,1\n1,2\n").exit_code == 1);
  CHECK(FileRepository(dir.path()).load("w").sheet.answered_count() == 0);
  CHECK(write("item,value,note\n1,\xE2\x88\x92" "2,unicode minus\n").exit_code == 0);
  CHECK(FileRepository(dir.path()).load("w").sheet.response(1).value == -2);
}

TEST_CASE("report --out and export/import") {
  oracle::TempDir dir;
  REQUIRE(oracle::run_golden_script(dir.path() / "s").empty());
  const auto out = dir.path() / "r.md";
  CHECK(run({"--store", (dir.path() / "s").string(), "report", "v1", "--out", out.string()}).exit_code == 0);
  CHECK(oracle::slurp(out) == oracle::slurp(std::string(CDS_TEST_DIR) + "/golden/report_v1.md"));

  const auto bundle = dir.path() / "b.json";
  CHECK(run({"--store", (dir.path() / "s").string(), "export", bundle.string()}).out == "exported 2 records\n");
  CHECK(run({"--store", (dir.path() / "t").string(), "import", bundle.string()}).out == "imported 2 records\n");
  CHECK(FileRepository(dir.path() / "t").all() == FileRepository(dir.path() / "s").all());
}

TEST_CASE("installed binary exit codes") {
  oracle::TempDir dir;
  auto status = [&](const std::string& args) {
    const int raw = std::system(fmt::format("{} --store {} {} >/dev/null 2>&1", CDS_BINARY, dir.path().string(), args).c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("new --artefact a") == 0);
  CHECK(status("new") == 2);
  CHECK(status("score missing") == 1);
  CHECK(status("--help") == 0);
}
