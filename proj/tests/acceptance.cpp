// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>

#include "cds/analytics.hpp"
#include "cds/report.hpp"
#include "cds/special_functions.hpp"
#include "cds/store.hpp"
#include "support/cli_script.hpp"
#include "support/live_server.hpp"
#include "support/oracles.hpp"
#include "support/report_checks.hpp"

using namespace cds;
using nlohmann::json;

namespace {

struct Failure {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

const HeuristicCatalog& cat() { return default_catalog(); }

// ---- 1 -------------------------------------------------------------------
void catalog_integrity() {
  const auto& c = cat();
  expect(c.perspectives().size() == 6, "perspective count");
  for (std::size_t i = 0; i < 6; ++i) {
    int n = 0;
    for (const auto& h : c.heuristics()) n += h.perspective == c.perspectives()[i].id ? 1 : 0;
    expect(n == 5, fmt::format("perspective {} has {} heuristics", i + 1, n));
  }
  expect(c.heuristics().size() == 30, "heuristic count");
  for (int n = 1; n <= 30; ++n) expect(c.heuristics()[static_cast<std::size_t>(n - 1)].number == n, "numbering");
  expect(c.lexicon().size() == 20, "lexicon size");
  const auto p = verify_lexicon_partition(c);
  expect(p.positive == 7 && p.negative == 7 && p.neutral == 6 && !p.deviates,
         fmt::format("partition {}/{}/{}", p.positive, p.negative, p.neutral));
  expect(c.version().likert_min == -2 && c.version().likert_max == 2, "likert bounds");
  validate_catalog(c);
}

// ---- 2 -------------------------------------------------------------------
void scoring_oracle() {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto sheet = oracle::random_complete_sheet(rng, cat());
    const auto s = compute_score(sheet, cat());
    const auto o = oracle::brute_force(sheet);
    expect(s.total == o.total, fmt::format("sheet {}: total {} vs oracle {}", i, s.total, o.total));
    int sum = 0;
    for (int p = 0; p < 6; ++p) {
      const int sub = s.perspective_subtotals[static_cast<std::size_t>(p)];
      expect(sub == o.by_perspective[p], fmt::format("sheet {}: subtotal {}", i, p));
      expect(sub >= -10 && sub <= 10, "subtotal bounds");
      sum += sub;
    }
    expect(sum == s.total, "subtotals do not sum to total");
    expect(s.total >= -60 && s.total <= 60, "total bounds");
    expect(s.mean.denominator > 0 && s.mean.numerator * 30 == static_cast<std::int64_t>(s.total) * s.mean.denominator &&
               std::gcd(s.mean.numerator, s.mean.denominator) == 1,
           fmt::format("sheet {}: mean {}/{} is not total/30 in lowest terms", i, s.mean.numerator, s.mean.denominator));
    expect(s.circled_sentiment_counts.sum() == 5, "sentiment counts");
  }
}

// ---- 3 -------------------------------------------------------------------
void diff_algebra() {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto a = finalize(oracle::random_complete_sheet(rng, cat()));
    const auto b = finalize(oracle::random_complete_sheet(rng, cat()));
    const auto aa = diff(a, a, cat());
    expect(aa.is_zero() && aa.total_delta == 0, "diff(a,a) is not zero");
    const auto ab = diff(a, b, cat());
    const auto ba = diff(b, a, cat());
    expect(ab.total_delta == -ba.total_delta, "antisymmetry of total");
    for (int n = 1; n <= 30; ++n) expect(ab.heuristic_delta(n) == -ba.heuristic_delta(n), "antisymmetry per heuristic");
    expect(ab.words_added == ba.words_removed && ab.words_removed == ba.words_added, "word sets");
    expect(ab.total_delta == compute_score(b, cat()).total - compute_score(a, cat()).total, "score consistency");
    expect(ab.total_delta == std::accumulate(ab.per_perspective_delta.begin(), ab.per_perspective_delta.end(), 0),
           "perspective deltas");
  }
}

// ---- 4 -------------------------------------------------------------------
void cronbach() {
  using analytics::ItemMatrix;
  std::vector<std::int64_t> constant;
  for (int v : {-2, -1, 0, 1, 2, 1}) constant.insert(constant.end(), 30, v);
  const double a1 = analytics::cronbach_alpha(ItemMatrix(30, constant)).alpha;
  expect(std::fabs(a1 - 1.0) < 1e-12, fmt::format("constant fixture alpha {}", a1));
  const double a2 = analytics::cronbach_alpha(ItemMatrix(2, {1, 1, 2, 2, 3, 3})).alpha;
  expect(std::fabs(a2 - 1.0) < 1e-12, fmt::format("3x2 fixture alpha {}", a2));
  bool guarded = false;
  try {
    analytics::cronbach_alpha(ItemMatrix(2, {1, 2, 2, 1}));
  } catch (const Error& e) {
    guarded = e.code() == ErrorCode::kUndefined;
  }
  expect(guarded, "zero-variance guard did not fire");

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> value(-2, 2);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t n = 2 + rng() % 30;
    const std::size_t k = 2 + rng() % 30;
    std::vector<std::int64_t> m(n * k);
    for (auto& x : m) x = value(rng);
    double base = 0;
    try {
      base = analytics::cronbach_alpha(ItemMatrix(k, m)).alpha;
    } catch (const Error&) {
      continue;  // zero total variance; draw again
    }
    std::vector<double> rows_d;
    std::vector<std::vector<double>> rows(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < k; ++c) rows[r].push_back(static_cast<double>(m[r * k + c]));
    expect(std::fabs(base - oracle::alpha(rows)) < 1e-12, "alpha differs from the textbook oracle");

    std::vector<std::size_t> rp(n), cp(k);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(cp.begin(), cp.end(), rng);
    std::vector<std::int64_t> permuted(n * k);
    std::vector<std::int64_t> shifted(n * k);
    std::vector<std::int64_t> offsets(k);
    for (auto& o : offsets) o = static_cast<std::int64_t>(rng() % 2001) - 1000;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        permuted[r * k + c] = m[rp[r] * k + cp[c]];
        shifted[r * k + c] = m[r * k + c] + offsets[c];
      }
    }
    const double ap = analytics::cronbach_alpha(ItemMatrix(k, permuted)).alpha;
    const double as = analytics::cronbach_alpha(ItemMatrix(k, shifted)).alpha;
    expect(std::fabs(ap - base) < 1e-12, fmt::format("permutation changed alpha {} -> {}", base, ap));
    expect(std::fabs(as - base) < 1e-12, fmt::format("translation changed alpha {} -> {}", base, as));
    ++checked;
  }
}

// ---- 5 -------------------------------------------------------------------
void t_test() {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{2, 3, 4};
  const auto same = analytics::t_test_independent(a, a);
  expect(same.t == 0.0 && same.p_two_tailed == 1.0, "identical groups");
  const auto r = analytics::t_test_independent(a, b);
  expect(std::fabs(r.t + std::sqrt(1.5)) < 1e-12, fmt::format("t = {}", r.t));
  expect(r.df == 4.0, "df");
  const double ref = oracle::t_two_tailed_p(r.t, r.df);
  expect(std::fabs(r.p_two_tailed - ref) < 1e-6, fmt::format("p = {} vs oracle {}", r.p_two_tailed, ref));

  std::mt19937_64 rng(31337);
  std::normal_distribution<double> normal(0.0, 1.0);
  int rejections = 0;
  constexpr int kTrials = 10000;
  std::vector<double> g1(12), g2(12);
  for (int i = 0; i < kTrials; ++i) {
    for (auto& x : g1) x = normal(rng);
    for (auto& x : g2) x = normal(rng);
    if (analytics::t_test_independent(g1, g2).p_two_tailed < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kTrials;
  expect(std::fabs(rate - 0.05) <= 0.02, fmt::format("null rejection rate {}", rate));
}

// ---- 6 -------------------------------------------------------------------
std::string manifest_line(const CritiqueRecord& r) { return r.sheet.sheet_id + " " + r.content_hash; }

int verify_store_child(const std::string& dir, const std::string& manifest) {
  FileRepository repo(dir);
  std::ifstream in(manifest);
  std::size_t count = 0;
  for (std::string id, hash; in >> id >> hash; ++count) {
    const auto r = repo.load(id);
    if (r.content_hash != hash || make_record(r.sheet).content_hash != hash) return 3;
  }
  return repo.all().size() == count ? 0 : 4;
}

void persistence(const char* self) {
  oracle::TempDir dir;
  std::mt19937_64 rng(5150);
  std::vector<CritiqueRecord> records;
  {
    FileRepository repo(dir.path() / "store");
    for (int i = 0; i < 1000; ++i) {
      auto s = oracle::random_complete_sheet(rng, cat(), "artefact-" + std::to_string(i % 37),
                                             "appraiser-" + std::to_string(i % 5));
      s = set_note(std::move(s), 1 + i % 30, fmt::format("note {} | with \"quotes\"\nand a line break", i));
      if (i % 7 == 0) {
        s = clear_response(std::move(s), 3);
      } else if (i % 2 == 0) {
        s = finalize(std::move(s));
      }
      const auto rec = make_record(s);
      repo.save(rec);
      records.push_back(rec);
    }
    for (const auto& r : records) expect(repo.load(r.sheet.sheet_id) == r, "save/load mismatch");
  }

  // A separate process reads the store back.
  const auto manifest = dir.path() / "manifest.txt";
  {
    std::ofstream out(manifest);
    for (const auto& r : records) out << manifest_line(r) << '\n';
  }
  const pid_t pid = fork();
  if (pid == 0) {
    execl(self, self, "--verify-store", (dir.path() / "store").c_str(), manifest.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  expect(WIFEXITED(status) && WEXITSTATUS(status) == 0,
         fmt::format("restarted process saw a different store (status {})", WEXITSTATUS(status)));

  FileRepository reopened(dir.path() / "store");
  const auto bundle = dir.path() / "bundle.json";
  expect(reopened.export_all(bundle) == 1000, "export count");
  FileRepository imported(dir.path() / "imported");
  expect(imported.import_all(bundle) == 1000, "import count");
  expect(imported.all() == reopened.all(), "bundle round trip differs");

  auto doc = json::parse(std::ifstream(bundle));
  doc[613]["responses"][4]["value"] = 5;
  const auto corrupt = dir.path() / "corrupt.json";
  std::ofstream(corrupt) << doc.dump();
  FileRepository empty(dir.path() / "empty");
  bool rejected = false;
  try {
    empty.import_all(corrupt);
  } catch (const Error& e) {
    rejected = std::string(e.what()).find("record 614") != std::string::npos;
  }
  expect(rejected, "corrupt bundle was not rejected with the record index");
  expect(empty.all().empty(), "corrupt bundle left records behind");
}

// ---- 7 -------------------------------------------------------------------
void report_structure() {
  std::mt19937_64 rng(8080);
  for (int i = 0; i < 300; ++i) {
    auto s = oracle::random_complete_sheet(rng, cat());
    if (i % 3 == 0) s = set_note(std::move(s), 1 + i % 30, "| #5 | fake row\n| #6 |");
    s = finalize(std::move(s));
    const auto md_problem = oracle::check_markdown(report::render_markdown(s, cat()), s, cat());
    expect(md_problem.empty(), "markdown: " + md_problem);
    const auto html_problem = oracle::check_html(report::render_html(s, cat()), s, cat());
    expect(html_problem.empty(), "html: " + html_problem);
  }
}

// ---- 8 -------------------------------------------------------------------
void cli_end_to_end() {
  oracle::TempDir dir;
  const auto problems = oracle::run_golden_script(dir.path());
  if (!problems.empty()) throw Failure{problems.front().golden + ": " + problems.front().detail};
}

// ---- 9 -------------------------------------------------------------------
void service_conformance() {
  MemoryRepository repo;
  oracle::LiveServer server(cat(), repo);
  auto c = server.client();
  const std::string ct = "application/json";
  auto status = [](const httplib::Result& r) { return r ? r->status : -1; };

  auto created = c.Post("/api/critiques", R"({"artefact_key":"poster"})", ct);
  expect(status(created) == 201, "POST /api/critiques != 201");
  const std::string id = json::parse(created->body)["sheet_id"];
  auto doc = json::parse(c.Get("/api/critiques/" + id)->body);
  doc.erase("content_hash");

  auto complete = doc;
  complete["overview"] = {{"design_name", "P"}, {"essence", "E"},
                          {"circled_words", {"clear", "clever", "reliable", "organised", "useful"}}};
  for (auto& r : complete["responses"]) r["value"] = 1;

  auto other = json::parse(c.Post("/api/critiques", R"({"artefact_key":"elsewhere"})", ct)->body);
  other.erase("content_hash");
  auto other_complete = complete;
  other_complete["sheet_id"] = other["sheet_id"];
  other_complete["artefact_key"] = "elsewhere";
  other_complete["created_at"] = other["created_at"];
  other_complete["updated_at"] = other["updated_at"];
  const std::string other_id = other["sheet_id"];

  struct Step {
    std::string name;
    std::function<httplib::Result()> call;
    int expected;
  };
  const std::vector<Step> steps = {
      {"GET catalog", [&] { return c.Get("/api/catalog"); }, 200},
      {"POST malformed", [&] { return c.Post("/api/critiques", "{", ct); }, 400},
      {"GET unknown", [&] { return c.Get("/api/critiques/none"); }, 404},
      {"PUT malformed", [&] { return c.Put("/api/critiques/" + id, "[", ct); }, 400},
      {"PUT unknown", [&] { return c.Put("/api/critiques/none", doc.dump(), ct); }, 404},
      {"score draft", [&] { return c.Get("/api/critiques/" + id + "/score"); }, 422},
      {"finalize incomplete", [&] { return c.Post("/api/critiques/" + id + "/finalize", "", ct); }, 422},
      {"finalize unknown", [&] { return c.Post("/api/critiques/none/finalize", "", ct); }, 404},
      {"report draft", [&] { return c.Get("/api/critiques/" + id + "/report?format=md"); }, 422},
      {"PUT complete", [&] { return c.Put("/api/critiques/" + id, complete.dump(), ct); }, 200},
      {"score complete", [&] { return c.Get("/api/critiques/" + id + "/score"); }, 200},
      {"diff draft", [&] { return c.Get("/api/diff?from=" + id + "&to=" + id); }, 422},
      {"finalize", [&] { return c.Post("/api/critiques/" + id + "/finalize", "", ct); }, 200},
      {"finalize twice", [&] { return c.Post("/api/critiques/" + id + "/finalize", "", ct); }, 409},
      {"PUT finalized", [&] { return c.Put("/api/critiques/" + id, complete.dump(), ct); }, 409},
      {"GET finalized", [&] { return c.Get("/api/critiques/" + id); }, 200},
      {"history", [&] { return c.Get("/api/critiques?artefact_key=poster"); }, 200},
      {"report md", [&] { return c.Get("/api/critiques/" + id + "/report?format=md"); }, 200},
      {"report html", [&] { return c.Get("/api/critiques/" + id + "/report?format=html"); }, 200},
      {"report unknown", [&] { return c.Get("/api/critiques/none/report"); }, 404},
      {"diff self", [&] { return c.Get("/api/diff?from=" + id + "&to=" + id); }, 200},
      {"diff missing param", [&] { return c.Get("/api/diff?from=" + id); }, 400},
      {"diff unknown", [&] { return c.Get("/api/diff?from=" + id + "&to=none"); }, 404},
      {"PUT other", [&] { return c.Put("/api/critiques/" + other_id, other_complete.dump(), ct); }, 200},
      {"finalize other", [&] { return c.Post("/api/critiques/" + other_id + "/finalize", "", ct); }, 200},
      {"diff cross-artefact", [&] { return c.Get("/api/diff?from=" + id + "&to=" + other_id); }, 409},
      {"alpha ok", [&] { return c.Post("/api/analytics/alpha", json{{"rows", {std::vector<int>(30, 1), std::vector<int>(30, -1)}}}.dump(), ct); }, 200},
      {"alpha undefined", [&] { return c.Post("/api/analytics/alpha", json{{"rows", {std::vector<int>(30, 1), std::vector<int>(30, 1)}}}.dump(), ct); }, 422},
      {"alpha malformed", [&] { return c.Post("/api/analytics/alpha", "x", ct); }, 400},
      {"ttest ok", [&] { return c.Post("/api/analytics/ttest", R"({"group1":[1,2,3],"group2":[1,2,3]})", ct); }, 200},
      {"ttest undersized", [&] { return c.Post("/api/analytics/ttest", R"({"group1":[5],"group2":[1,2]})", ct); }, 422},
      {"ttest malformed", [&] { return c.Post("/api/analytics/ttest", R"({"group1":"x"})", ct); }, 400},
      {"word frequencies", [&] { return c.Get("/api/analytics/word-frequencies?group_by=artefact"); }, 200},
      {"word frequencies bad tag", [&] { return c.Get("/api/analytics/word-frequencies?group_by=x"); }, 400},
  };
  for (const auto& s : steps) {
    const auto r = s.call();
    expect(status(r) == s.expected, fmt::format("{}: status {} expected {}", s.name, status(r), s.expected));
    if (s.expected >= 400) {
      const auto body = json::parse(r->body);
      expect(body.contains("error") && body["error"].contains("code") && body["error"].contains("message") &&
                 body["error"].contains("details"),
             s.name + ": error body shape");
    }
  }
  const auto score = json::parse(c.Get("/api/critiques/" + id + "/score")->body);
  expect(score["total"] == 30, "score endpoint total");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 4 && std::string(argv[1]) == "--verify-store") return verify_store_child(argv[2], argv[3]);

  struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {"catalog integrity", 1.0, catalog_integrity},
      {"scoring oracle equivalence (10000 sheets)", 10.0, scoring_oracle},
      {"diff algebra (1000 pairs)", 5.0, diff_algebra},
      {"cronbach alpha fixtures and invariance (1000 matrices)", 0.0, cronbach},
      {"t-test fixtures and null calibration (10000 trials)", 60.0, t_test},
      {"persistence round trip (1000 records)", 0.0, [&] { persistence(argv[0]); }},
      {"report structure", 0.0, report_structure},
      {"cli end-to-end golden outputs", 0.0, cli_end_to_end},
      {"service status-code conformance (in-memory store)", 0.0, service_conformance},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      c.body();
    } catch (const Failure& f) {
      problem = f.why;
    } catch (const std::exception& e) {
      problem = std::string("unexpected exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty() && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      problem = fmt::format("took {:.2f} s, budget {:.0f} s", seconds, c.budget_seconds);
    }
    if (problem.empty()) {
      std::cout << fmt::format("PASS  {} ({:.2f} s)\n", c.name, seconds);
    } else {
      ++failed;
      std::cout << fmt::format("FAIL  {} ({:.2f} s): {}\n", c.name, seconds, problem);
    }
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size());
  return failed == 0 ? 0 : 1;
}
