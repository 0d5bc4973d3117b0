#include "cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cds/analytics.hpp"
#include "cds/catalog.hpp"
#include "cds/critique.hpp"
#include "cds/critique_json.hpp"
#include "cds/csv.hpp"
#include "cds/report.hpp"
#include "cds/service.hpp"
#include "cds/store.hpp"
#include "wizard.hpp"

namespace cds::cli {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  return fmt::format("{}", v);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << body) || !f.flush()) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path));
}

/// Global state shared by the subcommands; the store opens lazily so that
/// store-free commands work without a writable directory.
struct Context {
  std::string store_dir;
  std::string catalog_path;
  std::string output = "plain";
  std::istream* in = nullptr;
  std::ostream* out = nullptr;

  std::optional<HeuristicCatalog> loaded_catalog;
  std::unique_ptr<FileRepository> repo;

  const HeuristicCatalog& catalog() {
    if (catalog_path.empty()) return default_catalog();
    if (!loaded_catalog) loaded_catalog = load_catalog_file(catalog_path);
    return *loaded_catalog;
  }

  FileRepository& store() {
    if (!repo) repo = std::make_unique<FileRepository>(store_dir.empty() ? default_store_dir() : fs::path(store_dir));
    return *repo;
  }

  void emit(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
      *out << body;
    } else {
      write_file(out_path, body);
    }
  }
};

/// Column spec `path[:column]`; the column is a header name or 1-based index.
std::vector<double> read_column(const std::string& spec) {
  std::string path = spec;
  std::string column;
  if (!fs::exists(spec)) {
    const auto colon = spec.rfind(':');
    if (colon != std::string::npos) {
      path = spec.substr(0, colon);
      column = spec.substr(colon + 1);
    }
  }
  const auto rows = csv::parse(read_file(path));
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, fmt::format("{} is empty", path));

  auto parse_double = [](const std::string& s) -> std::optional<double> {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  };

  std::size_t index = 0;
  const auto& first = rows.front().fields;
  if (!column.empty()) {
    if (auto n = parse_double(column); n && *n >= 1 && *n == static_cast<double>(static_cast<std::size_t>(*n))) {
      index = static_cast<std::size_t>(*n) - 1;
    } else {
      const auto it = std::find(first.begin(), first.end(), column);
      if (it == first.end()) throw Error(ErrorCode::kInvalidArgument, fmt::format("{} has no column '{}'", path, column));
      index = static_cast<std::size_t>(it - first.begin());
    }
  }
  std::vector<double> values;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    if (index >= fields.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} line {}: no column {}", path, rows[r].line, index + 1));
    }
    if (auto v = parse_double(fields[index])) {
      values.push_back(*v);
    } else if (r != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} line {} column {}: '{}' is not a number", path, rows[r].line, index + 1, fields[index]));
    }
  }
  return values;
}

void print_score(Context& ctx, const CritiqueSheet& sheet) {
  const auto& catalog = ctx.catalog();
  const ScoreSummary s = compute_score(sheet, catalog);
  const std::string exact = fmt::format("{}/{}", s.mean.numerator, s.mean.denominator);
  auto& out = *ctx.out;
  if (ctx.output == "csv") {
    out << "key,value\n";
    out << fmt::format("total,{}\nmean,{}\nmean_exact,{}\n", s.total, format_number(s.mean.value()), exact);
    for (const auto id : kAllPerspectives) out << fmt::format("{},{}\n", perspective_key(id), s.subtotal(id));
    const auto& c = s.circled_sentiment_counts;
    out << fmt::format("words_positive,{}\nwords_negative,{}\nwords_neutral,{}\n", c.positive, c.negative, c.neutral);
    return;
  }
  out << fmt::format("total={} mean={:.2f}\n", s.total, s.mean.value());
  out << fmt::format("mean_exact={}\n", exact);
  for (const auto id : kAllPerspectives) out << fmt::format("{}={}\n", perspective_key(id), s.subtotal(id));
  const auto& c = s.circled_sentiment_counts;
  out << fmt::format("words positive={} negative={} neutral={}\n", c.positive, c.negative, c.neutral);
}

void print_diff(Context& ctx, const CritiqueSheet& a, const CritiqueSheet& b) {
  const auto& catalog = ctx.catalog();
  const CritiqueDiff d = diff(a, b, catalog);
  auto& out = *ctx.out;
  if (ctx.output == "csv") {
    out << report::diff_csv(d, catalog);
    return;
  }
  if (ctx.output == "md") {
    out << report::render_diff_report(d, a, b, catalog);
    return;
  }
  out << fmt::format("total_delta={}\n", report::signed_value(d.total_delta));
  for (const auto id : kAllPerspectives) {
    out << fmt::format("{}={}\n", perspective_key(id), report::signed_value(d.perspective_delta(id)));
  }
  for (int n = 1; n <= kHeuristicCount; ++n) {
    if (d.heuristic_delta(n) != 0) out << fmt::format("#{}={}\n", n, report::signed_value(d.heuristic_delta(n)));
  }
  out << fmt::format("words_added={}\n", fmt::join(d.words_added, ","));
  out << fmt::format("words_removed={}\n", fmt::join(d.words_removed, ","));
}

void print_alpha(Context& ctx, const analytics::ReliabilityResult& r) {
  auto& out = *ctx.out;
  if (ctx.output == "csv") {
    out << "alpha,k,n,total_variance\n";
    out << fmt::format("{},{},{},{}\n", format_number(r.alpha), r.k, r.n, format_number(r.total_variance));
    return;
  }
  out << fmt::format("alpha={:.6f}\n", r.alpha);
  out << fmt::format("k={} n={}\n", r.k, r.n);
}

void print_ttest(Context& ctx, const analytics::TTestResult& r, const std::string& stimulus, const std::string& g1,
                 const std::string& g2) {
  auto& out = *ctx.out;
  if (ctx.output == "csv") {
    out << analytics::ttest_csv(r, stimulus, g1, g2);
    return;
  }
  out << fmt::format("t={} p={} df={}\n", format_number(r.t), format_number(r.p_two_tailed), format_number(r.df));
  out << fmt::format("{}: mean={} sd={} n={}\n", g1, format_number(r.mean1), format_number(r.sd1), r.n1);
  out << fmt::format("{}: mean={} sd={} n={}\n", g2, format_number(r.mean2), format_number(r.sd2), r.n2);
}

void print_words(Context& ctx, const analytics::WordFrequencyTable& table) {
  auto& out = *ctx.out;
  if (ctx.output != "plain") {
    out << table.to_csv();
    return;
  }
  for (const auto& [key, cell] : table.cells()) {
    out << fmt::format("group={} stimulus={} sheets={}\n", key.first, key.second, cell.sheets);
    for (std::size_t i = 0; i < table.words().size(); ++i) {
      if (cell.counts[i] != 0) out << fmt::format("  {}={}\n", table.words()[i], cell.counts[i]);
    }
  }
}

void print_error(std::ostream& err, const Error& e) {
  err << "error: " << e.what() << '\n';
  for (const auto& d : e.details()) err << "  - " << d << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.in = &in;
  ctx.out = &out;

  CLI::App app{"Critical Design Survey: heuristic critiques of visualisation designs", "cds"};
  app.require_subcommand(1);
  app.add_option("--store", ctx.store_dir, "Store directory (default: $CDS_STORE_DIR or the user data dir)");
  app.add_option("--catalog", ctx.catalog_path, "Catalog file (default: the built-in catalog)")->check(CLI::ExistingFile);

  auto add_output = [&ctx](CLI::App* cmd, std::vector<std::string> choices) {
    cmd->add_option("--output", ctx.output, "Output format")
        ->check(CLI::IsMember(choices))
        ->capture_default_str();
  };

  std::function<void()> action;

  // new
  std::string artefact;
  std::string appraiser;
  std::string explicit_id;
  auto* cmd_new = app.add_subcommand("new", "Create a draft critique and print its id");
  cmd_new->add_option("--artefact", artefact, "Key of the design being critiqued")->required();
  cmd_new->add_option("--appraiser", appraiser, "Who is critiquing");
  cmd_new->add_option("--id", explicit_id, "Use this sheet id instead of a random one");
  cmd_new->callback([&] {
    action = [&] {
      CritiqueSheet sheet = new_draft(artefact, appraiser, ctx.catalog());
      if (!explicit_id.empty()) {
        if (!is_valid_sheet_id(explicit_id)) {
          throw Error(ErrorCode::kInvalidArgument, fmt::format("'{}' is not a valid sheet id", explicit_id));
        }
        if (ctx.store().contains(explicit_id)) {
          throw Error(ErrorCode::kConflict, fmt::format("sheet {} already exists", explicit_id));
        }
        sheet.sheet_id = explicit_id;
      }
      ctx.store().save(sheet);
      out << sheet.sheet_id << '\n';
    };
  });

  // fill
  std::string sheet_id;
  int stage = 0;
  std::string answers_path;
  bool finalize_after = false;
  auto* cmd_fill = app.add_subcommand("fill", "Fill a draft interactively or from an answers file");
  cmd_fill->add_option("sheet_id", sheet_id)->required();
  cmd_fill->add_option("--stage", stage, "Stage to start at")->check(CLI::Range(1, 3));
  cmd_fill->add_option("--answers", answers_path, "CSV item,value[,note] to apply without prompting")
      ->check(CLI::ExistingFile);
  cmd_fill->add_flag("--finalize", finalize_after, "Finalize after applying --answers");
  cmd_fill->callback([&] {
    action = [&] {
      auto& store = ctx.store();
      CritiqueSheet sheet = store.load(sheet_id).sheet;
      if (!answers_path.empty()) {
        sheet = apply_answers(std::move(sheet), ctx.catalog(), read_file(answers_path));
        if (finalize_after) sheet = finalize(std::move(sheet));
        store.save(sheet);
        out << fmt::format("{} {} answered={}/{}\n", sheet.sheet_id, status_key(sheet.status), sheet.answered_count(),
                           kHeuristicCount);
        return;
      }
      if (finalize_after) throw CLI::ValidationError("--finalize", "requires --answers");
      run_wizard(std::move(sheet), ctx.catalog(), *ctx.in, out, [&](const CritiqueSheet& s) { store.save(s); }, stage);
    };
  });

  // finalize
  auto* cmd_finalize = app.add_subcommand("finalize", "Lock a complete critique");
  cmd_finalize->add_option("sheet_id", sheet_id)->required();
  cmd_finalize->callback([&] {
    action = [&] {
      auto& store = ctx.store();
      store.save(finalize(store.load(sheet_id).sheet));
      out << fmt::format("{} finalized\n", sheet_id);
    };
  });

  // score
  auto* cmd_score = app.add_subcommand("score", "Total, mean and perspective subtotals");
  cmd_score->add_option("sheet_id", sheet_id)->required();
  add_output(cmd_score, {"plain", "csv"});
  cmd_score->callback([&] { action = [&] { print_score(ctx, ctx.store().load(sheet_id).sheet); }; });

  // diff
  std::string later_id;
  auto* cmd_diff = app.add_subcommand("diff", "Change between two finalized critiques of one artefact");
  cmd_diff->add_option("earlier", sheet_id)->required();
  cmd_diff->add_option("later", later_id)->required();
  add_output(cmd_diff, {"plain", "csv", "md"});
  cmd_diff->callback([&] {
    action = [&] { print_diff(ctx, ctx.store().load(sheet_id).sheet, ctx.store().load(later_id).sheet); };
  });

  // report
  std::string format = "md";
  std::string out_path;
  auto* cmd_report = app.add_subcommand("report", "Render a finalized critique");
  cmd_report->add_option("sheet_id", sheet_id)->required();
  cmd_report->add_option("--format", format)->check(CLI::IsMember({"md", "html", "csv"}))->capture_default_str();
  cmd_report->add_option("--out", out_path, "Write here instead of stdout");
  cmd_report->callback([&] {
    action = [&] {
      const CritiqueSheet sheet = ctx.store().load(sheet_id).sheet;
      const auto& catalog = ctx.catalog();
      if (format == "html") {
        ctx.emit(report::render_html(sheet, catalog), out_path);
      } else if (format == "csv") {
        ctx.emit(report::score_csv(sheet, catalog), out_path);
      } else {
        ctx.emit(report::render_markdown(sheet, catalog), out_path);
      }
    };
  });

  // list
  std::string filter_artefact;
  auto* cmd_list = app.add_subcommand("list", "Stored critiques, oldest first");
  cmd_list->add_option("--artefact", filter_artefact, "Only this artefact's history");
  cmd_list->callback([&] {
    action = [&] {
      auto line = [&](const std::string& id, const std::string& key, SheetStatus st, Timestamp created,
                      const std::optional<ScoreSummary>& score) {
        out << fmt::format("{} {} {} {} {}\n", id, key, status_key(st), format_rfc3339(created),
                           score ? std::to_string(score->total) : "-");
      };
      if (!filter_artefact.empty()) {
        for (const auto& h : ctx.store().history(filter_artefact, ctx.catalog())) {
          line(h.sheet_id, h.artefact_key, h.status, h.created_at, h.score);
        }
        return;
      }
      for (const auto& r : ctx.store().all()) {
        const auto& s = r.sheet;
        std::optional<ScoreSummary> score;
        if (s.finalized() && s.catalog_version == ctx.catalog().version_tag()) score = compute_score(s, ctx.catalog());
        line(s.sheet_id, s.artefact_key, s.status, s.created_at, score);
      }
    };
  });

  // stats
  auto* cmd_stats = app.add_subcommand("stats", "Cohort statistics");
  cmd_stats->require_subcommand(1);
  std::string matrix_path;
  auto* cmd_alpha = cmd_stats->add_subcommand("alpha", "Cronbach's alpha of a response matrix");
  cmd_alpha->add_option("--matrix", matrix_path, "CSV respondent,group,stimulus,q1..q30")
      ->required()
      ->check(CLI::ExistingFile);
  add_output(cmd_alpha, {"plain", "csv"});
  cmd_alpha->callback([&] {
    action = [&] { print_alpha(ctx, analytics::cronbach_alpha(analytics::import_matrix(read_file(matrix_path)))); };
  });

  std::string g1_spec;
  std::string g2_spec;
  bool welch = false;
  std::string stimulus;
  std::string g1_label = "group1";
  std::string g2_label = "group2";
  auto* cmd_ttest = cmd_stats->add_subcommand("ttest", "Independent two-sample t-test");
  cmd_ttest->add_option("--g1", g1_spec, "path[:column]")->required();
  cmd_ttest->add_option("--g2", g2_spec, "path[:column]")->required();
  cmd_ttest->add_flag("--welch", welch, "Unequal-variance form");
  cmd_ttest->add_option("--stimulus", stimulus, "Stimulus label for CSV output");
  cmd_ttest->add_option("--label1", g1_label)->capture_default_str();
  cmd_ttest->add_option("--label2", g2_label)->capture_default_str();
  add_output(cmd_ttest, {"plain", "csv"});
  cmd_ttest->callback([&] {
    action = [&] {
      const auto a = read_column(g1_spec);
      const auto b = read_column(g2_spec);
      const auto variant = welch ? analytics::TTestVariant::kWelch : analytics::TTestVariant::kStudent;
      print_ttest(ctx, analytics::t_test_independent(a, b, variant), stimulus, g1_label, g2_label);
    };
  });

  // words
  std::string group_by = "appraiser";
  auto* cmd_words = app.add_subcommand("words", "Circled-word frequencies (plot-ready CSV)");
  cmd_words->add_option("--group-by", group_by, "appraiser, artefact, catalog or none")->capture_default_str();
  cmd_words->add_option("--artefact", filter_artefact, "Only this artefact's critiques");
  cmd_words->add_option("--output", ctx.output, "Output format")->check(CLI::IsMember({"plain", "csv"}));
  cmd_words->callback([&] {
    if (cmd_words->count("--output") == 0) ctx.output = "csv";
    action = [&] {
      const auto grouping = analytics::grouping_by(group_by);
      std::vector<CritiqueSheet> sheets;
      for (auto& r : ctx.store().all()) {
        if (filter_artefact.empty() || r.sheet.artefact_key == filter_artefact) sheets.push_back(std::move(r.sheet));
      }
      print_words(ctx, analytics::word_frequencies(sheets, grouping, ctx.catalog()));
    };
  });

  // export / import
  std::string bundle;
  auto* cmd_export = app.add_subcommand("export", "Write every record to one JSON bundle");
  cmd_export->add_option("bundle", bundle)->required();
  cmd_export->callback([&] {
    action = [&] { out << fmt::format("exported {} records\n", ctx.store().export_all(bundle)); };
  });
  auto* cmd_import = app.add_subcommand("import", "Load a bundle; nothing is stored if any record is invalid");
  cmd_import->add_option("bundle", bundle)->required()->check(CLI::ExistingFile);
  cmd_import->callback([&] {
    action = [&] { out << fmt::format("imported {} records\n", ctx.store().import_all(bundle)); };
  });

  // serve
  std::string addr = "127.0.0.1";
  int port = 8787;
  service::Options options;
  auto* cmd_serve = app.add_subcommand("serve", "Run the HTTP API");
  cmd_serve->add_option("--addr", addr)->capture_default_str();
  cmd_serve->add_option("--port", port)->check(CLI::Range(1, 65535))->capture_default_str();
  cmd_serve->add_option("--ui-origin", options.ui_origin, "Origin allowed to call the API from a browser");
  cmd_serve->add_option("--ui-dir", options.ui_dir, "Serve a built UI from this directory")->check(CLI::ExistingDirectory);
  cmd_serve->callback([&] {
    action = [&] {
      const service::Service svc(ctx.catalog(), ctx.store(), options);
      out << fmt::format("listening on http://{}:{}\n", addr, port) << std::flush;
      service::serve(svc, addr, port);
    };
  });

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    print_error(err, e);
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace cds::cli
