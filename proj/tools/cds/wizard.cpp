#include "wizard.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>

#include "cds/csv.hpp"
#include "cds/error.hpp"

namespace cds::cli {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Likert entry; accepts a leading U+2212 minus as well as '-'.
std::optional<int> parse_likert(std::string text) {
  static constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";
  if (text.starts_with(kUnicodeMinus)) text = "-" + text.substr(kUnicodeMinus.size());
  auto v = parse_int(text);
  if (!v || *v < kLikertMin || *v > kLikertMax) return std::nullopt;
  return v;
}

struct Quit {};

class Prompter {
 public:
  Prompter(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  /// Throws Quit on end of input or ":q".
  std::string ask(std::string_view prompt, bool short_quit = false) {
    out_ << prompt << std::flush;
    std::string line;
    if (!std::getline(in_, line)) {
      out_ << '\n';
      throw Quit{};
    }
    line = trim(line);
    if (line == ":q" || (short_quit && (line == "q" || line == "Q"))) throw Quit{};
    return line;
  }

  std::ostream& out() { return out_; }

 private:
  std::istream& in_;
  std::ostream& out_;
};

std::string current_hint(std::string_view current) {
  return current.empty() ? "" : fmt::format(" [{}]", current);
}

std::string join_words(const std::vector<std::string>& words, std::string_view sep) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += sep;
    s += w;
  }
  return s;
}

CritiqueSheet stage_overview(CritiqueSheet sheet, const HeuristicCatalog& catalog, Prompter& p, const SaveFn& save) {
  auto& out = p.out();
  out << "\nStage 1: Overview\n";
  std::string name = p.ask(fmt::format("Design name{}: ", current_hint(sheet.overview.design_name)));
  if (name.empty()) name = sheet.overview.design_name;
  std::string essence = p.ask(fmt::format("Essence of the design{}: ", current_hint(sheet.overview.essence)));
  if (essence.empty()) essence = sheet.overview.essence;
  const auto previous_words = sheet.overview.circled_words;
  sheet = set_overview(std::move(sheet), catalog, name, essence, previous_words);
  save(sheet);

  out << "First impression words:\n";
  const auto& lexicon = catalog.lexicon();
  std::string row;
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    row += fmt::format("  {:>2}. {:<14}", i + 1, lexicon[i].word);
    if (i % 4 == 3 || i + 1 == lexicon.size()) {
      out << trim(row) << '\n';
      row.clear();
    }
  }
  const bool have_words = sheet.overview.circled_words.size() == static_cast<std::size_t>(kCircledWordCount);
  for (;;) {
    const std::string entry = p.ask(fmt::format("Circle exactly {} words (names or numbers){}: ", kCircledWordCount,
                                                current_hint(join_words(sheet.overview.circled_words, ", "))),
                                    true);
    if (entry.empty() && have_words) break;
    std::vector<std::string> words;
    try {
      words = parse_word_list(entry, catalog);
    } catch (const Error& e) {
      out << e.what() << '\n';
      continue;
    }
    const auto unknown = std::find_if(words.begin(), words.end(),
                                      [&](const std::string& w) { return !catalog.sentiment_of(w); });
    if (unknown != words.end()) {
      out << fmt::format("'{}' is not in the word list\n", *unknown);
      continue;
    }
    if (words.size() != static_cast<std::size_t>(kCircledWordCount)) {
      out << fmt::format("exactly {} required, you gave {}\n", kCircledWordCount, words.size());
      continue;
    }
    try {
      sheet = set_overview(std::move(sheet), catalog, name, essence, words);
    } catch (const Error& e) {
      out << e.what() << '\n';
      continue;
    }
    save(sheet);
    break;
  }
  return sheet;
}

CritiqueSheet stage_detail(CritiqueSheet sheet, const HeuristicCatalog& catalog, Prompter& p, const SaveFn& save) {
  auto& out = p.out();
  out << "\nStage 2: Detail\n";
  int start = 1;
  for (const auto& r : sheet.responses) {
    if (!r.value) {
      start = r.number;
      break;
    }
  }
  if (start > 1) out << fmt::format("Resuming at #{}.\n", start);
  for (int n = start; n <= kHeuristicCount; ++n) {
    const Heuristic& h = catalog.heuristic(n);
    const HeuristicResponse& current = sheet.response(n);
    out << fmt::format("\n#{} [{}] {}\n", n, catalog.perspective(h.perspective).display_name, h.question);
    out << fmt::format("    -2 = {}   +2 = {}\n", h.negative_anchor, h.positive_anchor);
    int value = 0;
    for (;;) {
      const std::string hint = current.value ? fmt::format(" [{}]", current.value > 0 ? fmt::format("+{}", *current.value)
                                                                                        : std::to_string(*current.value))
                                             : "";
      const std::string entry = p.ask(fmt::format("Value -2..+2{} (q to save and quit): ", hint), true);
      if (entry.empty() && current.value) {
        value = *current.value;
        break;
      }
      if (auto v = parse_likert(entry)) {
        value = *v;
        break;
      }
      out << fmt::format("value must be an integer from {} to +{}\n", kLikertMin, kLikertMax);
    }
    std::string note = p.ask(fmt::format("Note (optional){}: ", current_hint(current.note)));
    if (note.empty()) note = current.note;
    sheet = set_response(std::move(sheet), n, value, note);
    save(sheet);
  }
  return sheet;
}

WizardResult stage_review(CritiqueSheet sheet, const HeuristicCatalog& catalog, Prompter& p, const SaveFn& save) {
  auto& out = p.out();
  out << "\nStage 3: Review\n";
  const auto missing = missing_items(sheet);
  const int unset = kHeuristicCount - sheet.answered_count();
  if (unset == 0) {
    const ScoreSummary s = compute_score(sheet, catalog);
    out << fmt::format("Total: {} / {}   Mean: {:.2f}\n", s.total, kMaxTotal, s.mean.value());
    for (const auto id : kAllPerspectives) {
      out << fmt::format("  {:<14} {:>3} / {}\n", catalog.perspective(id).display_name, s.subtotal(id), kMaxSubtotal);
    }
  } else {
    out << fmt::format("Score available once every heuristic is answered ({} unset).\n", unset);
  }
  std::string reflections = p.ask(fmt::format("Reflections{}: ", current_hint(sheet.review.reflections)));
  if (reflections.empty()) reflections = sheet.review.reflections;
  std::string next_steps = p.ask(fmt::format("Next steps{}: ", current_hint(sheet.review.next_steps)));
  if (next_steps.empty()) next_steps = sheet.review.next_steps;
  sheet = set_review(std::move(sheet), reflections, next_steps);
  save(sheet);

  if (!missing.empty()) {
    out << "Not ready to finalize:\n";
    for (const auto& m : missing) out << "  - " << m.describe() << '\n';
    return {std::move(sheet), WizardOutcome::kCompleted};
  }
  const std::string answer = lower(p.ask("Finalize now? A finalized critique cannot be edited. [y/N]: ", false));
  if (answer == "y" || answer == "yes") {
    sheet = finalize(std::move(sheet));
    save(sheet);
    out << "Finalized.\n";
    return {std::move(sheet), WizardOutcome::kFinalized};
  }
  return {std::move(sheet), WizardOutcome::kCompleted};
}

}  // namespace

int resume_stage(const CritiqueSheet& sheet) {
  if (sheet.overview.design_name.empty() ||
      sheet.overview.circled_words.size() != static_cast<std::size_t>(kCircledWordCount)) {
    return 1;
  }
  return sheet.answered_count() < kHeuristicCount ? 2 : 3;
}

std::vector<std::string> parse_word_list(std::string_view text, const HeuristicCatalog& catalog) {
  std::vector<std::string> words;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (auto n = parse_int(token)) {
      if (*n < 1 || *n > static_cast<int>(catalog.lexicon().size())) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("word number {} is outside 1..{}", *n, catalog.lexicon().size()));
      }
      words.push_back(catalog.lexicon()[static_cast<std::size_t>(*n - 1)].word);
    } else {
      words.push_back(lower(token));
    }
    token.clear();
  };
  for (const char c : text) {
    if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return words;
}

WizardResult run_wizard(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::istream& in, std::ostream& out,
                        const SaveFn& save, int start_stage) {
  if (sheet.finalized()) {
    throw Error(ErrorCode::kConflict, fmt::format("sheet {} is finalized and cannot be edited", sheet.sheet_id));
  }
  if (start_stage == 0) start_stage = resume_stage(sheet);
  if (start_stage < 1 || start_stage > 3) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("stage must be 1, 2 or 3, got {}", start_stage));
  }
  Prompter p(in, out);
  const std::string id = sheet.sheet_id;
  CritiqueSheet latest = sheet;
  const SaveFn tracked = [&](const CritiqueSheet& s) {
    save(s);
    latest = s;
  };
  out << fmt::format("Critique {} of '{}'. Type :q at any prompt to save and quit.\n", sheet.sheet_id,
                     sheet.artefact_key);
  try {
    if (start_stage <= 1) sheet = stage_overview(sheet, catalog, p, tracked);
    if (start_stage <= 2) sheet = stage_detail(sheet, catalog, p, tracked);
    return stage_review(sheet, catalog, p, tracked);
  } catch (const Quit&) {
    out << fmt::format("Draft saved. Resume with: cds fill {}\n", id);
    return {std::move(latest), WizardOutcome::kQuit};
  }
}

CritiqueSheet apply_answers(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::string_view csv_text) {
  if (sheet.finalized()) {
    throw Error(ErrorCode::kConflict, fmt::format("sheet {} is finalized and cannot be edited", sheet.sheet_id));
  }
  const auto rows = csv::parse(csv_text);
  if (rows.empty() || rows.front().fields.size() < 2 || lower(trim(rows.front().fields[0])) != "item" ||
      lower(trim(rows.front().fields[1])) != "value") {
    throw Error(ErrorCode::kInvalidArgument, "answers file must start with the header item,value[,note]");
  }
  std::string name = sheet.overview.design_name;
  std::string essence = sheet.overview.essence;
  std::vector<std::string> words = sheet.overview.circled_words;
  std::string reflections = sheet.review.reflections;
  std::string next_steps = sheet.review.next_steps;
  std::set<std::string> seen;

  auto fail = [](const csv::Row& row, const std::string& message) -> Error {
    return Error(ErrorCode::kInvalidArgument, fmt::format("answers line {}: {}", row.line, message));
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() < 2 || row.fields.size() > 3) throw fail(row, "expected item,value[,note]");
    const std::string item = lower(trim(row.fields[0]));
    const std::string value = trim(row.fields[1]);
    const std::string note = row.fields.size() == 3 ? trim(row.fields[2]) : "";
    if (!seen.insert(item).second) throw fail(row, fmt::format("item '{}' appears twice", item));
    try {
      if (item == "name") {
        name = value;
      } else if (item == "essence") {
        essence = value;
      } else if (item == "words") {
        words = parse_word_list(value, catalog);
        if (words.size() != static_cast<std::size_t>(kCircledWordCount)) {
          throw Error(ErrorCode::kInvalidArgument,
                      fmt::format("exactly {} required, got {}", kCircledWordCount, words.size()));
        }
      } else if (item == "reflections") {
        reflections = value;
      } else if (item == "next_steps") {
        next_steps = value;
      } else if (auto n = parse_int(item); n && *n >= 1 && *n <= kHeuristicCount) {
        if (value.empty()) {
          sheet = set_note(clear_response(std::move(sheet), *n), *n, note);
        } else if (auto v = parse_likert(value)) {
          sheet = set_response(std::move(sheet), *n, *v, note);
        } else {
          throw Error(ErrorCode::kOutOfRange, fmt::format("heuristic #{} value '{}' must be an integer from {} to +{}",
                                                          *n, value, kLikertMin, kLikertMax));
        }
      } else {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown item '{}'", item));
      }
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("answers line {}: {}", row.line, e.what()), e.details());
    }
  }
  sheet = set_overview(std::move(sheet), catalog, name, essence, words);
  return set_review(std::move(sheet), reflections, next_steps);
}

}  // namespace cds::cli
