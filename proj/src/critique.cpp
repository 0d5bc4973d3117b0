#include "cds/critique.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <set>

namespace cds {

namespace {

void require_draft(const CritiqueSheet& sheet) {
  if (sheet.finalized()) {
    throw Error(ErrorCode::kConflict, fmt::format("sheet {} is finalized and cannot be modified", sheet.sheet_id));
  }
}

void require_number(int number) {
  if (number < 1 || number > kHeuristicCount) {
    throw Error(ErrorCode::kOutOfRange, fmt::format("heuristic number {} out of range 1..{}", number, kHeuristicCount));
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require_catalog(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  if (sheet.catalog_version != catalog.version_tag()) {
    throw Error(ErrorCode::kConflict, fmt::format("sheet {} uses catalog '{}' but catalog '{}' was supplied",
                                                  sheet.sheet_id, sheet.catalog_version, catalog.version_tag()));
  }
}

}  // namespace

std::string_view status_key(SheetStatus s) { return s == SheetStatus::kFinalized ? "finalized" : "draft"; }

std::optional<SheetStatus> parse_status_key(std::string_view key) {
  if (key == "draft") return SheetStatus::kDraft;
  if (key == "finalized") return SheetStatus::kFinalized;
  return std::nullopt;
}

const HeuristicResponse& CritiqueSheet::response(int number) const {
  require_number(number);
  return responses[static_cast<std::size_t>(number - 1)];
}

int CritiqueSheet::answered_count() const {
  return static_cast<int>(
      std::count_if(responses.begin(), responses.end(), [](const HeuristicResponse& r) { return r.value.has_value(); }));
}

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

bool CritiqueDiff::is_zero() const {
  return total_delta == 0 && words_added.empty() && words_removed.empty() &&
         std::all_of(per_heuristic_delta.begin(), per_heuristic_delta.end(), [](int d) { return d == 0; });
}

std::string MissingItem::describe() const {
  switch (kind) {
    case Kind::kHeuristic:
      return fmt::format("heuristic #{} is unset", number);
    case Kind::kCircledWords:
      return fmt::format("exactly {} circled words required, {} given", kCircledWordCount, word_count);
    case Kind::kDesignName:
      return "design_name is empty";
  }
  return {};
}

IncompleteError::IncompleteError(const std::string& message, std::vector<MissingItem> missing)
    : Error(ErrorCode::kIncomplete, message,
            [&] {
              std::vector<std::string> d;
              for (const auto& m : missing) d.push_back(m.describe());
              return d;
            }()),
      missing_(std::move(missing)) {}

std::string generate_sheet_id() {
  thread_local std::mt19937_64 rng{[] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }()};
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // variant 10
  return fmt::format("{:08x}-{:04x}-{:04x}-{:04x}-{:012x}", hi >> 32, (hi >> 16) & 0xffff, hi & 0xffff, lo >> 48,
                     lo & 0xffffffffffffULL);
}

bool is_valid_sheet_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  if (!std::isalnum(static_cast<unsigned char>(id.front()))) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

CritiqueSheet new_draft(std::string_view artefact_key, std::string_view appraiser, const HeuristicCatalog& catalog,
                        Timestamp now) {
  if (artefact_key.empty()) throw Error(ErrorCode::kInvalidArgument, "artefact_key must not be empty");
  CritiqueSheet sheet;
  sheet.sheet_id = generate_sheet_id();
  sheet.artefact_key = std::string(artefact_key);
  sheet.appraiser = std::string(appraiser);
  sheet.created_at = now;
  sheet.updated_at = now;
  sheet.catalog_version = catalog.version_tag();
  for (int n = 1; n <= kHeuristicCount; ++n) sheet.responses[static_cast<std::size_t>(n - 1)].number = n;
  return sheet;
}

CritiqueSheet set_overview(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::string_view design_name,
                           std::string_view essence, const std::vector<std::string>& words, Timestamp now) {
  require_draft(sheet);
  std::vector<std::string> normalized;
  std::set<std::string> seen;
  for (const auto& w : words) {
    std::string word = lowercase(w);
    if (!catalog.sentiment_of(word)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown word '{}': not in the first-impression lexicon", w),
                  {w});
    }
    if (!seen.insert(word).second) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("duplicate word '{}'", word), {word});
    }
    normalized.push_back(std::move(word));
  }
  sheet.overview.design_name = std::string(design_name);
  sheet.overview.essence = std::string(essence);
  sheet.overview.circled_words = std::move(normalized);
  sheet.updated_at = now;
  return sheet;
}

CritiqueSheet set_response(CritiqueSheet sheet, int number, int value, std::string_view note, Timestamp now) {
  require_draft(sheet);
  require_number(number);
  if (value < kLikertMin || value > kLikertMax) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("value {} for heuristic #{} outside {}..+{}", value, number, kLikertMin, kLikertMax));
  }
  auto& slot = sheet.responses[static_cast<std::size_t>(number - 1)];
  slot.value = value;
  slot.note = std::string(note);
  sheet.updated_at = now;
  return sheet;
}

CritiqueSheet clear_response(CritiqueSheet sheet, int number, Timestamp now) {
  require_draft(sheet);
  require_number(number);
  sheet.responses[static_cast<std::size_t>(number - 1)].value.reset();
  sheet.updated_at = now;
  return sheet;
}

CritiqueSheet set_note(CritiqueSheet sheet, int number, std::string_view note, Timestamp now) {
  require_draft(sheet);
  require_number(number);
  sheet.responses[static_cast<std::size_t>(number - 1)].note = std::string(note);
  sheet.updated_at = now;
  return sheet;
}

CritiqueSheet set_review(CritiqueSheet sheet, std::string_view reflections, std::string_view next_steps,
                         Timestamp now) {
  require_draft(sheet);
  sheet.review.reflections = std::string(reflections);
  sheet.review.next_steps = std::string(next_steps);
  sheet.updated_at = now;
  return sheet;
}

std::vector<MissingItem> missing_items(const CritiqueSheet& sheet) {
  std::vector<MissingItem> missing;
  if (sheet.overview.design_name.empty()) missing.push_back({MissingItem::Kind::kDesignName, 0, 0});
  const int words = static_cast<int>(sheet.overview.circled_words.size());
  if (words != kCircledWordCount) missing.push_back({MissingItem::Kind::kCircledWords, 0, words});
  for (const auto& r : sheet.responses) {
    if (!r.value) missing.push_back({MissingItem::Kind::kHeuristic, r.number, 0});
  }
  return missing;
}

CritiqueSheet finalize(CritiqueSheet sheet, Timestamp now) {
  require_draft(sheet);
  auto missing = missing_items(sheet);
  if (!missing.empty()) {
    throw IncompleteError(fmt::format("sheet {} is incomplete ({} missing item(s))", sheet.sheet_id, missing.size()),
                          std::move(missing));
  }
  sheet.status = SheetStatus::kFinalized;
  sheet.updated_at = now;
  return sheet;
}

ScoreSummary compute_score(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  require_catalog(sheet, catalog);
  std::vector<MissingItem> unset;
  for (const auto& r : sheet.responses) {
    if (!r.value) unset.push_back({MissingItem::Kind::kHeuristic, r.number, 0});
  }
  if (!unset.empty()) {
    throw IncompleteError(fmt::format("cannot score sheet {}: {} heuristic(s) unset", sheet.sheet_id, unset.size()),
                          std::move(unset));
  }

  ScoreSummary s;
  for (const auto& r : sheet.responses) {
    const auto p = catalog.heuristic(r.number).perspective;
    s.perspective_subtotals[static_cast<std::size_t>(p)] += *r.value;
  }
  s.total = std::accumulate(s.perspective_subtotals.begin(), s.perspective_subtotals.end(), 0);
  s.mean = Rational::of(s.total, kHeuristicCount);
  for (const auto& w : sheet.overview.circled_words) {
    switch (catalog.sentiment_of(w).value_or(Sentiment::kNeutral)) {
      case Sentiment::kPositive:
        ++s.circled_sentiment_counts.positive;
        break;
      case Sentiment::kNegative:
        ++s.circled_sentiment_counts.negative;
        break;
      case Sentiment::kNeutral:
        ++s.circled_sentiment_counts.neutral;
        break;
    }
  }
  return s;
}

CritiqueDiff diff(const CritiqueSheet& earlier, const CritiqueSheet& later, const HeuristicCatalog& catalog) {
  if (!earlier.finalized() || !later.finalized()) {
    throw Error(ErrorCode::kIncomplete, "diff requires two finalized sheets",
                {earlier.finalized() ? later.sheet_id : earlier.sheet_id});
  }
  if (earlier.artefact_key != later.artefact_key) {
    throw Error(ErrorCode::kConflict, fmt::format("cannot diff critiques of different artefacts ('{}' vs '{}')",
                                                  earlier.artefact_key, later.artefact_key));
  }
  if (earlier.catalog_version != later.catalog_version) {
    throw Error(ErrorCode::kConflict, fmt::format("cannot diff critiques made with different catalogs ('{}' vs '{}')",
                                                  earlier.catalog_version, later.catalog_version));
  }
  require_catalog(earlier, catalog);

  CritiqueDiff d;
  d.earlier_id = earlier.sheet_id;
  d.later_id = later.sheet_id;
  for (int n = 1; n <= kHeuristicCount; ++n) {
    const int delta = *later.response(n).value - *earlier.response(n).value;
    d.per_heuristic_delta[static_cast<std::size_t>(n - 1)] = delta;
    d.per_perspective_delta[static_cast<std::size_t>(catalog.heuristic(n).perspective)] += delta;
    d.total_delta += delta;
  }
  std::set<std::string> before(earlier.overview.circled_words.begin(), earlier.overview.circled_words.end());
  std::set<std::string> after(later.overview.circled_words.begin(), later.overview.circled_words.end());
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(d.words_added));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(d.words_removed));
  return d;
}

}  // namespace cds
