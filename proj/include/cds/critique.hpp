#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cds/catalog.hpp"
#include "cds/error.hpp"
#include "cds/timestamp.hpp"

namespace cds {

inline constexpr int kLikertMin = -2;
inline constexpr int kLikertMax = 2;
inline constexpr int kMaxTotal = kLikertMax * kHeuristicCount;
inline constexpr int kMaxSubtotal = kLikertMax * kHeuristicsPerPerspective;

enum class SheetStatus : std::uint8_t { kDraft, kFinalized };

std::string_view status_key(SheetStatus s);
std::optional<SheetStatus> parse_status_key(std::string_view key);

struct OverviewSection {
  std::string design_name;
  std::string essence;
  std::vector<std::string> circled_words;  // lowercase, in the order chosen

  bool operator==(const OverviewSection&) const = default;
};

struct HeuristicResponse {
  int number = 0;
  std::optional<int> value;  // unset is distinct from 0
  std::string note;

  bool operator==(const HeuristicResponse&) const = default;
};

struct ReviewSection {
  std::string reflections;
  std::string next_steps;

  bool operator==(const ReviewSection&) const = default;
};

/// One appraisal of one artefact. Value type: every operation below takes a
/// sheet and returns an updated copy.
struct CritiqueSheet {
  std::string sheet_id;
  std::string artefact_key;
  std::string appraiser;
  Timestamp created_at{};
  Timestamp updated_at{};
  std::string catalog_version;
  SheetStatus status = SheetStatus::kDraft;
  OverviewSection overview;
  std::array<HeuristicResponse, kHeuristicCount> responses{};  // slot i holds heuristic i+1
  ReviewSection review;

  bool finalized() const { return status == SheetStatus::kFinalized; }
  const HeuristicResponse& response(int number) const;
  int answered_count() const;

  bool operator==(const CritiqueSheet&) const = default;
};

/// Exact fraction in lowest terms with a positive denominator.
struct Rational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }

  bool operator==(const Rational&) const = default;
};

struct SentimentCounts {
  int positive = 0;
  int negative = 0;
  int neutral = 0;

  int sum() const { return positive + negative + neutral; }
  bool operator==(const SentimentCounts&) const = default;
};

struct ScoreSummary {
  int total = 0;
  Rational mean;  // total / 30
  std::array<int, kPerspectiveCount> perspective_subtotals{};
  SentimentCounts circled_sentiment_counts;

  int subtotal(PerspectiveId id) const { return perspective_subtotals[static_cast<std::size_t>(id)]; }
  bool operator==(const ScoreSummary&) const = default;
};

struct CritiqueDiff {
  std::string earlier_id;
  std::string later_id;
  int total_delta = 0;
  std::array<int, kHeuristicCount> per_heuristic_delta{};  // index n-1
  std::array<int, kPerspectiveCount> per_perspective_delta{};
  std::vector<std::string> words_added;    // sorted
  std::vector<std::string> words_removed;  // sorted

  int heuristic_delta(int number) const { return per_heuristic_delta[static_cast<std::size_t>(number - 1)]; }
  int perspective_delta(PerspectiveId id) const { return per_perspective_delta[static_cast<std::size_t>(id)]; }
  bool is_zero() const;
  bool operator==(const CritiqueDiff&) const = default;
};

struct MissingItem {
  enum class Kind : std::uint8_t { kHeuristic, kCircledWords, kDesignName };

  Kind kind = Kind::kHeuristic;
  int number = 0;      // kHeuristic: the unset heuristic
  int word_count = 0;  // kCircledWords: how many are circled now

  std::string describe() const;
  bool operator==(const MissingItem&) const = default;
};

/// Raised when a sheet cannot be finalized or scored; carries every gap.
class IncompleteError : public Error {
 public:
  IncompleteError(const std::string& message, std::vector<MissingItem> missing);
  const std::vector<MissingItem>& missing() const { return missing_; }

 private:
  std::vector<MissingItem> missing_;
};

/// Random RFC 4122 version-4 identifier.
std::string generate_sheet_id();

/// True when `id` is usable as a sheet id (and as a file name).
bool is_valid_sheet_id(std::string_view id);

CritiqueSheet new_draft(std::string_view artefact_key, std::string_view appraiser, const HeuristicCatalog& catalog,
                        Timestamp now = now_utc());

/// Words are lowercased; each must be in the lexicon and appear once.
/// The five-word requirement is checked at finalize, not here.
CritiqueSheet set_overview(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::string_view design_name,
                           std::string_view essence, const std::vector<std::string>& words, Timestamp now = now_utc());

CritiqueSheet set_response(CritiqueSheet sheet, int number, int value, std::string_view note,
                           Timestamp now = now_utc());
CritiqueSheet clear_response(CritiqueSheet sheet, int number, Timestamp now = now_utc());
CritiqueSheet set_note(CritiqueSheet sheet, int number, std::string_view note, Timestamp now = now_utc());

CritiqueSheet set_review(CritiqueSheet sheet, std::string_view reflections, std::string_view next_steps,
                         Timestamp now = now_utc());

/// Empty for a sheet that can be finalized. Order: design name, words,
/// then unset heuristics ascending.
std::vector<MissingItem> missing_items(const CritiqueSheet& sheet);

/// Throws IncompleteError listing every gap, or Error(kConflict) if the
/// sheet is already finalized.
CritiqueSheet finalize(CritiqueSheet sheet, Timestamp now = now_utc());

/// Requires all 30 values; throws IncompleteError listing unset numbers.
ScoreSummary compute_score(const CritiqueSheet& sheet, const HeuristicCatalog& catalog);

/// Deltas are later - earlier. Both sheets must be finalized, for the same
/// artefact and catalog version.
CritiqueDiff diff(const CritiqueSheet& earlier, const CritiqueSheet& later, const HeuristicCatalog& catalog);

}  // namespace cds
