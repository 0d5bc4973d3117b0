#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cds {

inline constexpr int kPerspectiveCount = 6;
inline constexpr int kHeuristicsPerPerspective = 5;
inline constexpr int kHeuristicCount = kPerspectiveCount * kHeuristicsPerPerspective;
inline constexpr int kLexiconSize = 20;
inline constexpr int kCircledWordCount = 5;

// Declaration order is the critique order and must not be changed.
enum class PerspectiveId : std::uint8_t {
  kUser,
  kEnvironment,
  kInterface,
  kComponents,
  kDesign,
  kVisualMarks,
};

inline constexpr std::array<PerspectiveId, kPerspectiveCount> kAllPerspectives = {
    PerspectiveId::kUser,       PerspectiveId::kEnvironment, PerspectiveId::kInterface,
    PerspectiveId::kComponents, PerspectiveId::kDesign,      PerspectiveId::kVisualMarks,
};

std::string_view perspective_key(PerspectiveId id);
std::optional<PerspectiveId> parse_perspective_key(std::string_view key);
constexpr int perspective_index(PerspectiveId id) { return static_cast<int>(id); }

/// Perspective that owns heuristic `number` by position (five per perspective).
/// `number` must be in 1..30.
constexpr PerspectiveId perspective_of(int number) {
  return kAllPerspectives[static_cast<std::size_t>((number - 1) / kHeuristicsPerPerspective)];
}

enum class Sentiment : std::uint8_t { kPositive, kNegative, kNeutral };

std::string_view sentiment_key(Sentiment s);
std::optional<Sentiment> parse_sentiment_key(std::string_view key);

struct Perspective {
  PerspectiveId id;
  std::string display_name;
  std::string description;

  bool operator==(const Perspective&) const = default;
};

struct Heuristic {
  int number = 0;
  PerspectiveId perspective = PerspectiveId::kUser;
  std::string question;
  std::string negative_anchor;
  std::string positive_anchor;
  std::string explanatory_note;

  bool operator==(const Heuristic&) const = default;
};

struct LexiconEntry {
  std::string word;
  Sentiment sentiment = Sentiment::kNeutral;

  bool operator==(const LexiconEntry&) const = default;
};

struct CatalogVersion {
  std::string version_tag;
  int likert_min = -2;
  int likert_max = 2;

  bool operator==(const CatalogVersion&) const = default;
};

struct LexiconPartition {
  int positive = 0;
  int negative = 0;
  int neutral = 0;
  bool deviates = false;  // true unless exactly 7 / 7 / 6
};

/// Immutable CDS definition. Construct through load_catalog() to get a
/// validated instance; the raw constructor performs no checks so that
/// deliberately broken catalogs can be built for inspection.
class HeuristicCatalog {
 public:
  HeuristicCatalog(CatalogVersion version, std::vector<Perspective> perspectives,
                   std::vector<Heuristic> heuristics, std::vector<LexiconEntry> lexicon,
                   std::string source_text = {});

  const CatalogVersion& version() const { return version_; }
  const std::string& version_tag() const { return version_.version_tag; }
  const std::vector<Perspective>& perspectives() const { return perspectives_; }
  const std::vector<Heuristic>& heuristics() const { return heuristics_; }
  const std::vector<LexiconEntry>& lexicon() const { return lexicon_; }

  const Perspective& perspective(PerspectiveId id) const;

  /// Throws Error(kOutOfRange) unless 1 <= number <= 30.
  const Heuristic& heuristic(int number) const;

  /// Sentiment of a (lowercase) lexicon word, or nullopt if not in the lexicon.
  std::optional<Sentiment> sentiment_of(std::string_view word) const;

  /// Exact bytes the catalog was parsed from (empty for in-memory catalogs).
  const std::string& source_text() const { return source_text_; }

  /// Lowercase hex SHA-256 of source_text().
  const std::string& checksum() const { return checksum_; }

  /// Structural equality, ignoring the source bytes.
  bool operator==(const HeuristicCatalog& other) const;

 private:
  CatalogVersion version_;
  std::vector<Perspective> perspectives_;
  std::vector<Heuristic> heuristics_;
  std::vector<LexiconEntry> lexicon_;
  std::string source_text_;
  std::string checksum_;
};

/// The catalog compiled into the binary; byte-identical to catalog/cds-v4.json.
std::string_view embedded_catalog_text();

/// Parses and validates a catalog document. Throws Error(kInvalidArgument)
/// for malformed JSON or missing fields and Error(kIntegrity) naming the
/// violated invariant otherwise.
HeuristicCatalog load_catalog(std::string_view json_text);
HeuristicCatalog load_catalog_file(const std::string& path);
const HeuristicCatalog& default_catalog();

/// Throws Error(kIntegrity) on the first violated invariant.
void validate_catalog(const HeuristicCatalog& catalog);

const Heuristic& get_heuristic(const HeuristicCatalog& catalog, int number);

LexiconPartition verify_lexicon_partition(const HeuristicCatalog& catalog);

/// Serializes a catalog back to the catalog file format.
std::string catalog_to_json(const HeuristicCatalog& catalog);

}  // namespace cds
