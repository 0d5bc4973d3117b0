#include "cds/catalog.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "cds/error.hpp"
#include "cds/sha256.hpp"
#include "json.hpp"

namespace cds {

namespace detail {
extern const std::string_view kEmbeddedCatalog;
}

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kPerspectiveCount> kPerspectiveKeys = {
    "user", "environment", "interface", "components", "design", "visual_marks",
};

[[noreturn]] void integrity(const std::string& message, std::vector<std::string> details = {}) {
  throw Error(ErrorCode::kIntegrity, "catalog integrity violation: " + message, std::move(details));
}

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, "malformed catalog: " + message);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) malformed(where + " is not an object");
  auto it = obj.find(name);
  if (it == obj.end()) malformed(fmt::format("{} is missing field '{}'", where, name));
  return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) malformed(fmt::format("{}.{} must be a string", where, name));
  return v.get<std::string>();
}

int int_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number_integer()) malformed(fmt::format("{}.{} must be an integer", where, name));
  return v.get<int>();
}

const json& array_field(const json& obj, const char* name) {
  const json& v = field(obj, name, "catalog");
  if (!v.is_array()) malformed(fmt::format("catalog.{} must be an array", name));
  return v;
}

}  // namespace

std::string_view perspective_key(PerspectiveId id) { return kPerspectiveKeys[static_cast<std::size_t>(id)]; }

std::optional<PerspectiveId> parse_perspective_key(std::string_view key) {
  for (std::size_t i = 0; i < kPerspectiveKeys.size(); ++i) {
    if (kPerspectiveKeys[i] == key) return kAllPerspectives[i];
  }
  return std::nullopt;
}

std::string_view sentiment_key(Sentiment s) {
  switch (s) {
    case Sentiment::kPositive:
      return "positive";
    case Sentiment::kNegative:
      return "negative";
    case Sentiment::kNeutral:
      return "neutral";
  }
  return "neutral";
}

std::optional<Sentiment> parse_sentiment_key(std::string_view key) {
  if (key == "positive") return Sentiment::kPositive;
  if (key == "negative") return Sentiment::kNegative;
  if (key == "neutral") return Sentiment::kNeutral;
  return std::nullopt;
}

HeuristicCatalog::HeuristicCatalog(CatalogVersion version, std::vector<Perspective> perspectives,
                                   std::vector<Heuristic> heuristics, std::vector<LexiconEntry> lexicon,
                                   std::string source_text)
    : version_(std::move(version)),
      perspectives_(std::move(perspectives)),
      heuristics_(std::move(heuristics)),
      lexicon_(std::move(lexicon)),
      source_text_(std::move(source_text)),
      checksum_(sha256_hex(source_text_)) {}

const Perspective& HeuristicCatalog::perspective(PerspectiveId id) const {
  for (const auto& p : perspectives_) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::kNotFound, fmt::format("perspective '{}' not in catalog", perspective_key(id)));
}

const Heuristic& HeuristicCatalog::heuristic(int number) const {
  if (number < 1 || number > kHeuristicCount) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("heuristic number {} out of range 1..{}", number, kHeuristicCount));
  }
  for (const auto& h : heuristics_) {
    if (h.number == number) return h;
  }
  throw Error(ErrorCode::kNotFound, fmt::format("heuristic #{} not in catalog", number));
}

std::optional<Sentiment> HeuristicCatalog::sentiment_of(std::string_view word) const {
  for (const auto& e : lexicon_) {
    if (e.word == word) return e.sentiment;
  }
  return std::nullopt;
}

bool HeuristicCatalog::operator==(const HeuristicCatalog& other) const {
  return version_ == other.version_ && perspectives_ == other.perspectives_ && heuristics_ == other.heuristics_ &&
         lexicon_ == other.lexicon_;
}

std::string_view embedded_catalog_text() { return detail::kEmbeddedCatalog; }

void validate_catalog(const HeuristicCatalog& catalog) {
  const auto& v = catalog.version();
  if (v.version_tag.empty()) integrity("version_tag is empty");
  if (v.likert_min != -2 || v.likert_max != 2) {
    integrity(fmt::format("likert bounds must be -2..+2, got {}..{}", v.likert_min, v.likert_max));
  }

  const auto& ps = catalog.perspectives();
  if (ps.size() != static_cast<std::size_t>(kPerspectiveCount)) {
    integrity(fmt::format("expected {} perspectives, found {}", kPerspectiveCount, ps.size()));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].id != kAllPerspectives[i]) {
      integrity(fmt::format("perspective {} must be '{}', found '{}'", i + 1, perspective_key(kAllPerspectives[i]),
                            perspective_key(ps[i].id)));
    }
    if (ps[i].display_name.empty()) integrity(fmt::format("perspective '{}' has no display name", perspective_key(ps[i].id)));
  }

  const auto& hs = catalog.heuristics();
  std::array<int, kHeuristicCount + 1> seen{};
  for (const auto& h : hs) {
    if (h.number < 1 || h.number > kHeuristicCount) {
      integrity(fmt::format("heuristic number {} out of range 1..{}", h.number, kHeuristicCount));
    }
    if (++seen[static_cast<std::size_t>(h.number)] > 1) {
      integrity(fmt::format("heuristic #{} appears more than once", h.number), {std::to_string(h.number)});
    }
    if (h.perspective != perspective_of(h.number)) {
      integrity(fmt::format("heuristic #{} is assigned to '{}' but its position places it in '{}'", h.number,
                            perspective_key(h.perspective), perspective_key(perspective_of(h.number))));
    }
    if (h.question.empty()) integrity(fmt::format("heuristic #{} has an empty question", h.number));
    if (h.negative_anchor.empty() || h.positive_anchor.empty()) {
      integrity(fmt::format("heuristic #{} has an empty anchor", h.number));
    }
    if (h.negative_anchor == h.positive_anchor) {
      integrity(fmt::format("heuristic #{} anchors are identical", h.number));
    }
  }
  std::vector<std::string> missing;
  for (int n = 1; n <= kHeuristicCount; ++n) {
    if (seen[static_cast<std::size_t>(n)] == 0) missing.push_back(std::to_string(n));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "#" : ", #") + m;
    integrity(fmt::format("missing heuristic {}", list), missing);
  }

  const auto& lex = catalog.lexicon();
  if (lex.size() != static_cast<std::size_t>(kLexiconSize)) {
    integrity(fmt::format("lexicon must hold {} words, found {}", kLexiconSize, lex.size()));
  }
  std::set<std::string> words;
  for (const auto& e : lex) {
    if (e.word.empty()) integrity("lexicon contains an empty word");
    if (e.word != to_lower(e.word)) integrity(fmt::format("lexicon word '{}' is not lowercase", e.word));
    if (!words.insert(e.word).second) integrity(fmt::format("lexicon word '{}' is duplicated", e.word), {e.word});
  }
}

HeuristicCatalog load_catalog(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  if (!doc.is_object()) malformed("top level must be an object");

  CatalogVersion version;
  version.version_tag = string_field(doc, "version_tag", "catalog");
  const json& likert = field(doc, "likert", "catalog");
  version.likert_min = int_field(likert, "min", "likert");
  version.likert_max = int_field(likert, "max", "likert");

  std::vector<Perspective> perspectives;
  for (const auto& p : array_field(doc, "perspectives")) {
    const std::string key = string_field(p, "id", "perspective");
    auto id = parse_perspective_key(key);
    if (!id) malformed(fmt::format("unknown perspective id '{}'", key));
    perspectives.push_back({*id, string_field(p, "display_name", "perspective"),
                            p.contains("description") ? string_field(p, "description", "perspective") : ""});
  }

  std::vector<Heuristic> heuristics;
  for (const auto& h : array_field(doc, "heuristics")) {
    Heuristic out;
    out.number = int_field(h, "number", "heuristic");
    const std::string where = fmt::format("heuristic #{}", out.number);
    const std::string key = string_field(h, "perspective", where);
    auto id = parse_perspective_key(key);
    if (!id) malformed(fmt::format("{} names unknown perspective '{}'", where, key));
    out.perspective = *id;
    out.question = string_field(h, "question", where);
    out.negative_anchor = string_field(h, "negative_anchor", where);
    out.positive_anchor = string_field(h, "positive_anchor", where);
    if (h.contains("explanatory_note")) out.explanatory_note = string_field(h, "explanatory_note", where);
    heuristics.push_back(std::move(out));
  }
  std::stable_sort(heuristics.begin(), heuristics.end(),
                   [](const Heuristic& a, const Heuristic& b) { return a.number < b.number; });

  std::vector<LexiconEntry> lexicon;
  for (const auto& e : array_field(doc, "lexicon")) {
    const std::string word = to_lower(string_field(e, "word", "lexicon entry"));
    const std::string key = string_field(e, "sentiment", "lexicon entry '" + word + "'");
    auto s = parse_sentiment_key(key);
    if (!s) malformed(fmt::format("lexicon word '{}' has unknown sentiment '{}'", word, key));
    lexicon.push_back({word, *s});
  }

  HeuristicCatalog catalog(std::move(version), std::move(perspectives), std::move(heuristics), std::move(lexicon),
                           std::string(json_text));
  validate_catalog(catalog);
  return catalog;
}

HeuristicCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open catalog file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_catalog(ss.str());
}

const HeuristicCatalog& default_catalog() {
  static const HeuristicCatalog catalog = load_catalog(embedded_catalog_text());
  return catalog;
}

const Heuristic& get_heuristic(const HeuristicCatalog& catalog, int number) { return catalog.heuristic(number); }

LexiconPartition verify_lexicon_partition(const HeuristicCatalog& catalog) {
  LexiconPartition r;
  for (const auto& e : catalog.lexicon()) {
    switch (e.sentiment) {
      case Sentiment::kPositive:
        ++r.positive;
        break;
      case Sentiment::kNegative:
        ++r.negative;
        break;
      case Sentiment::kNeutral:
        ++r.neutral;
        break;
    }
  }
  r.deviates = !(r.positive == 7 && r.negative == 7 && r.neutral == 6);
  return r;
}

std::string catalog_to_json(const HeuristicCatalog& catalog) {
  json doc = json::object();
  doc["version_tag"] = catalog.version_tag();
  doc["likert"] = {{"min", catalog.version().likert_min}, {"max", catalog.version().likert_max}};
  doc["perspectives"] = json::array();
  for (const auto& p : catalog.perspectives()) {
    doc["perspectives"].push_back(
        {{"id", perspective_key(p.id)}, {"display_name", p.display_name}, {"description", p.description}});
  }
  doc["heuristics"] = json::array();
  for (const auto& h : catalog.heuristics()) {
    doc["heuristics"].push_back({{"number", h.number},
                                 {"perspective", perspective_key(h.perspective)},
                                 {"question", h.question},
                                 {"negative_anchor", h.negative_anchor},
                                 {"positive_anchor", h.positive_anchor},
                                 {"explanatory_note", h.explanatory_note}});
  }
  doc["lexicon"] = json::array();
  for (const auto& e : catalog.lexicon()) {
    doc["lexicon"].push_back({{"word", e.word}, {"sentiment", sentiment_key(e.sentiment)}});
  }
  return doc.dump(2);
}

}  // namespace cds
