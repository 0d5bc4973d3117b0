#include "cds/critique_json.hpp"

#include <fmt/format.h>

#include <set>

#include "cds/sha256.hpp"

namespace cds {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& message) {
  throw Error(ErrorCode::kSchema, "critique schema violation: " + message, {message});
}

void require_fields(const json& obj, const std::string& where, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) schema(where + " must be an object");
  for (const char* name : required) {
    if (!obj.contains(name)) schema(fmt::format("{} is missing '{}'", where, name));
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* name : required) known = known || key == name;
    for (const char* name : optional) known = known || key == name;
    if (!known) schema(fmt::format("{} has unknown field '{}'", where, key));
  }
}

std::string str(const json& obj, const char* name, const std::string& where) {
  const json& v = obj.at(name);
  if (!v.is_string()) schema(fmt::format("{}.{} must be a string", where, name));
  return v.get<std::string>();
}

Timestamp timestamp(const json& obj, const char* name) {
  const std::string text = str(obj, name, "sheet");
  try {
    return parse_rfc3339(text);
  } catch (const Error& e) {
    schema(fmt::format("sheet.{}: {}", name, e.what()));
  }
}

}  // namespace

json sheet_to_json(const CritiqueSheet& sheet) {
  json responses = json::array();
  for (const auto& r : sheet.responses) {
    responses.push_back({{"number", r.number}, {"value", r.value ? json(*r.value) : json(nullptr)}, {"note", r.note}});
  }
  return {
      {"sheet_id", sheet.sheet_id},
      {"artefact_key", sheet.artefact_key},
      {"appraiser", sheet.appraiser},
      {"created_at", format_rfc3339(sheet.created_at)},
      {"updated_at", format_rfc3339(sheet.updated_at)},
      {"catalog_version", sheet.catalog_version},
      {"status", status_key(sheet.status)},
      {"overview",
       {{"design_name", sheet.overview.design_name},
        {"essence", sheet.overview.essence},
        {"circled_words", sheet.overview.circled_words}}},
      {"responses", std::move(responses)},
      {"review", {{"reflections", sheet.review.reflections}, {"next_steps", sheet.review.next_steps}}},
  };
}

namespace {

CritiqueSheet parse_sheet_fields(const json& doc) {
  CritiqueSheet sheet;
  sheet.sheet_id = str(doc, "sheet_id", "sheet");
  if (!is_valid_sheet_id(sheet.sheet_id)) schema(fmt::format("sheet_id '{}' is not a valid identifier", sheet.sheet_id));
  sheet.artefact_key = str(doc, "artefact_key", "sheet");
  if (sheet.artefact_key.empty()) schema("artefact_key must not be empty");
  sheet.appraiser = str(doc, "appraiser", "sheet");
  sheet.created_at = timestamp(doc, "created_at");
  sheet.updated_at = timestamp(doc, "updated_at");
  sheet.catalog_version = str(doc, "catalog_version", "sheet");
  if (sheet.catalog_version.empty()) schema("catalog_version must not be empty");
  const std::string status = str(doc, "status", "sheet");
  auto parsed_status = parse_status_key(status);
  if (!parsed_status) schema(fmt::format("status '{}' must be 'draft' or 'finalized'", status));
  sheet.status = *parsed_status;

  const json& ov = doc.at("overview");
  require_fields(ov, "overview", {"design_name", "essence", "circled_words"});
  sheet.overview.design_name = str(ov, "design_name", "overview");
  sheet.overview.essence = str(ov, "essence", "overview");
  const json& words = ov.at("circled_words");
  if (!words.is_array()) schema("overview.circled_words must be an array");
  std::set<std::string> seen;
  for (const auto& w : words) {
    if (!w.is_string()) schema("overview.circled_words entries must be strings");
    if (!seen.insert(w.get<std::string>()).second) schema(fmt::format("circled word '{}' repeated", w.get<std::string>()));
    sheet.overview.circled_words.push_back(w.get<std::string>());
  }

  const json& responses = doc.at("responses");
  if (!responses.is_array()) schema("responses must be an array");
  if (responses.size() != static_cast<std::size_t>(kHeuristicCount)) {
    schema(fmt::format("responses must have exactly {} slots, found {}", kHeuristicCount, responses.size()));
  }
  std::array<bool, kHeuristicCount> filled{};
  for (const auto& r : responses) {
    require_fields(r, "response", {"number", "value", "note"});
    const json& num = r.at("number");
    if (!num.is_number_integer()) schema("response.number must be an integer");
    const int n = num.get<int>();
    if (n < 1 || n > kHeuristicCount) schema(fmt::format("response number {} out of range 1..30", n));
    if (filled[static_cast<std::size_t>(n - 1)]) schema(fmt::format("response #{} appears twice", n));
    filled[static_cast<std::size_t>(n - 1)] = true;
    auto& slot = sheet.responses[static_cast<std::size_t>(n - 1)];
    slot.number = n;
    const json& v = r.at("value");
    if (!v.is_null()) {
      if (!v.is_number_integer()) schema(fmt::format("response #{} value must be an integer or null", n));
      const auto value = v.get<std::int64_t>();
      if (value < kLikertMin || value > kLikertMax) {
        schema(fmt::format("response #{} value {} outside {}..+{}", n, value, kLikertMin, kLikertMax));
      }
      slot.value = static_cast<int>(value);
    }
    const json& note = r.at("note");
    if (!note.is_string()) schema(fmt::format("response #{} note must be a string", n));
    slot.note = note.get<std::string>();
  }

  const json& rv = doc.at("review");
  require_fields(rv, "review", {"reflections", "next_steps"});
  sheet.review.reflections = str(rv, "reflections", "review");
  sheet.review.next_steps = str(rv, "next_steps", "review");

  if (sheet.finalized()) {
    const auto missing = missing_items(sheet);
    if (!missing.empty()) schema("finalized sheet is incomplete: " + missing.front().describe());
  }
  return sheet;
}

}  // namespace

CritiqueSheet sheet_from_json(const json& doc) {
  require_fields(doc, "sheet",
                 {"sheet_id", "artefact_key", "appraiser", "created_at", "updated_at", "catalog_version", "status",
                  "overview", "responses", "review"});
  return parse_sheet_fields(doc);
}

std::string canonical_body(const CritiqueSheet& sheet) { return sheet_to_json(sheet).dump(); }

CritiqueRecord make_record(CritiqueSheet sheet) {
  CritiqueRecord record;
  record.content_hash = sha256_hex(canonical_body(sheet));
  record.sheet = std::move(sheet);
  return record;
}

json record_to_json(const CritiqueRecord& record) {
  json doc = sheet_to_json(record.sheet);
  doc["schema_version"] = record.schema_version;
  doc["content_hash"] = record.content_hash;
  return doc;
}

CritiqueRecord record_from_json(const json& doc) {
  if (!doc.is_object()) schema("record must be an object");
  json body = doc;
  std::optional<std::string> claimed_hash;
  if (body.contains("schema_version")) {
    const json& v = body.at("schema_version");
    if (!v.is_number_integer()) schema("schema_version must be an integer");
    if (v.get<std::int64_t>() != kSchemaVersion) {
      schema(fmt::format("unsupported schema_version {} (this build reads version {})", v.dump(), kSchemaVersion));
    }
    body.erase("schema_version");
  }
  if (body.contains("content_hash")) {
    if (!body.at("content_hash").is_string()) schema("content_hash must be a string");
    claimed_hash = body.at("content_hash").get<std::string>();
    body.erase("content_hash");
  }
  CritiqueRecord record = make_record(sheet_from_json(body));
  if (claimed_hash && *claimed_hash != record.content_hash) {
    schema(fmt::format("content_hash mismatch for sheet {}: record claims {}, body hashes to {}",
                       record.sheet.sheet_id, *claimed_hash, record.content_hash));
  }
  return record;
}

json score_to_json(const ScoreSummary& score) {
  json subtotals = json::object();
  for (auto p : kAllPerspectives) subtotals[std::string(perspective_key(p))] = score.subtotal(p);
  return {
      {"total", score.total},
      {"mean", score.mean.value()},
      {"mean_fraction", {{"numerator", score.mean.numerator}, {"denominator", score.mean.denominator}}},
      {"perspective_subtotals", std::move(subtotals)},
      {"circled_sentiment_counts",
       {{"positive", score.circled_sentiment_counts.positive},
        {"negative", score.circled_sentiment_counts.negative},
        {"neutral", score.circled_sentiment_counts.neutral}}},
  };
}

json diff_to_json(const CritiqueDiff& diff) {
  json per_heuristic = json::object();
  for (int n = 1; n <= kHeuristicCount; ++n) per_heuristic[std::to_string(n)] = diff.heuristic_delta(n);
  json per_perspective = json::object();
  for (auto p : kAllPerspectives) per_perspective[std::string(perspective_key(p))] = diff.perspective_delta(p);
  return {
      {"earlier_id", diff.earlier_id},
      {"later_id", diff.later_id},
      {"total_delta", diff.total_delta},
      {"per_heuristic_delta", std::move(per_heuristic)},
      {"per_perspective_delta", std::move(per_perspective)},
      {"words_added", diff.words_added},
      {"words_removed", diff.words_removed},
  };
}

json missing_to_json(const std::vector<MissingItem>& missing) {
  json items = json::array();
  for (const auto& m : missing) {
    switch (m.kind) {
      case MissingItem::Kind::kHeuristic:
        items.push_back({{"item", "heuristic"}, {"number", m.number}, {"message", m.describe()}});
        break;
      case MissingItem::Kind::kCircledWords:
        items.push_back({{"item", "circled_words"},
                         {"count", m.word_count},
                         {"required", kCircledWordCount},
                         {"message", m.describe()}});
        break;
      case MissingItem::Kind::kDesignName:
        items.push_back({{"item", "design_name"}, {"message", m.describe()}});
        break;
    }
  }
  return items;
}

}  // namespace cds
