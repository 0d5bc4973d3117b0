#pragma once

#include <string>
#include <vector>

#include "cds/critique.hpp"
#include "json.hpp"

namespace cds {

inline constexpr int kSchemaVersion = 1;

/// A sheet as stored: the sheet body plus storage metadata.
struct CritiqueRecord {
  CritiqueSheet sheet;
  int schema_version = kSchemaVersion;
  std::string content_hash;  // sha256 of canonical_body(sheet)

  bool operator==(const CritiqueRecord&) const = default;
};

nlohmann::json sheet_to_json(const CritiqueSheet& sheet);

/// Strict schema check: every field present with the right type, exactly 30
/// responses numbered 1..30, values null or within -2..+2, finalized sheets
/// complete. Unknown fields are rejected. Throws Error(kSchema).
CritiqueSheet sheet_from_json(const nlohmann::json& doc);

/// Compact, key-sorted serialization of the sheet body; the hashing input.
std::string canonical_body(const CritiqueSheet& sheet);

CritiqueRecord make_record(CritiqueSheet sheet);
nlohmann::json record_to_json(const CritiqueRecord& record);

/// Accepts a record document, or a bare sheet document (metadata then
/// computed). A present content_hash must match the body; a schema_version
/// other than 1 is rejected. Throws Error(kSchema).
CritiqueRecord record_from_json(const nlohmann::json& doc);

nlohmann::json score_to_json(const ScoreSummary& score);
nlohmann::json diff_to_json(const CritiqueDiff& diff);
nlohmann::json missing_to_json(const std::vector<MissingItem>& missing);

}  // namespace cds
