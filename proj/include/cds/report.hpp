#pragma once

#include <string>
#include <string_view>

#include "cds/catalog.hpp"
#include "cds/critique.hpp"

namespace cds::report {

// Renderers re-derive every score from the sheet; nothing is cached.
// Perspectives always appear in critique order (User .. Visual Marks).

/// Three-stage CommonMark report. Each heuristic is one table row starting
/// with `| #<n> |`. Throws Error(kIncomplete) for drafts and
/// Error(kConflict) when the catalog version differs from the sheet's.
std::string render_markdown(const CritiqueSheet& sheet, const HeuristicCatalog& catalog);

/// Self-contained HTML page with the same content; each heuristic is one
/// `<tr class="heuristic" ...>` line.
std::string render_html(const CritiqueSheet& sheet, const HeuristicCatalog& catalog);

/// Markdown comparison of two finalized critiques. `d` must equal
/// diff(earlier, later, catalog); otherwise Error(kInvalidArgument).
std::string render_diff_report(const CritiqueDiff& d, const CritiqueSheet& earlier, const CritiqueSheet& later,
                               const HeuristicCatalog& catalog);

/// `heuristic,perspective,value`, one row per heuristic; unset values are
/// left empty.
std::string score_csv(const CritiqueSheet& sheet, const HeuristicCatalog& catalog);

/// `heuristic,perspective,delta`.
std::string diff_csv(const CritiqueDiff& d, const HeuristicCatalog& catalog);

/// "+3", "0", "-2".
std::string signed_value(int v);

/// Escaping applied to user text inside Markdown table cells and paragraphs:
/// backslash and pipe are backslash-escaped, line breaks become `<br>`.
std::string escape_markdown(std::string_view text);

std::string escape_html(std::string_view text);

}  // namespace cds::report
