#pragma once

#include <functional>
#include <iosfwd>
#include <string_view>

#include "cds/catalog.hpp"
#include "cds/critique.hpp"

namespace cds::cli {

enum class WizardOutcome { kQuit, kCompleted, kFinalized };

struct WizardResult {
  CritiqueSheet sheet;
  WizardOutcome outcome = WizardOutcome::kQuit;
};

/// Called after every accepted answer so an interrupted session loses nothing.
using SaveFn = std::function<void(const CritiqueSheet&)>;

/// Stage a resumed session should open at: 1 while the overview is
/// incomplete, 2 while any heuristic is unset, else 3.
int resume_stage(const CritiqueSheet& sheet);

/// Interactive three-stage fill. Starts at `start_stage` (0 picks
/// resume_stage) and continues through stage 3. Stage 2 opens at the first
/// unset heuristic. `:q` (or `q` at a value prompt) and end of input save
/// and stop. Throws Error(kConflict) for a finalized sheet.
WizardResult run_wizard(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::istream& in, std::ostream& out,
                        const SaveFn& save, int start_stage = 0);

/// Applies an `item,value,note` answers file: items are name, essence,
/// words, reflections, next_steps and 1..30. Nothing is applied if any row
/// is invalid; errors name the line.
CritiqueSheet apply_answers(CritiqueSheet sheet, const HeuristicCatalog& catalog, std::string_view csv_text);

/// Splits a word list on commas, semicolons and whitespace. Numeric tokens
/// 1..20 pick lexicon words by position.
std::vector<std::string> parse_word_list(std::string_view text, const HeuristicCatalog& catalog);

}  // namespace cds::cli
