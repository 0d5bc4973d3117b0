#include "cds/report.hpp"

#include <fmt/format.h>

#include "cds/csv.hpp"
#include "cds/error.hpp"

namespace cds::report {

namespace {

void require_renderable(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  if (!sheet.finalized()) {
    throw Error(ErrorCode::kIncomplete, fmt::format("sheet {} is a draft; only finalized critiques are reported",
                                                    sheet.sheet_id));
  }
  if (sheet.catalog_version != catalog.version_tag()) {
    throw Error(ErrorCode::kConflict, fmt::format("sheet {} uses catalog '{}' but catalog '{}' was supplied",
                                                  sheet.sheet_id, sheet.catalog_version, catalog.version_tag()));
  }
}

std::string md_or_blank(std::string_view text, std::string_view blank) {
  return text.empty() ? std::string(blank) : escape_markdown(text);
}

std::string html_or_blank(std::string_view text, std::string_view blank) {
  return text.empty() ? fmt::format("<em>{}</em>", blank) : escape_html(text);
}

std::string mean_text(const ScoreSummary& s) {
  return fmt::format("{:.2f} ({}/{})", s.mean.value(), s.total, kHeuristicCount);
}

std::string value_text(const HeuristicResponse& r) { return r.value ? signed_value(*r.value) : ""; }

std::string words_list(const std::vector<std::string>& words) {
  if (words.empty()) return "none";
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : ", ") + w;
  return out;
}

constexpr std::string_view kNoNote = "(no note)";
constexpr std::string_view kNone = "(none)";

constexpr std::string_view kHtmlStyle = R"(body{font-family:system-ui,sans-serif;max-width:60em;margin:2em auto;padding:0 1em;color:#222}
table{border-collapse:collapse;width:100%;margin:.5em 0 1em}
th,td{border:1px solid #ccc;padding:.3em .5em;text-align:left;vertical-align:top}
td.value{text-align:right;font-variant-numeric:tabular-nums}
.blank{color:#888}
.sentiment{color:#555;font-size:.9em})";

}  // namespace

std::string signed_value(int v) { return v > 0 ? fmt::format("+{}", v) : std::to_string(v); }

std::string escape_markdown(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  if (!text.empty() && std::string_view("#-+*=>").find(text.front()) != std::string_view::npos) out.push_back('\\');
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '|':
        out += "\\|";
        break;
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        out += "<br>";
        break;
      case '\n':
        out += "<br>";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string escape_html(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&#39;";
        break;
      case '\n':
        out += "<br>";
        break;
      case '\r':
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string render_markdown(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  require_renderable(sheet, catalog);
  const ScoreSummary score = compute_score(sheet, catalog);
  std::string out;
  auto line = [&out](std::string_view s = {}) {
    out += s;
    out += '\n';
  };

  line(fmt::format("# CDS critique: {}", escape_markdown(sheet.overview.design_name)));
  line();
  line(fmt::format("- Artefact: {}", escape_markdown(sheet.artefact_key)));
  line(fmt::format("- Appraiser: {}", md_or_blank(sheet.appraiser, kNone)));
  line(fmt::format("- Catalog: {}", escape_markdown(sheet.catalog_version)));
  line();

  line("## Stage 1: Overview");
  line();
  line(fmt::format("**Design name:** {}", escape_markdown(sheet.overview.design_name)));
  line();
  line(fmt::format("**Essence:** {}", md_or_blank(sheet.overview.essence, kNone)));
  line();
  line("**First-impression words:**");
  line();
  for (const auto& w : sheet.overview.circled_words) {
    const auto s = catalog.sentiment_of(w);
    line(fmt::format("- {} ({})", escape_markdown(w), s ? sentiment_key(*s) : "unknown"));
  }
  line();

  line("## Stage 2: Detail");
  for (const auto& p : catalog.perspectives()) {
    line();
    line(fmt::format("### {}", escape_markdown(p.display_name)));
    line();
    line("| # | Heuristic | Poor ↔ Good | Value | Note |");
    line("|---|---|---|---:|---|");
    for (const auto& h : catalog.heuristics()) {
      if (h.perspective != p.id) continue;
      const auto& r = sheet.response(h.number);
      line(fmt::format("| #{} | {} | {} ↔ {} | {} | {} |", h.number, escape_markdown(h.question),
                       escape_markdown(h.negative_anchor), escape_markdown(h.positive_anchor), value_text(r),
                       md_or_blank(r.note, kNoNote)));
    }
    line();
    line(fmt::format("Subtotal: {} / {}", signed_value(score.subtotal(p.id)), kMaxSubtotal));
  }
  line();

  line("## Stage 3: Review");
  line();
  line(fmt::format("Total: {} / {}", score.total, kMaxTotal));
  line();
  line(fmt::format("Mean: {}", mean_text(score)));
  line();
  line("| Perspective | Subtotal |");
  line("|---|---:|");
  for (const auto& p : catalog.perspectives()) {
    line(fmt::format("| {} | {} / {} |", escape_markdown(p.display_name), signed_value(score.subtotal(p.id)),
                     kMaxSubtotal));
  }
  line();
  const auto& c = score.circled_sentiment_counts;
  line(fmt::format("First-impression sentiment: {} positive, {} negative, {} neutral", c.positive, c.negative,
                   c.neutral));
  line();
  line("### Reflections");
  line();
  line(md_or_blank(sheet.review.reflections, kNone));
  line();
  line("### Next steps");
  line();
  line(md_or_blank(sheet.review.next_steps, kNone));
  return out;
}

std::string render_html(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  require_renderable(sheet, catalog);
  const ScoreSummary score = compute_score(sheet, catalog);
  std::string out;
  auto line = [&out](std::string_view s = {}) {
    out += s;
    out += '\n';
  };

  line("<!DOCTYPE html>");
  line("<html lang=\"en\">");
  line("<head>");
  line("<meta charset=\"utf-8\">");
  line(fmt::format("<title>CDS critique: {}</title>", escape_html(sheet.overview.design_name)));
  line(fmt::format("<style>\n{}\n</style>", kHtmlStyle));
  line("</head>");
  line("<body>");
  line(fmt::format("<h1>CDS critique: {}</h1>", escape_html(sheet.overview.design_name)));
  line("<ul class=\"meta\">");
  line(fmt::format("<li>Artefact: {}</li>", escape_html(sheet.artefact_key)));
  line(fmt::format("<li>Appraiser: {}</li>", html_or_blank(sheet.appraiser, kNone)));
  line(fmt::format("<li>Catalog: {}</li>", escape_html(sheet.catalog_version)));
  line("</ul>");

  line("<section id=\"stage-1\">");
  line("<h2>Stage 1: Overview</h2>");
  line(fmt::format("<p><strong>Design name:</strong> {}</p>", escape_html(sheet.overview.design_name)));
  line(fmt::format("<p><strong>Essence:</strong> {}</p>", html_or_blank(sheet.overview.essence, kNone)));
  line("<p><strong>First-impression words:</strong></p>");
  line("<ul class=\"words\">");
  for (const auto& w : sheet.overview.circled_words) {
    const auto s = catalog.sentiment_of(w);
    line(fmt::format("<li>{} <span class=\"sentiment\">({})</span></li>", escape_html(w),
                     s ? sentiment_key(*s) : "unknown"));
  }
  line("</ul>");
  line("</section>");

  line("<section id=\"stage-2\">");
  line("<h2>Stage 2: Detail</h2>");
  for (const auto& p : catalog.perspectives()) {
    line(fmt::format("<h3 id=\"{}\">{}</h3>", perspective_key(p.id), escape_html(p.display_name)));
    line("<table>");
    line("<thead><tr><th>#</th><th>Heuristic</th><th>Poor &harr; Good</th><th>Value</th><th>Note</th></tr></thead>");
    line("<tbody>");
    for (const auto& h : catalog.heuristics()) {
      if (h.perspective != p.id) continue;
      const auto& r = sheet.response(h.number);
      line(fmt::format(
          "<tr class=\"heuristic\" id=\"h{0}\"><td>#{0}</td><td>{1}</td><td>{2} &harr; {3}</td>"
          "<td class=\"value\">{4}</td><td>{5}</td></tr>",
          h.number, escape_html(h.question), escape_html(h.negative_anchor), escape_html(h.positive_anchor),
          value_text(r), r.note.empty() ? fmt::format("<span class=\"blank\">{}</span>", kNoNote) : escape_html(r.note)));
    }
    line("</tbody>");
    line("</table>");
    line(fmt::format("<p>Subtotal: {} / {}</p>", signed_value(score.subtotal(p.id)), kMaxSubtotal));
  }
  line("</section>");

  line("<section id=\"stage-3\">");
  line("<h2>Stage 3: Review</h2>");
  line(fmt::format("<p class=\"total\">Total: {} / {}</p>", score.total, kMaxTotal));
  line(fmt::format("<p>Mean: {}</p>", mean_text(score)));
  line("<table>");
  line("<thead><tr><th>Perspective</th><th>Subtotal</th></tr></thead>");
  line("<tbody>");
  for (const auto& p : catalog.perspectives()) {
    line(fmt::format("<tr class=\"perspective\"><td>{}</td><td class=\"value\">{} / {}</td></tr>",
                     escape_html(p.display_name), signed_value(score.subtotal(p.id)), kMaxSubtotal));
  }
  line("</tbody>");
  line("</table>");
  const auto& c = score.circled_sentiment_counts;
  line(fmt::format("<p>First-impression sentiment: {} positive, {} negative, {} neutral</p>", c.positive, c.negative,
                   c.neutral));
  line("<h3>Reflections</h3>");
  line(fmt::format("<p>{}</p>", html_or_blank(sheet.review.reflections, kNone)));
  line("<h3>Next steps</h3>");
  line(fmt::format("<p>{}</p>", html_or_blank(sheet.review.next_steps, kNone)));
  line("</section>");
  line("</body>");
  line("</html>");
  return out;
}

std::string render_diff_report(const CritiqueDiff& d, const CritiqueSheet& earlier, const CritiqueSheet& later,
                               const HeuristicCatalog& catalog) {
  const CritiqueDiff expected = diff(earlier, later, catalog);
  if (!(expected == d)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("diff {} -> {} does not match the supplied sheets {} -> {}", d.earlier_id, d.later_id,
                            earlier.sheet_id, later.sheet_id));
  }
  const ScoreSummary before = compute_score(earlier, catalog);
  const ScoreSummary after = compute_score(later, catalog);

  std::string out;
  auto line = [&out](std::string_view s = {}) {
    out += s;
    out += '\n';
  };
  line(fmt::format("# CDS critique comparison: {}", escape_markdown(earlier.artefact_key)));
  line();
  line(fmt::format("- Earlier: {} ({}), total {}", escape_markdown(earlier.sheet_id),
                   md_or_blank(earlier.overview.design_name, kNone), before.total));
  line(fmt::format("- Later: {} ({}), total {}", escape_markdown(later.sheet_id),
                   md_or_blank(later.overview.design_name, kNone), after.total));
  line();
  if (d.is_zero()) {
    line("Total change: 0 (no change)");
  } else {
    line(fmt::format("Total change: {} ({} -> {})", signed_value(d.total_delta), before.total, after.total));
  }
  line();
  line("## Perspectives");
  line();
  line("| Perspective | Earlier | Later | Delta |");
  line("|---|---:|---:|---:|");
  for (const auto& p : catalog.perspectives()) {
    line(fmt::format("| {} | {} | {} | {} |", escape_markdown(p.display_name), signed_value(before.subtotal(p.id)),
                     signed_value(after.subtotal(p.id)), signed_value(d.perspective_delta(p.id))));
  }
  line();
  line("## Heuristics");
  line();
  line("| # | Heuristic | Earlier | Later | Delta |");
  line("|---|---|---:|---:|---:|");
  for (const auto& h : catalog.heuristics()) {
    line(fmt::format("| #{} | {} | {} | {} | {} |", h.number, escape_markdown(h.question),
                     value_text(earlier.response(h.number)), value_text(later.response(h.number)),
                     signed_value(d.heuristic_delta(h.number))));
  }
  line();
  line("## First-impression words");
  line();
  line(fmt::format("- Added: {}", words_list(d.words_added)));
  line(fmt::format("- Removed: {}", words_list(d.words_removed)));
  return out;
}

std::string score_csv(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  std::string out = "heuristic,perspective,value\n";
  for (const auto& h : catalog.heuristics()) {
    const auto& r = sheet.response(h.number);
    out += csv::join({std::to_string(h.number), std::string(perspective_key(h.perspective)),
                      r.value ? std::to_string(*r.value) : ""});
    out += '\n';
  }
  return out;
}

std::string diff_csv(const CritiqueDiff& d, const HeuristicCatalog& catalog) {
  std::string out = "heuristic,perspective,delta\n";
  for (const auto& h : catalog.heuristics()) {
    out += csv::join({std::to_string(h.number), std::string(perspective_key(h.perspective)),
                      std::to_string(d.heuristic_delta(h.number))});
    out += '\n';
  }
  return out;
}

}  // namespace cds::report
