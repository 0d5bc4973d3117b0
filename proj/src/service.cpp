#include "cds/service.hpp"

#include <fmt/format.h>

#include "cds/analytics.hpp"
#include "cds/critique_json.hpp"
#include "cds/report.hpp"
#include "cds/sha256.hpp"
#include "httplib.h"

namespace cds::service {

using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kSchema:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kIncomplete:
    case ErrorCode::kUndefined:
      return 422;
    case ErrorCode::kIntegrity:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                json details = json::array()) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}, {"details", std::move(details)}}}});
}

void send_error(httplib::Response& res, const Error& e, std::optional<int> status = std::nullopt) {
  json details = json::array();
  if (const auto* incomplete = dynamic_cast<const IncompleteError*>(&e)) {
    details = missing_to_json(incomplete->missing());
  } else {
    for (const auto& d : e.details()) details.push_back(d);
  }
  send_error(res, status.value_or(http_status(e.code())), error_code_name(e.code()), e.what(), std::move(details));
}

/// Runs `body`; library errors become error responses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, e);
  } catch (const json::exception& e) {
    send_error(res, 400, "malformed_body", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

/// Request body has the wrong shape; always 400, even on analytics routes.
struct MalformedBody : Error {
  explicit MalformedBody(std::string message) : Error(ErrorCode::kInvalidArgument, std::move(message)) {}
};

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw MalformedBody(fmt::format("request body is not valid JSON: {}", e.what()));
  }
}

const json& member(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw MalformedBody(fmt::format("request body is missing '{}'", name));
  }
  return obj.at(name);
}

std::string string_member(const json& obj, const char* name) {
  const json& v = member(obj, name);
  if (!v.is_string()) throw MalformedBody(fmt::format("'{}' must be a string", name));
  return v.get<std::string>();
}

std::vector<double> number_list(const json& obj, const char* name) {
  const json& v = member(obj, name);
  if (!v.is_array()) throw MalformedBody(fmt::format("'{}' must be an array of numbers", name));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw MalformedBody(fmt::format("'{}' must contain only numbers", name));
    out.push_back(x.get<double>());
  }
  return out;
}

void require_lexicon_words(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  for (const auto& w : sheet.overview.circled_words) {
    if (!catalog.sentiment_of(w)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown word '{}': not in the first-impression lexicon", w),
                  {w});
    }
  }
}

void require_catalog_version(const CritiqueSheet& sheet, const HeuristicCatalog& catalog) {
  if (sheet.catalog_version != catalog.version_tag()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("catalog_version '{}' is not served here (expected '{}')",
                                                         sheet.catalog_version, catalog.version_tag()));
  }
}

/// Applies the editable parts of `incoming` to `stored` through the critique
/// operations, so every field passes the same validation as the CLI path.
CritiqueSheet apply_update(CritiqueSheet stored, const CritiqueSheet& incoming, const HeuristicCatalog& catalog) {
  const Timestamp now = now_utc();
  stored = set_overview(std::move(stored), catalog, incoming.overview.design_name, incoming.overview.essence,
                        incoming.overview.circled_words, now);
  for (const auto& r : incoming.responses) {
    stored = r.value ? set_response(std::move(stored), r.number, *r.value, r.note, now)
                     : set_note(clear_response(std::move(stored), r.number, now), r.number, r.note, now);
  }
  stored = set_review(std::move(stored), incoming.review.reflections, incoming.review.next_steps, now);
  stored.appraiser = incoming.appraiser;
  return stored;
}

json reliability_to_json(const analytics::ReliabilityResult& r) {
  return {{"alpha", r.alpha},
          {"k", r.k},
          {"n", r.n},
          {"item_variances", r.item_variances},
          {"total_variance", r.total_variance}};
}

json ttest_to_json(const analytics::TTestResult& r) {
  return {{"t", r.t},
          {"df", r.df},
          {"p_two_tailed", r.p_two_tailed},
          {"mean1", r.mean1},
          {"mean2", r.mean2},
          {"sd1", r.sd1},
          {"sd2", r.sd2},
          {"n1", r.n1},
          {"n2", r.n2},
          {"variant", r.variant == analytics::TTestVariant::kWelch ? "welch" : "student"}};
}

json frequencies_to_json(const analytics::WordFrequencyTable& table) {
  json rows = json::array();
  for (const auto& [key, cell] : table.cells()) {
    json counts = json::object();
    for (std::size_t i = 0; i < table.words().size(); ++i) counts[table.words()[i]] = cell.counts[i];
    rows.push_back({{"group", key.first}, {"stimulus", key.second}, {"sheets", cell.sheets}, {"counts", counts}});
  }
  return {{"words", table.words()}, {"cells", rows}};
}

analytics::ResponseMatrix matrix_from_body(const json& body) {
  if (body.is_object() && body.contains("csv")) {
    if (!body.at("csv").is_string()) throw MalformedBody("'csv' must be a string");
    return analytics::import_matrix(body.at("csv").get<std::string>());
  }
  const json& rows = member(body, "rows");
  if (!rows.is_array()) throw MalformedBody("'rows' must be an array of arrays");
  std::vector<analytics::ResponseMatrix::Row> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& row = rows[r];
    if (!row.is_array()) throw MalformedBody(fmt::format("row {} is not an array", r + 1));
    if (row.size() != static_cast<std::size_t>(kHeuristicCount)) {
      throw Error(ErrorCode::kUndefined,
                  fmt::format("row {} has {} values, expected {}", r + 1, row.size(), kHeuristicCount));
    }
    analytics::ResponseMatrix::Row values{};
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c].is_number_integer()) {
        throw MalformedBody(fmt::format("row {} column q{} is not an integer", r + 1, c + 1));
      }
      values[c] = row[c].get<int>();
    }
    out.push_back(values);
  }
  return analytics::ResponseMatrix(std::move(out), {});
}

/// Analytics failures past body parsing are precondition failures (422).
template <typename F>
void analytics_guarded(const httplib::Request& req, httplib::Response& res, F&& body) {
  json doc;
  try {
    doc = parse_body(req);
  } catch (const Error& e) {
    send_error(res, e);
    return;
  }
  try {
    body(doc);
  } catch (const MalformedBody& e) {
    send_error(res, e);
  } catch (const Error& e) {
    send_error(res, e, 422);
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

Service::Service(const HeuristicCatalog& catalog, Repository& repository, Options options)
    : catalog_(catalog),
      repository_(repository),
      options_(std::move(options)),
      catalog_body_(catalog.source_text().empty() ? catalog_to_json(catalog) + "\n" : catalog.source_text()),
      catalog_etag_(fmt::format("\"{}\"", sha256_hex(catalog_body_))) {}

void Service::attach(httplib::Server& server) const {
  const Service& self = *this;

  if (!options_.ui_origin.empty()) {
    const std::string origin = options_.ui_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      res.set_header("Access-Control-Expose-Headers", "ETag, Location");
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, HEAD, POST, PUT, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
      res.set_header("Access-Control-Max-Age", "600");
    });
  }
  if (!options_.ui_dir.empty()) server.set_mount_point("/", options_.ui_dir);

  server.Get("/api/catalog", [&self](const httplib::Request& req, httplib::Response& res) {
    res.set_header("ETag", self.catalog_etag_);
    res.set_header("Cache-Control", "no-cache");
    if (req.has_header("If-None-Match") && req.get_header_value("If-None-Match") == self.catalog_etag_) {
      res.status = 304;
      return;
    }
    res.status = 200;
    res.set_content(self.catalog_body_, "application/json");
  });

  server.Post("/api/critiques", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      CritiqueRecord record;
      if (body.is_object() && body.contains("sheet_id")) {
        record = record_from_json(body);
        require_catalog_version(record.sheet, self.catalog_);
        require_lexicon_words(record.sheet, self.catalog_);
        if (self.repository_.contains(record.sheet.sheet_id)) {
          throw Error(ErrorCode::kConflict, fmt::format("critique {} already exists", record.sheet.sheet_id));
        }
      } else {
        const std::string appraiser = body.is_object() && body.contains("appraiser") ? string_member(body, "appraiser") : "";
        record = make_record(new_draft(string_member(body, "artefact_key"), appraiser, self.catalog_));
      }
      self.repository_.save(record);
      res.set_header("Location", "/api/critiques/" + record.sheet.sheet_id);
      send_json(res, 201, record_to_json(self.repository_.load(record.sheet.sheet_id)));
    });
  });

  server.Get("/api/critiques", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json list = json::array();
      if (req.has_param("artefact_key")) {
        const std::string key = req.get_param_value("artefact_key");
        for (const auto& h : self.repository_.history(key, self.catalog_)) list.push_back(header_to_json(h));
        send_json(res, 200, {{"artefact_key", key}, {"critiques", list}});
        return;
      }
      for (const auto& r : self.repository_.all()) {
        const auto& s = r.sheet;
        RecordHeader h{s.sheet_id, s.artefact_key, s.appraiser, s.created_at, s.updated_at, s.status, s.catalog_version, {}};
        if (s.finalized() && s.catalog_version == self.catalog_.version_tag()) h.score = compute_score(s, self.catalog_);
        list.push_back(header_to_json(h));
      }
      send_json(res, 200, {{"critiques", list}});
    });
  });

  server.Get("/api/critiques/:id", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, record_to_json(self.repository_.load(req.path_params.at("id")))); });
  });

  server.Put("/api/critiques/:id", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.path_params.at("id");
      const CritiqueRecord stored = self.repository_.load(id);
      if (stored.sheet.finalized()) {
        throw Error(ErrorCode::kConflict, fmt::format("sheet {} is finalized and cannot be modified", id));
      }
      const CritiqueRecord incoming = record_from_json(parse_body(req));
      const auto& in = incoming.sheet;
      if (in.sheet_id != id) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("body sheet_id '{}' does not match '{}'", in.sheet_id, id));
      }
      if (in.artefact_key != stored.sheet.artefact_key || in.catalog_version != stored.sheet.catalog_version) {
        throw Error(ErrorCode::kInvalidArgument, "artefact_key and catalog_version cannot be changed");
      }
      if (in.finalized()) {
        throw Error(ErrorCode::kInvalidArgument, "PUT stores drafts only; use POST /api/critiques/{id}/finalize");
      }
      if (in.updated_at != stored.sheet.updated_at) {
        res.set_header("Warning", "299 cds \"sheet changed since it was read; last write wins\"");
      }
      self.repository_.save(apply_update(stored.sheet, in, self.catalog_));
      send_json(res, 200, record_to_json(self.repository_.load(id)));
    });
  });

  server.Post("/api/critiques/:id/finalize", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.path_params.at("id");
      const CritiqueSheet finalized = finalize(self.repository_.load(id).sheet);
      self.repository_.save(finalized);
      send_json(res, 200, record_to_json(self.repository_.load(id)));
    });
  });

  server.Get("/api/critiques/:id/score", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto record = self.repository_.load(req.path_params.at("id"));
      json body = score_to_json(compute_score(record.sheet, self.catalog_));
      body["sheet_id"] = record.sheet.sheet_id;
      send_json(res, 200, body);
    });
  });

  server.Get("/api/critiques/:id/report", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "md";
      if (format != "md" && format != "html" && format != "csv") {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown report format '{}' (md, html or csv)", format));
      }
      const auto record = self.repository_.load(req.path_params.at("id"));
      res.status = 200;
      if (format == "html") {
        res.set_content(report::render_html(record.sheet, self.catalog_), "text/html; charset=utf-8");
      } else if (format == "csv") {
        res.set_content(report::score_csv(record.sheet, self.catalog_), "text/csv; charset=utf-8");
      } else {
        res.set_content(report::render_markdown(record.sheet, self.catalog_), "text/markdown; charset=utf-8");
      }
    });
  });

  server.Get("/api/diff", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("from") || !req.has_param("to")) {
        throw Error(ErrorCode::kInvalidArgument, "query parameters 'from' and 'to' are required");
      }
      const auto earlier = self.repository_.load(req.get_param_value("from"));
      const auto later = self.repository_.load(req.get_param_value("to"));
      const CritiqueDiff d = diff(earlier.sheet, later.sheet, self.catalog_);
      if (req.has_param("format") && req.get_param_value("format") == "md") {
        res.status = 200;
        res.set_content(report::render_diff_report(d, earlier.sheet, later.sheet, self.catalog_),
                        "text/markdown; charset=utf-8");
        return;
      }
      send_json(res, 200, diff_to_json(d));
    });
  });

  server.Post("/api/analytics/alpha", [](const httplib::Request& req, httplib::Response& res) {
    analytics_guarded(req, res, [&](const json& body) {
      send_json(res, 200, reliability_to_json(analytics::cronbach_alpha(matrix_from_body(body))));
    });
  });

  server.Post("/api/analytics/ttest", [](const httplib::Request& req, httplib::Response& res) {
    analytics_guarded(req, res, [&](const json& body) {
      auto variant = analytics::TTestVariant::kStudent;
      if (body.contains("variant")) {
        const std::string v = string_member(body, "variant");
        if (v == "welch") {
          variant = analytics::TTestVariant::kWelch;
        } else if (v != "student") {
          throw MalformedBody(fmt::format("'variant' must be 'student' or 'welch', got '{}'", v));
        }
      }
      const auto g1 = number_list(body, "group1");
      const auto g2 = number_list(body, "group2");
      send_json(res, 200, ttest_to_json(analytics::t_test_independent(g1, g2, variant)));
    });
  });

  server.Get("/api/analytics/word-frequencies", [&self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string tag = req.has_param("group_by") ? req.get_param_value("group_by") : "appraiser";
      const auto grouping = analytics::grouping_by(tag);
      std::vector<CritiqueSheet> sheets;
      const bool filtered = req.has_param("artefact_key");
      const std::string key = filtered ? req.get_param_value("artefact_key") : "";
      for (auto& r : self.repository_.all()) {
        if (!filtered || r.sheet.artefact_key == key) sheets.push_back(std::move(r.sheet));
      }
      const auto table = analytics::word_frequencies(sheets, grouping, self.catalog_);
      if (req.has_param("format") && req.get_param_value("format") == "csv") {
        res.status = 200;
        res.set_content(table.to_csv(), "text/csv; charset=utf-8");
        return;
      }
      json body = frequencies_to_json(table);
      body["group_by"] = tag;
      send_json(res, 200, body);
    });
  });

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 res.status == 404 ? "no such endpoint" : httplib::status_message(res.status));
    }
  });
}

void serve(const Service& service, const std::string& addr, int port) {
  httplib::Server server;
  service.attach(server);
  if (!server.bind_to_port(addr, port)) {
    throw Error(ErrorCode::kIo, fmt::format("cannot listen on {}:{}", addr, port));
  }
  server.listen_after_bind();
}

}  // namespace cds::service
