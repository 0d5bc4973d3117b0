#pragma once

#include <string>

#include "cds/catalog.hpp"
#include "cds/store.hpp"

namespace httplib {
class Server;
}

namespace cds::service {

struct Options {
  std::string ui_origin;  // CORS origin allowed to call the API; empty = none
  std::string ui_dir;     // static UI bundle served at "/"; empty = none
};

/// HTTP facade over the catalog, critique, store, analytics and report
/// modules. Holds no state of its own besides references to the catalog
/// and the repository, both of which must outlive it.
///
/// Status codes: 400 malformed body, 404 unknown id, 409 finalized sheet or
/// cross-artefact diff, 422 incomplete sheet or failed analytics
/// precondition. Error bodies are {"error": {code, message, details}}.
class Service {
 public:
  Service(const HeuristicCatalog& catalog, Repository& repository, Options options = {});

  /// Registers every route on `server`.
  void attach(httplib::Server& server) const;

  const HeuristicCatalog& catalog() const { return catalog_; }
  Repository& repository() const { return repository_; }
  const Options& options() const { return options_; }

 private:
  const HeuristicCatalog& catalog_;
  Repository& repository_;
  Options options_;
  std::string catalog_body_;
  std::string catalog_etag_;
};

/// Blocks serving on addr:port until the server is stopped.
/// Throws Error(kIo) if the address cannot be bound.
void serve(const Service& service, const std::string& addr, int port);

}  // namespace cds::service
