#pragma once

#include <memory>
#include <thread>

#include "cds/service.hpp"
#include "httplib.h"

namespace oracle {

/// Runs a Service on an ephemeral loopback port for the lifetime of the object.
class LiveServer {
 public:
  LiveServer(const cds::HeuristicCatalog& catalog, cds::Repository& repo, cds::service::Options options = {})
      : service_(catalog, repo, std::move(options)) {
    service_.attach(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  int port() const { return port_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10);
    return c;
  }

 private:
  cds::service::Service service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace oracle
