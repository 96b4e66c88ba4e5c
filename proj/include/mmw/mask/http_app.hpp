#pragma once

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "mmw/core/json_codec.hpp"
#include "mmw/mask/http_kind.hpp"
#include "mmw/mask/mask.hpp"

namespace mmw {

// The mask application for the HTTP/JSON kind: a web server built only
// against the mask application interface (get_masked_schema / run).
// Errors map to {"error","stage","detail"} with 400 for bad masked input,
// 502 for downstream failures, 503 while no schema is loaded.
class HttpMaskApp {
public:
  explicit HttpMaskApp(MaskModule& mask) : mask_(mask) {
    server_.Get("/schema", [this](const httplib::Request&, httplib::Response& res) {
      guard(res, [&] {
        MaskedBlob schema = mask_.get_masked_schema();
        res.set_content(schema.bytes, schema.content_type);
      });
    });
    server_.Get(R"(/.+)", [this](const httplib::Request& req, httplib::Response& res) {
      guard(res, [&] {
        MaskedBlob result = mask_.run(http_masked_query(req.target));
        res.set_content(result.bytes, result.content_type);
      });
    });
  }

  ~HttpMaskApp() { stop(); }

  // Binds and serves on a background thread. Returns the bound port.
  int start(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      if (!server_.bind_to_port(host, port))
        throw Error("component-start-failure",
                    "cannot bind HTTP mask to " + host + ":" + std::to_string(port));
      port_ = port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

private:
  template <typename Fn>
  void guard(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const StageError& e) {
      res.status = e.stage() == "not-ready" ? 503
                   : e.stage() == "translate-query" ? 400
                                                    : 502;
      res.set_content(
          json{{"error", e.code()}, {"stage", e.stage()}, {"detail", e.detail()}}.dump(),
          "application/json");
    } catch (const Error& e) {
      res.status = 502;
      res.set_content(json{{"error", e.code()}, {"stage", "system"}, {"detail", e.detail()}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", "internal"}, {"stage", "system"}, {"detail", e.what()}}.dump(),
                      "application/json");
    }
  }

  MaskModule& mask_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace mmw
