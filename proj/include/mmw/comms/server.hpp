#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mmw/comms/message.hpp"
#include "mmw/comms/node.hpp"
#include "mmw/comms/transport.hpp"
#include "mmw/core/json_codec.hpp"

namespace mmw {

// What a served component exposes to the layer above: its current exported
// schema and query execution. Implemented by wrappers and mediators.
class ComponentService {
public:
  virtual ~ComponentService() = default;
  virtual std::string component_id() const = 0;
  virtual ComponentType component_type() const = 0;
  virtual CanonicalSchema exported_schema() = 0;
  virtual CanonicalResult execute(const CanonicalQuery& query) = 0;
};

// Serves a ComponentService over a transport listener: HELLO handshake,
// then SCHEMA_REQ / QUERY_REQ frames, one thread per connection. Service
// errors are answered as ERROR messages carrying the error code.
template <typename Listener>
class ComponentServer {
public:
  ComponentServer(std::shared_ptr<Listener> listener, std::shared_ptr<ComponentService> service)
      : listener_(std::move(listener)), service_(std::move(service)) {
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~ComponentServer() { stop(); }

  ComponentServer(const ComponentServer&) = delete;
  ComponentServer& operator=(const ComponentServer&) = delete;

  void stop() {
    bool expected = false;
    if (!stopped_.compare_exchange_strong(expected, true)) return;
    listener_->close();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mu_);
      workers.swap(workers_);
      for (auto& s : open_streams_) {
        if (auto stream = s.lock()) stream->close();
      }
    }
    for (auto& w : workers)
      if (w.joinable()) w.join();
  }

private:
  void accept_loop() {
    while (true) {
      std::unique_ptr<ByteStream> stream = listener_->accept();
      if (!stream) break;
      std::shared_ptr<ByteStream> shared(std::move(stream));
      std::lock_guard lock(mu_);
      if (stopped_) {
        shared->close();
        break;
      }
      open_streams_.push_back(shared);
      workers_.emplace_back([this, shared] { serve_connection(*shared); });
    }
  }

  void serve_connection(ByteStream& stream) {
    try {
      while (true) {
        std::optional<Message> msg = recv_frame(stream);
        if (!msg) break;
        Message res;
        res.correlation_id = msg->correlation_id;
        try {
          switch (msg->type) {
            case MsgType::Hello:
              res.type = MsgType::HelloAck;
              res.payload = {{"component_type", to_string(service_->component_type())},
                             {"node_id", service_->component_id()}};
              break;
            case MsgType::SchemaReq:
              res.type = MsgType::SchemaRes;
              res.payload = schema_to_json(service_->exported_schema());
              break;
            case MsgType::QueryReq: {
              CanonicalQuery q = query_from_json(msg->payload.at("query"));
              res.type = MsgType::QueryRes;
              res.payload = result_to_json(service_->execute(q));
              break;
            }
            default:
              throw Error("unknown-msg-type",
                          std::string("unexpected ") + to_string(msg->type));
          }
        } catch (const Error& e) {
          res.type = MsgType::Error;
          res.payload = {{"code", e.code()}, {"detail", e.detail()}};
        } catch (const std::exception& e) {
          res.type = MsgType::Error;
          res.payload = {{"code", "internal"}, {"detail", e.what()}};
        }
        send_frame(stream, res);
      }
    } catch (...) {
      // connection dropped; nothing to answer to
    }
  }

  std::shared_ptr<Listener> listener_;
  std::shared_ptr<ComponentService> service_;
  std::thread accept_thread_;
  std::atomic<bool> stopped_{false};
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<std::weak_ptr<ByteStream>> open_streams_;
};

using InProcServer = ComponentServer<InProcListener>;
using TcpServer = ComponentServer<TcpListener>;

}  // namespace mmw
