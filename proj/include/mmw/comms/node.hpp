#pragma once

#include <chrono>
#include <condition_variable>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mmw/comms/message.hpp"
#include "mmw/comms/transport.hpp"
#include "mmw/core/json_codec.hpp"

namespace mmw {

enum class ComponentType { Mask, Mediator, Wrapper };

inline const char* to_string(ComponentType t) {
  switch (t) {
    case ComponentType::Mask: return "mask";
    case ComponentType::Mediator: return "mediator";
    case ComponentType::Wrapper: return "wrapper";
  }
  return "?";
}

inline std::optional<ComponentType> parse_component_type(const std::string& s) {
  if (s == "mask") return ComponentType::Mask;
  if (s == "mediator") return ComponentType::Mediator;
  if (s == "wrapper") return ComponentType::Wrapper;
  return std::nullopt;
}

inline constexpr std::chrono::milliseconds kDefaultRequestTimeout{10000};

// One established downstream connection. Requests may be pipelined from
// multiple threads; a reader thread demultiplexes responses by correlation
// id. Schema requests additionally serialize among themselves (one
// outstanding schema request per link).
class DownstreamLink {
public:
  DownstreamLink(std::unique_ptr<ByteStream> stream, std::string peer_id)
      : stream_(std::move(stream)), peer_id_(std::move(peer_id)) {
    reader_ = std::thread([this] { read_loop(); });
  }

  ~DownstreamLink() { shutdown(); }

  DownstreamLink(const DownstreamLink&) = delete;
  DownstreamLink& operator=(const DownstreamLink&) = delete;

  const std::string& peer_id() const { return peer_id_; }

  CanonicalSchema request_schema(std::chrono::milliseconds timeout = kDefaultRequestTimeout) {
    std::lock_guard schema_lock(schema_mu_);
    Message res = request(MsgType::SchemaReq, json::object(), timeout);
    return schema_from_json(res.payload);
  }

  CanonicalResult execute_query(const CanonicalQuery& query,
                                std::chrono::milliseconds timeout = kDefaultRequestTimeout) {
    Message res = request(MsgType::QueryReq, {{"query", query_to_json(query)}}, timeout);
    return result_from_json(res.payload);
  }

  void shutdown() {
    {
      std::lock_guard lock(mu_);
      if (closed_) {
        if (reader_.joinable()) reader_.join();
        return;
      }
      closed_ = true;
    }
    stream_->close();
    if (reader_.joinable()) reader_.join();
    fail_pending("link shut down");
  }

private:
  Message request(MsgType type, json payload, std::chrono::milliseconds timeout) {
    std::string id = new_correlation_id();
    auto promise = std::make_shared<std::promise<Message>>();
    auto future = promise->get_future();
    {
      std::lock_guard lock(mu_);
      if (closed_) throw Error("transport-failure", "link to '" + peer_id_ + "' is closed");
      pending_[id] = promise;
    }
    Message req;
    req.type = type;
    req.correlation_id = id;
    req.payload = std::move(payload);
    try {
      std::lock_guard lock(write_mu_);
      send_frame(*stream_, req);
    } catch (...) {
      std::lock_guard lock(mu_);
      pending_.erase(id);
      throw;
    }
    if (future.wait_for(timeout) != std::future_status::ready) {
      std::lock_guard lock(mu_);
      pending_.erase(id);
      throw Error("timeout", "no response from '" + peer_id_ + "' within " +
                                 std::to_string(timeout.count()) + " ms");
    }
    Message res = future.get();  // rethrows transport failures from the reader
    if (res.type == MsgType::Error) {
      throw PeerError(res.payload.value("code", "unknown"),
                      "'" + peer_id_ + "': " + res.payload.value("detail", ""));
    }
    return res;
  }

  void read_loop() {
    try {
      while (true) {
        std::optional<Message> msg = recv_frame(*stream_);
        if (!msg) break;
        std::shared_ptr<std::promise<Message>> promise;
        {
          std::lock_guard lock(mu_);
          auto it = pending_.find(msg->correlation_id);
          if (it == pending_.end()) continue;  // late or unsolicited; drop
          promise = it->second;
          pending_.erase(it);
        }
        promise->set_value(std::move(*msg));
      }
    } catch (...) {
      // fall through to fail_pending
    }
    fail_pending("connection to '" + peer_id_ + "' lost");
  }

  void fail_pending(const std::string& why) {
    std::map<std::string, std::shared_ptr<std::promise<Message>>> orphans;
    {
      std::lock_guard lock(mu_);
      orphans.swap(pending_);
      closed_ = true;
    }
    for (auto& [id, promise] : orphans) {
      try {
        promise->set_exception(std::make_exception_ptr(Error("transport-failure", why)));
      } catch (const std::future_error&) {
      }
    }
  }

  std::unique_ptr<ByteStream> stream_;
  std::string peer_id_;
  std::thread reader_;
  std::mutex write_mu_;
  std::mutex schema_mu_;
  std::mutex mu_;
  bool closed_ = false;
  std::map<std::string, std::shared_ptr<std::promise<Message>>> pending_;
};

// The standardized communication node used by every component type. The mask
// uses the restricted variant: max_downstream = 1.
class CommNode {
public:
  CommNode(std::string node_id, ComponentType type,
           std::optional<std::size_t> max_downstream = std::nullopt)
      : node_id_(std::move(node_id)), type_(type), max_downstream_(max_downstream) {}

  const std::string& node_id() const { return node_id_; }
  ComponentType type() const { return type_; }

  // HELLO/HELLO_ACK handshake, then registers the link. Link setup
  // serializes against other setups and against the cap check.
  std::shared_ptr<DownstreamLink> connect_downstream(
      const Endpoint& endpoint, std::chrono::milliseconds timeout = kDefaultRequestTimeout) {
    std::lock_guard lock(links_mu_);
    if (max_downstream_ && links_.size() >= *max_downstream_)
      throw Error("downstream-cap-exceeded",
                  "node '" + node_id_ + "' already holds " + std::to_string(links_.size()) +
                      " downstream link(s)");
    std::unique_ptr<ByteStream> stream = endpoint.connect();
    Message hello;
    hello.type = MsgType::Hello;
    hello.correlation_id = new_correlation_id();
    hello.payload = {{"component_type", to_string(type_)}, {"node_id", node_id_}};
    send_frame(*stream, hello);
    std::optional<Message> ack = recv_frame(*stream);
    if (!ack || ack->type != MsgType::HelloAck ||
        ack->correlation_id != hello.correlation_id)
      throw Error("handshake-refused", "peer did not acknowledge HELLO");
    std::string peer_id = ack->payload.value("node_id", "peer");
    auto link = std::make_shared<DownstreamLink>(std::move(stream), peer_id);
    links_.push_back(link);
    return link;
  }

  std::vector<std::shared_ptr<DownstreamLink>> links() const {
    std::lock_guard lock(links_mu_);
    return links_;
  }

  void disconnect_all() {
    std::vector<std::shared_ptr<DownstreamLink>> links;
    {
      std::lock_guard lock(links_mu_);
      links.swap(links_);
    }
    for (auto& l : links) l->shutdown();
  }

private:
  std::string node_id_;
  ComponentType type_;
  std::optional<std::size_t> max_downstream_;
  mutable std::mutex links_mu_;
  std::vector<std::shared_ptr<DownstreamLink>> links_;
};

}  // namespace mmw
