#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmw/core/json_codec.hpp"

namespace mmw {

enum class MsgType { SchemaReq, SchemaRes, QueryReq, QueryRes, Error, Hello, HelloAck };

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::SchemaReq: return "SCHEMA_REQ";
    case MsgType::SchemaRes: return "SCHEMA_RES";
    case MsgType::QueryReq: return "QUERY_REQ";
    case MsgType::QueryRes: return "QUERY_RES";
    case MsgType::Error: return "ERROR";
    case MsgType::Hello: return "HELLO";
    case MsgType::HelloAck: return "HELLO_ACK";
  }
  return "?";
}

inline std::optional<MsgType> parse_msg_type(const std::string& s) {
  if (s == "SCHEMA_REQ") return MsgType::SchemaReq;
  if (s == "SCHEMA_RES") return MsgType::SchemaRes;
  if (s == "QUERY_REQ") return MsgType::QueryReq;
  if (s == "QUERY_RES") return MsgType::QueryRes;
  if (s == "ERROR") return MsgType::Error;
  if (s == "HELLO") return MsgType::Hello;
  if (s == "HELLO_ACK") return MsgType::HelloAck;
  return std::nullopt;
}

inline constexpr int kProtocolVersion = 1;
// Frame payload cap: 2^26 bytes.
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 26;

// Wire-protocol envelope. correlation_id is a 128-bit id as 32 hex chars;
// every response or error carries the id of its request.
struct Message {
  int version = kProtocolVersion;
  MsgType type = MsgType::Hello;
  std::string correlation_id;
  json payload = json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

inline std::string new_correlation_id() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  static const char* hex = "0123456789abcdef";
  std::string id(32, '0');
  for (int half = 0; half < 2; ++half) {
    std::uint64_t bits = rng();
    for (int i = 0; i < 16; ++i) {
      id[half * 16 + i] = hex[bits & 0xf];
      bits >>= 4;
    }
  }
  return id;
}

// Encodes as a 4-byte big-endian length followed by the UTF-8 JSON envelope.
inline std::vector<std::uint8_t> encode_message(const Message& msg) {
  json envelope = {{"version", msg.version},
                   {"msg_type", to_string(msg.type)},
                   {"correlation_id", msg.correlation_id},
                   {"payload", msg.payload}};
  std::string body = envelope.dump();
  if (body.size() > kMaxFrameBytes)
    throw Error("payload-too-large",
                std::to_string(body.size()) + " bytes exceeds frame cap");
  std::vector<std::uint8_t> out;
  out.reserve(4 + body.size());
  std::uint32_t n = static_cast<std::uint32_t>(body.size());
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

inline Message decode_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error("truncated-frame", "missing length prefix");
  std::uint32_t n = (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
                    (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
  if (n > kMaxFrameBytes) throw Error("payload-too-large", "declared frame too large");
  if (bytes.size() < 4 + std::size_t{n})
    throw Error("truncated-frame",
                "length prefix says " + std::to_string(n) + " bytes, got " +
                    std::to_string(bytes.size() - 4));
  json envelope;
  try {
    envelope = json::parse(bytes.begin() + 4, bytes.begin() + 4 + n);
  } catch (const json::exception& e) {
    throw Error("malformed-json", e.what());
  }
  try {
    Message msg;
    msg.version = envelope.at("version").get<int>();
    if (msg.version != kProtocolVersion)
      throw Error("version-mismatch", "protocol version " + std::to_string(msg.version));
    auto type = parse_msg_type(envelope.at("msg_type").get<std::string>());
    if (!type)
      throw Error("unknown-msg-type", envelope.at("msg_type").get<std::string>());
    msg.type = *type;
    msg.correlation_id = envelope.at("correlation_id").get<std::string>();
    msg.payload = envelope.at("payload");
    return msg;
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("envelope: ") + e.what());
  }
}

}  // namespace mmw
