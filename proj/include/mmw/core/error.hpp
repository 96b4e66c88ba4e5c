#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mmw {

// Failure with a stable machine-readable code plus a human detail string.
// Codes are kebab-case tokens ("type-mismatch", "downstream-cap-exceeded").
class Error : public std::runtime_error {
public:
  Error(std::string code, std::string detail)
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string code_;
  std::string detail_;
};

// Error reported by a remote peer over the wire protocol. Keeps the peer's
// own code separate from the local "peer-error" classification.
class PeerError : public Error {
public:
  PeerError(std::string peer_code, std::string detail)
      : Error("peer-error", peer_code + ": " + detail),
        peer_code_(std::move(peer_code)) {}

  const std::string& peer_code() const noexcept { return peer_code_; }

private:
  std::string peer_code_;
};

}  // namespace mmw
