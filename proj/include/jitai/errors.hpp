#pragma once

#include <stdexcept>

namespace jitai {

// Bad user-supplied configuration: missing API key, malformed scenario file, ...
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Network or HTTP failure while talking to a chat-completion endpoint.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure (unwritable output directory, unreadable input file).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear-algebra breakdown, e.g. a covariance that lost positive definiteness.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace jitai
