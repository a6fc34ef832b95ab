#pragma once

#include <stdexcept>
#include <string>

namespace wattbench {

/// Malformed plan, descriptor, scenario or topology input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unusable measurement data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// HTTP backend failure; carries the status code and a body excerpt.
class HttpError : public std::runtime_error {
 public:
  HttpError(const std::string& what, int status_code, std::string body_excerpt)
      : std::runtime_error(what), status(status_code), body(std::move(body_excerpt)) {}
  int status;
  std::string body;
};

/// A metric is undefined for the given inputs (e.g. WR with zero successes).
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wattbench
