#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace herdsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Domain invariant violated; names the offending id and the failed rule.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& id, const std::string& rule)
      : Error(id.empty() ? rule : id + ": " + rule), id_(id), rule_(rule) {}
  const std::string& id() const noexcept { return id_; }
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string id_;
  std::string rule_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Gateway transport or extraction failure; optionally tagged with the
/// question that was being processed.
class GatewayError : public Error {
 public:
  explicit GatewayError(const std::string& msg, std::string question_id = {})
      : Error(question_id.empty() ? msg : msg + " [question " + question_id + "]"),
        question_id_(std::move(question_id)) {}
  const std::string& question_id() const noexcept { return question_id_; }

 private:
  std::string question_id_;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace herdsim
