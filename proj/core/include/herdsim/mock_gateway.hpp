#pragma once

#include <functional>
#include <memory>
#include <string>

#include <json.hpp>

namespace herdsim {

// In-process fixture server speaking the gateway wire contract. The handler
// receives the parsed request body and returns the response body; throwing
// std::exception yields a 500 so retry paths can be exercised.
class MockGateway {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json& request)>;

  explicit MockGateway(Handler handler);
  ~MockGateway();

  MockGateway(const MockGateway&) = delete;
  MockGateway& operator=(const MockGateway&) = delete;

  /// Full endpoint URL, e.g. "http://127.0.0.1:49321/v1/chat/completions".
  std::string url() const;

  int request_count() const;

  /// Canned single-token logprobs response in the wire format.
  static nlohmann::json logprobs_response(
      const std::vector<std::pair<std::string, double>>& top_logprobs);

  /// Canned text completion response.
  static nlohmann::json text_response(const std::string& content);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace herdsim
