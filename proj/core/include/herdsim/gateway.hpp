#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "herdsim/agents.hpp"

namespace herdsim {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct GatewayLimits {
  int max_in_flight = 4;
  double requests_per_second = 8.0;
  int max_retries = 3;
  int initial_backoff_ms = 200;
  double backoff_multiplier = 2.0;
  int max_backoff_ms = 10000;
  int top_logprobs = 20;
  int timeout_s = 120;
};

/// Per-token top-k log-probabilities -> logits for the requested labels.
/// Labels absent from the returned top-k get log(1e-3 * smallest returned
/// label probability). Throws GatewayError if no label token is present.
LogitVector extract_label_logits(const nlohmann::json& response,
                                 const std::vector<char>& labels);

/// Last line matching "Answer: <letter>" in a chain-of-thought completion.
std::optional<char> parse_cot_answer(const std::string& text);

// Blocking HTTP client for an OpenAI-style chat-completions endpoint.
// Requests are rate limited by a token bucket, bounded in flight, and
// retried with exponential backoff on transport errors, 429 and 5xx.
class GatewayClient {
 public:
  GatewayClient(std::string url, std::string api_key, GatewayLimits limits);
  ~GatewayClient();

  GatewayClient(const GatewayClient&) = delete;
  GatewayClient& operator=(const GatewayClient&) = delete;

  nlohmann::json chat(const nlohmann::json& body) const;

  /// max_tokens=1 logprobs request; extracts per-label logits.
  LogitVector choice_logits(const std::string& model,
                            const std::vector<ChatMessage>& messages,
                            const std::vector<char>& labels,
                            double temperature) const;

  /// Plain text completion (reasons, chain of thought).
  std::string complete_text(const std::string& model,
                            const std::vector<ChatMessage>& messages,
                            int max_tokens, double temperature) const;

  const GatewayLimits& limits() const { return limits_; }
  const std::string& url() const { return url_; }

 private:
  struct Impl;
  std::string url_;
  std::string api_key_;
  GatewayLimits limits_;
  std::unique_ptr<Impl> impl_;
};

/// gateway_choice_logits over a configured client: one next-token logprobs
/// query for `rendered_prompt`, extracting the given labels.
LogitVector gateway_choice_logits(const GatewayClient& client,
                                  const std::string& model_id,
                                  const std::vector<ChatMessage>& messages,
                                  const std::vector<char>& labels,
                                  double temperature);

// AgentModel backed by the external gateway. Reasons are cached on disk
// keyed by (model, question id, choice) when a cache directory is set.
class GatewayAgent : public AgentModel {
 public:
  GatewayAgent(std::shared_ptr<const GatewayClient> client, std::string model_id,
               double temperature = 1.0, std::string reason_cache_dir = {});

  LogitVector question_logits(const Question& q) const override;
  LogitVector revised_logits(const Question& q, const PeerContext& ctx) const override;
  double temperature() const override { return temperature_; }
  std::string model_id() const override { return model_id_; }
  std::string reason_for(const Question& q, char choice) const override;
  std::optional<char> chain_of_thought_answer(const Question& q,
                                              std::uint64_t sample_seed) const override;

  /// Prompt construction, exposed for tests: question block, lettered
  /// choices, optional peer block, single-letter answer instruction.
  static std::string answer_prompt(const Question& q, const std::string& peer_block);
  static std::string cot_prompt(const Question& q);

 private:
  std::vector<ChatMessage> messages_for(const Question& q,
                                        const std::string& peer_block,
                                        const std::optional<std::string>& system_prompt) const;

  std::shared_ptr<const GatewayClient> client_;
  std::string model_id_;
  double temperature_;
  std::string reason_cache_dir_;
  mutable std::mutex cache_mutex_;
};

}  // namespace herdsim
