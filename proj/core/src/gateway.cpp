#include "herdsim/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "herdsim/error.hpp"

namespace herdsim {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path;              // e.g. "/v1/chat/completions"
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("gateway URL must start with http:// or https://: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/v1/chat/completions";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
    if (out.path == "/") out.path = "/v1/chat/completions";
  }
  return out;
}

}  // namespace

LogitVector extract_label_logits(const json& response,
                                 const std::vector<char>& labels) {
  if (labels.empty()) throw GatewayError("no labels requested");

  const json* top_logprobs = nullptr;
  try {
    top_logprobs = &response.at("choices").at(0).at("logprobs").at("content").at(0).at(
        "top_logprobs");
  } catch (const json::exception& e) {
    throw GatewayError(std::string("response lacks token logprobs: ") + e.what());
  }

  std::map<char, double> found;
  for (const auto& entry : *top_logprobs) {
    const std::string token = trim(entry.at("token").get<std::string>());
    if (token.size() != 1) continue;
    const char t = token[0];
    if (std::find(labels.begin(), labels.end(), t) == labels.end()) continue;
    const double lp = entry.at("logprob").get<double>();
    auto it = found.find(t);
    if (it == found.end() || lp > it->second) found[t] = lp;
  }

  if (found.empty()) throw GatewayError("response contains none of the label tokens");

  double min_found = found.begin()->second;
  for (const auto& [label, lp] : found) min_found = std::min(min_found, lp);
  const double floor = std::log(1e-3) + min_found;

  LogitVector out;
  for (char label : labels) {
    auto it = found.find(label);
    out.logits[label] = it != found.end() ? it->second : floor;
  }
  return out;
}

std::optional<char> parse_cot_answer(const std::string& text) {
  std::optional<char> answer;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    constexpr std::string_view prefix = "Answer:";
    if (t.rfind(prefix, 0) != 0) continue;
    std::string rest = trim(t.substr(prefix.size()));
    if (rest.empty()) continue;
    const char c = rest[0];
    if (c < 'A' || c > 'Z') continue;
    if (rest.size() > 1 && std::isalnum(static_cast<unsigned char>(rest[1]))) continue;
    answer = c;
  }
  return answer;
}

// Token bucket plus in-flight bound shared by all requests on a client.
struct GatewayClient::Impl {
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  mutable int in_flight = 0;
  mutable double tokens;
  mutable std::chrono::steady_clock::time_point last_refill;
  double rate;
  double capacity;
  int max_in_flight;
  ParsedUrl url;

  Impl(const GatewayLimits& limits, ParsedUrl parsed)
      : tokens(std::max(1.0, limits.requests_per_second)),
        last_refill(std::chrono::steady_clock::now()),
        rate(limits.requests_per_second),
        capacity(std::max(1.0, limits.requests_per_second)),
        max_in_flight(std::max(1, limits.max_in_flight)),
        url(std::move(parsed)) {}

  void refill() const {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_refill).count();
    tokens = std::min(capacity, tokens + elapsed * rate);
    last_refill = now;
  }

  void acquire() const {
    std::unique_lock<std::mutex> lock(mu);
    for (;;) {
      refill();
      if (in_flight < max_in_flight && tokens >= 1.0) {
        tokens -= 1.0;
        ++in_flight;
        return;
      }
      if (in_flight >= max_in_flight) {
        cv.wait(lock);
      } else {
        const double deficit = 1.0 - tokens;
        const auto wait = std::chrono::duration<double>(deficit / std::max(rate, 1e-9));
        cv.wait_for(lock, std::chrono::duration_cast<std::chrono::milliseconds>(wait) +
                              std::chrono::milliseconds(1));
      }
    }
  }

  void release() const {
    {
      std::lock_guard<std::mutex> lock(mu);
      --in_flight;
    }
    cv.notify_all();
  }
};

GatewayClient::GatewayClient(std::string url, std::string api_key,
                             GatewayLimits limits)
    : url_(std::move(url)),
      api_key_(std::move(api_key)),
      limits_(limits),
      impl_(std::make_unique<Impl>(limits_, parse_url(url_))) {}

GatewayClient::~GatewayClient() = default;

json GatewayClient::chat(const json& body) const {
  const std::string payload = body.dump();
  std::string last_error;

  for (int attempt = 0; attempt <= limits_.max_retries; ++attempt) {
    if (attempt > 0) {
      double backoff = limits_.initial_backoff_ms *
                       std::pow(limits_.backoff_multiplier, attempt - 1);
      backoff = std::min(backoff, static_cast<double>(limits_.max_backoff_ms));
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(backoff)));
    }

    impl_->acquire();
    httplib::Client cli(impl_->url.scheme_host_port);
    cli.set_connection_timeout(limits_.timeout_s, 0);
    cli.set_read_timeout(limits_.timeout_s, 0);
    cli.set_write_timeout(limits_.timeout_s, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(impl_->url.path, headers, payload, "application/json");
    impl_->release();

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "gateway returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw GatewayError("gateway returned status " + std::to_string(res->status) +
                         ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw GatewayError(std::string("gateway returned malformed JSON: ") + e.what());
    }
  }
  throw GatewayError("retry budget exhausted: " + last_error);
}

LogitVector GatewayClient::choice_logits(const std::string& model,
                                         const std::vector<ChatMessage>& messages,
                                         const std::vector<char>& labels,
                                         double temperature) const {
  json body;
  body["model"] = model;
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  body["temperature"] = temperature;
  body["max_tokens"] = 1;
  body["logprobs"] = true;
  body["top_logprobs"] = limits_.top_logprobs;
  return extract_label_logits(chat(body), labels);
}

std::string GatewayClient::complete_text(const std::string& model,
                                         const std::vector<ChatMessage>& messages,
                                         int max_tokens, double temperature) const {
  json body;
  body["model"] = model;
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  body["temperature"] = temperature;
  body["max_tokens"] = max_tokens;
  const json response = chat(body);
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw GatewayError(std::string("response lacks message content: ") + e.what());
  }
}

LogitVector gateway_choice_logits(const GatewayClient& client,
                                  const std::string& model_id,
                                  const std::vector<ChatMessage>& messages,
                                  const std::vector<char>& labels,
                                  double temperature) {
  return client.choice_logits(model_id, messages, labels, temperature);
}

GatewayAgent::GatewayAgent(std::shared_ptr<const GatewayClient> client,
                           std::string model_id, double temperature,
                           std::string reason_cache_dir)
    : client_(std::move(client)),
      model_id_(std::move(model_id)),
      temperature_(temperature),
      reason_cache_dir_(std::move(reason_cache_dir)) {
  if (!client_) throw ConfigError("gateway agent requires a client");
  if (!(temperature_ > 0.0)) throw ConfigError("confidence temperature must be > 0");
}

std::string GatewayAgent::answer_prompt(const Question& q,
                                        const std::string& peer_block) {
  std::string s = "Question: " + q.text + "\n";
  for (const auto& c : q.choices) s += std::string(1, c.label) + ". " + c.text + "\n";
  if (!peer_block.empty()) s += "\n" + peer_block + "\n";
  s += "\nAnswer with only the letter of your choice.";
  return s;
}

std::string GatewayAgent::cot_prompt(const Question& q) {
  std::string s = "Question: " + q.text + "\n";
  for (const auto& c : q.choices) s += std::string(1, c.label) + ". " + c.text + "\n";
  s += "\nThink step by step, then give your final answer as a single line: "
       "Answer: <letter>.";
  return s;
}

std::vector<ChatMessage> GatewayAgent::messages_for(
    const Question& q, const std::string& peer_block,
    const std::optional<std::string>& system_prompt) const {
  std::vector<ChatMessage> messages;
  if (system_prompt) messages.push_back({"system", *system_prompt});
  messages.push_back({"user", answer_prompt(q, peer_block)});
  return messages;
}

LogitVector GatewayAgent::question_logits(const Question& q) const {
  try {
    return client_->choice_logits(model_id_, messages_for(q, {}, std::nullopt),
                                  q.labels(), 0.0);
  } catch (const GatewayError& e) {
    throw GatewayError(e.what(), q.id);
  }
}

LogitVector GatewayAgent::revised_logits(const Question& q,
                                         const PeerContext& ctx) const {
  try {
    return client_->choice_logits(model_id_,
                                  messages_for(q, ctx.rendered, ctx.system_prompt),
                                  q.labels(), 0.0);
  } catch (const GatewayError& e) {
    throw GatewayError(e.what(), q.id);
  }
}

namespace {

std::string sanitize_for_path(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

std::string GatewayAgent::reason_for(const Question& q, char choice) const {
  namespace fs = std::filesystem;
  fs::path cache_file;
  if (!reason_cache_dir_.empty()) {
    cache_file = fs::path(reason_cache_dir_) /
                 (sanitize_for_path(model_id_) + "__" + sanitize_for_path(q.id) +
                  "__" + std::string(1, choice) + ".txt");
    std::lock_guard<std::mutex> lock(cache_mutex_);
    std::ifstream in(cache_file);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }

  std::string prompt = "Question: " + q.text + "\n";
  for (const auto& c : q.choices)
    prompt += std::string(1, c.label) + ". " + c.text + "\n";
  prompt += "\nIn one to three sentences, justify why the answer is " +
            std::string(1, choice) + ".";
  std::vector<ChatMessage> messages{{"user", prompt}};

  std::string text;
  for (int attempt = 0; attempt < 2; ++attempt) {
    text = trim(client_->complete_text(model_id_, messages, 200, 0.0));
    if (!text.empty()) break;
  }
  if (text.empty()) throw GatewayError("empty reason generation", q.id);

  if (!reason_cache_dir_.empty()) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    fs::create_directories(cache_file.parent_path());
    std::ofstream out(cache_file);
    out << text;
  }
  return text;
}

std::optional<char> GatewayAgent::chain_of_thought_answer(const Question& q,
                                                          std::uint64_t) const {
  std::vector<ChatMessage> messages{{"user", cot_prompt(q)}};
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string text = client_->complete_text(model_id_, messages, 512, 0.0);
    const auto answer = parse_cot_answer(text);
    if (answer && q.has_label(*answer)) return answer;
  }
  return std::nullopt;  // abstention
}

}  // namespace herdsim
