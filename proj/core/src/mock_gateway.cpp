#include "herdsim/mock_gateway.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "herdsim/error.hpp"

namespace herdsim {

using nlohmann::json;

struct MockGateway::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
};

MockGateway::MockGateway(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/chat/completions",
                     [this, handler](const httplib::Request& req, httplib::Response& res) {
                       impl_->requests.fetch_add(1);
                       try {
                         const json body = json::parse(req.body);
                         res.set_content(handler(body).dump(), "application/json");
                       } catch (const std::exception& e) {
                         res.status = 500;
                         res.set_content(std::string("{\"error\":\"") + e.what() + "\"}",
                                         "application/json");
                       }
                     });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw Error("mock gateway failed to bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockGateway::~MockGateway() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockGateway::url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions";
}

int MockGateway::request_count() const { return impl_->requests.load(); }

json MockGateway::logprobs_response(
    const std::vector<std::pair<std::string, double>>& top_logprobs) {
  json top = json::array();
  for (const auto& [token, logprob] : top_logprobs)
    top.push_back({{"token", token}, {"logprob", logprob}});
  const std::string first = top_logprobs.empty() ? "" : top_logprobs.front().first;
  const double first_lp = top_logprobs.empty() ? 0.0 : top_logprobs.front().second;
  return json{{"choices",
               json::array({json{
                   {"message", {{"role", "assistant"}, {"content", first}}},
                   {"logprobs",
                    {{"content", json::array({json{{"token", first},
                                                   {"logprob", first_lp},
                                                   {"top_logprobs", top}}})}}},
               }})}};
}

json MockGateway::text_response(const std::string& content) {
  return json{{"choices", json::array({json{
                              {"message", {{"role", "assistant"}, {"content", content}}},
                          }})}};
}

}  // namespace herdsim
