#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

#include "nushu/http_provider.hpp"
#include "nushu/pipeline.hpp"
#include "support.hpp"

using namespace nushu;
using nlohmann::json;

namespace {

PromptBundle small_bundle() {
  PromptBundle b;
  b.instruction = "Translate.";
  b.examples = {{U"阳", U"𛅰"}};
  b.query = U"阳阳";
  return b;
}

// Local chat-completions stand-in serving one canned body.
class FakeEndpoint {
 public:
  FakeEndpoint(int status, std::string body) {
    server_.Post("/v1/chat/completions", [this, status, body](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  const std::string& last_auth() const { return last_auth_; }
  const std::string& last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::string last_auth_, last_body_;
};

std::string completion(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

}  // namespace

TEST_CASE("chat request body for both context modes") {
  HttpProviderConfig cfg{"http://x/v1", "m", "T", 5, ContextMode::Inline};
  const auto inline_body = json::parse(build_chat_request(cfg, small_bundle()));
  CHECK(inline_body["model"] == "m");
  CHECK(inline_body["temperature"] == 0);
  REQUIRE(inline_body["messages"].size() == 1);
  CHECK(inline_body["messages"][0]["content"] == small_bundle().render());

  cfg.context_mode = ContextMode::Attachment;
  const auto att = json::parse(build_chat_request(cfg, small_bundle()));
  REQUIRE(att["messages"].size() == 3);
  CHECK(att["messages"][0]["content"] == "Translate.");
  CHECK(att["messages"][1]["content"].get<std::string>().find("阳\t𛅰") != std::string::npos);
  CHECK(att["messages"][2]["content"] == "阳阳");
}

TEST_CASE("parse_chat_response classifies replies") {
  const auto ok = parse_chat_response(completion("Answer: 𛅰𛅱"));
  REQUIRE(ok.is_translation());
  CHECK(ok.text() == U"𛅰𛅱");
  CHECK(parse_chat_response(completion("I cannot translate this.")).kind() == ProviderReply::Kind::Refusal);
  CHECK(parse_chat_response("not json").kind() == ProviderReply::Kind::TransportError);
  CHECK(parse_chat_response("{\"choices\":[]}").kind() == ProviderReply::Kind::TransportError);
}

TEST_CASE("http provider talks to a local endpoint") {
  FakeEndpoint server(200, completion("𛅰𛅰"));
  ::setenv("NUSHU_TEST_TOKEN", "secret", 1);
  HttpProvider provider({server.url(), "model-x", "NUSHU_TEST_TOKEN", 5, ContextMode::Inline});
  const auto r = provider.translate(small_bundle());
  REQUIRE(r.is_translation());
  CHECK(r.text() == U"𛅰𛅰");
  CHECK(server.last_auth() == "Bearer secret");
  CHECK(json::parse(server.last_body())["model"] == "model-x");
  CHECK(provider.describe().find("model-x") != std::string::npos);
}

TEST_CASE("http errors and unreachable endpoints are transport errors") {
  {
    FakeEndpoint server(500, "{\"error\":\"boom\"}");
    HttpProvider provider({server.url(), "m", "NUSHU_UNSET_TOKEN", 5, ContextMode::Inline});
    const auto r = provider.translate(small_bundle());
    CHECK(r.kind() == ProviderReply::Kind::TransportError);
    CHECK(r.detail().find("500") != std::string::npos);
  }
  // bind a port, then release it so nothing listens there
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpProvider dead({"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "m", "X", 1,
                     ContextMode::Inline});
  CHECK(dead.translate(small_bundle()).kind() == ProviderReply::Kind::TransportError);
  CHECK_THROWS(HttpProvider({"not a url", "m", "X", 1, ContextMode::Inline}));
}

TEST_CASE("transport errors consume the retry budget") {
  FakeEndpoint server(503, "{}");
  HttpProvider provider({server.url(), "m", "X", 5, ContextMode::Inline});
  const auto table = testing::fixture_table();
  SeedPool pool(35, testing::gold_pairs(table, 35, 1));
  PipelineConfig cfg;
  const auto out = translate_with_retry(provider, pool, U"一丁", cfg, 1, 1);
  CHECK(out.pair.status == Status::Failed);
  CHECK(out.attempts == 8);
  CHECK(out.transport_errors == 8);
}
