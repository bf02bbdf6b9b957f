#include "nushu/http_provider.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"

namespace nushu {

using nlohmann::json;

std::string build_chat_request(const HttpProviderConfig& config, const PromptBundle& bundle) {
  json messages = json::array();
  if (config.context_mode == ContextMode::Inline) {
    messages.push_back({{"role", "user"}, {"content", bundle.render()}});
  } else {
    messages.push_back({{"role", "system"}, {"content", bundle.instruction}});
    messages.push_back({{"role", "user"},
                        {"content", "[file: examples.tsv]\n" + bundle.render_examples()}});
    messages.push_back({{"role", "user"}, {"content", io::escape_field(to_utf8(bundle.query))}});
  }
  json body = {{"model", config.model}, {"messages", messages}, {"temperature", 0}};
  return body.dump();
}

ProviderReply parse_chat_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    return ProviderReply::transport_error(std::string("unparseable response: ") + e.what());
  }
  const json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const json& choice = doc["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr) {
    return ProviderReply::transport_error("response has no choices[0].message.content");
  }
  const std::string raw = content->get<std::string>();
  Text decoded;
  try {
    decoded = from_utf8(raw);
  } catch (const EncodingError& e) {
    return ProviderReply::transport_error(e.what());
  }
  Text nushu_only;
  for (char32_t c : decoded) {
    if (is_nushu(c)) nushu_only.push_back(c);
  }
  if (nushu_only.empty()) return ProviderReply::refusal(raw);
  return ProviderReply::translation(std::move(nushu_only));
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ArgumentError("endpoint must be an absolute URL: " + config_.endpoint);
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_ = config_.endpoint;
    path_ = "/";
  } else {
    base_ = config_.endpoint.substr(0, path_start);
    path_ = config_.endpoint.substr(path_start);
  }
  if (!(config_.timeout_seconds > 0)) throw ArgumentError("timeout must be positive");
}

ProviderReply HttpProvider::translate(const PromptBundle& bundle) {
  try {
    httplib::Client client(base_);
    if (!client.is_valid()) {
      return ProviderReply::transport_error("unsupported endpoint " + base_);
    }
    const double whole = std::floor(config_.timeout_seconds);
    const auto sec = static_cast<time_t>(whole);
    const auto usec = static_cast<time_t>((config_.timeout_seconds - whole) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str()); token != nullptr && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Post(path_, headers, build_chat_request(config_, bundle), "application/json");
    if (!res) {
      return ProviderReply::transport_error(httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      return ProviderReply::transport_error("HTTP " + std::to_string(res->status) + ": " +
                                            res->body.substr(0, 200));
    }
    return parse_chat_response(res->body);
  } catch (const std::exception& e) {
    return ProviderReply::transport_error(e.what());
  }
}

std::string HttpProvider::describe() const {
  return "http(endpoint=" + config_.endpoint + ", model=" + config_.model + ", context=" +
         (config_.context_mode == ContextMode::Inline ? "inline" : "attachment") + ")";
}

}  // namespace nushu
