#pragma once

#include <string>

#include "nushu/provider.hpp"

namespace nushu {

enum class ContextMode {
  Inline,      // the rendered prompt is sent as one user message
  Attachment,  // examples travel as a separate file-style message
};

struct HttpProviderConfig {
  std::string endpoint;  // full URL of a chat-completions style endpoint
  std::string model;
  std::string token_env = "NUSHU_API_TOKEN";
  double timeout_seconds = 60.0;
  ContextMode context_mode = ContextMode::Inline;
};

/// Builds the JSON request body for a bundle. Exposed for tests.
std::string build_chat_request(const HttpProviderConfig& config, const PromptBundle& bundle);

/// Interprets a chat-completions response body. Nüshu characters in the
/// first choice form the translation; a reply without any is a refusal.
ProviderReply parse_chat_response(const std::string& body);

// Live adapter for OpenAI-compatible chat-completions endpoints. The bearer
// token is read from the environment variable named in the config.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  ProviderReply translate(const PromptBundle& bundle) override;
  std::string describe() const override;

 private:
  HttpProviderConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace nushu
