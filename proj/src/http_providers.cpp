#include <httplib.h>

#include <openssl/evp.h>

#include <algorithm>

#include "midas/providers.hpp"

namespace midas {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos) throw ConfigError("provider endpoint must be an absolute URL: '" + url + "'");
  auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

json post_json(const ProviderBinding& binding, const std::string& key, const std::string& suffix, const json& body) {
  Endpoint ep = split_endpoint(binding.endpoint);
  httplib::Client client(ep.origin);
  auto timeout = std::chrono::milliseconds(binding.timeout_ms);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                (timeout.count() % 1000) * 1000);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), (timeout.count() % 1000) * 1000);
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), (timeout.count() % 1000) * 1000);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  auto res = client.Post(ep.path + suffix, headers, body.dump(), "application/json");
  if (!res) throw ProviderError("request to " + binding.endpoint + " failed: " + httplib::to_string(res.error()), true);
  if (res->status == 429 || res->status >= 500) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status), true, 0, res->status);
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), false, 0,
                        res->status);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProviderError("provider returned a malformed JSON body", true, 0, res->status);
  }
}

std::string base64_decode(const std::string& text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.size() % 4 != 0) throw ProviderError("image payload is not valid base64", true);
  std::string out(clean.size() / 4 * 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()), reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) throw ProviderError("image payload is not valid base64", true);
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

template <typename F>
auto reading(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected ") + what + " response shape: " + e.what(), true);
  } catch (const DecodeError& e) {
    throw ProviderError(std::string("unexpected ") + what + " response shape: " + e.what(), true);
  }
}

}  // namespace

ChatReply HttpChatTransport::complete(const AgentRequest& request, const ProviderBinding& binding) {
  json body{{"model", binding.model},
            {"temperature", request.temperature},
            {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
            {"response_format", json{{"type", "json_object"}}}};
  json reply = post_json(binding, key_, "/chat/completions", body);
  return reading("chat", [&] {
    ChatReply out;
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("usage") && reply["usage"].contains("total_tokens")) {
      out.tokens = reply["usage"]["total_tokens"].get<std::uint64_t>();
    }
    return out;
  });
}

std::vector<EmbeddingVector> HttpEmbeddingTransport::embed(const std::vector<std::string>& texts,
                                                           const ProviderBinding& binding) {
  json reply = post_json(binding, key_, "/embeddings", json{{"model", binding.model}, {"input", texts}});
  return reading("embedding", [&] {
    std::vector<std::pair<std::size_t, std::vector<double>>> rows;
    for (const auto& item : reply.at("data")) {
      rows.emplace_back(item.value("index", rows.size()), item.at("embedding").get<std::vector<double>>());
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EmbeddingVector> out;
    for (auto& [index, values] : rows) out.push_back(EmbeddingVector{std::move(values), binding.model});
    return out;
  });
}

std::vector<SearchResult> HttpSearchTransport::search(const std::string& query, int limit, const ProviderBinding& binding) {
  json reply = post_json(binding, key_, "", json{{"query", query}, {"limit", limit}, {"model", binding.model}});
  return reading("search", [&] { return decode_search_results(Reader(reply)); });
}

ImageResult HttpImageTransport::render(const std::string& prompt, const ProviderBinding& binding) {
  json body{{"model", binding.model}, {"prompt", prompt}, {"n", 1}, {"response_format", "b64_json"}};
  json reply = post_json(binding, key_, "/images/generations", body);
  std::string b64 = reading("image", [&] { return reply.at("data").at(0).at("b64_json").get<std::string>(); });
  return ImageResult{base64_decode(b64), "image/png"};
}

}  // namespace midas
