#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "support.hpp"

using namespace midas;
using namespace midas::testing;

namespace {

struct Recorded {
  std::string path;
  std::string body;
  std::string authorization;
};

class FakeServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  FakeServer() {
    server_.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      Handler h;
      {
        std::lock_guard lock(mu_);
        seen_.push_back({req.path, req.body, req.get_header_value("Authorization")});
        auto it = handlers_.find(req.path);
        if (it != handlers_.end()) h = it->second;
      }
      if (h) {
        h(req, res);
      } else {
        res.status = 404;
        res.set_content("no route", "text/plain");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  void on(const std::string& path, Handler h) {
    std::lock_guard lock(mu_);
    handlers_[path] = std::move(h);
  }
  void reply(const std::string& path, int status, const std::string& body) {
    on(path, [status, body](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(body, "application/json");
    });
  }
  std::vector<Recorded> seen() const {
    std::lock_guard lock(mu_);
    return seen_;
  }
  std::string url(const std::string& base = "/v1") const { return "http://127.0.0.1:" + std::to_string(port_) + base; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, Handler> handlers_;
  std::vector<Recorded> seen_;
};

ProviderBinding binding(const std::string& endpoint, const std::string& model = "test-model") {
  ProviderBinding b;
  b.endpoint = endpoint;
  b.model = model;
  b.timeout_ms = 2000;
  return b;
}

AgentRequest request(const std::string& prompt = "hello") {
  AgentRequest r;
  r.role = ProviderRole::Muse;
  r.prompt = prompt;
  r.temperature = 0.5;
  return r;
}

const std::string kChatReply =
    R"({"choices":[{"message":{"role":"assistant","content":"{\"a\":1}"}}],"usage":{"total_tokens":42}})";

}  // namespace

TEST(HttpChat, PostsCompletionRequest) {
  FakeServer server;
  server.reply("/v1/chat/completions", 200, kChatReply);
  HttpChatTransport chat("sk-test");
  ChatReply out = chat.complete(request("structure this"), binding(server.url()));
  EXPECT_EQ(out.text, R"({"a":1})");
  EXPECT_EQ(out.tokens, 42u);
  auto seen = server.seen();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].path, "/v1/chat/completions");
  EXPECT_EQ(seen[0].authorization, "Bearer sk-test");
  json body = json::parse(seen[0].body);
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.5);
  EXPECT_EQ(body.at("messages")[0].at("content"), "structure this");
  EXPECT_EQ(body.at("response_format").at("type"), "json_object");
}

TEST(HttpChat, NoKeyMeansNoAuthorizationHeader) {
  FakeServer server;
  server.reply("/v1/chat/completions", 200, R"({"choices":[{"message":{"content":"x"}}]})");
  HttpChatTransport chat;
  ChatReply out = chat.complete(request(), binding(server.url() + "/"));
  EXPECT_EQ(out.tokens, 0u);
  EXPECT_TRUE(server.seen()[0].authorization.empty());
}

TEST(HttpChat, StatusCodesMapToRetryability) {
  FakeServer server;
  HttpChatTransport chat;
  for (int status : {429, 500, 502, 503}) {
    server.reply("/v1/chat/completions", status, "{}");
    try {
      chat.complete(request(), binding(server.url()));
      FAIL() << status;
    } catch (const ProviderError& e) {
      EXPECT_TRUE(e.retryable()) << status;
      EXPECT_EQ(e.status(), status);
    }
  }
  for (int status : {400, 401, 403, 404}) {
    server.reply("/v1/chat/completions", status, R"({"error":"bad"})");
    try {
      chat.complete(request(), binding(server.url()));
      FAIL() << status;
    } catch (const ProviderError& e) {
      EXPECT_FALSE(e.retryable()) << status;
      EXPECT_EQ(e.status(), status);
      EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
    }
  }
}

TEST(HttpChat, MalformedBodiesAreRetryable) {
  FakeServer server;
  HttpChatTransport chat;
  for (const char* body : {"not json", R"({"choices":[]})", R"({"choices":[{"message":{"content":7}}]})"}) {
    server.reply("/v1/chat/completions", 200, body);
    try {
      chat.complete(request(), binding(server.url()));
      FAIL() << body;
    } catch (const ProviderError& e) {
      EXPECT_TRUE(e.retryable()) << body;
    }
  }
}

TEST(HttpChat, UnreachableAndBadEndpoints) {
  HttpChatTransport chat;
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  try {
    chat.complete(request(), binding("http://127.0.0.1:" + std::to_string(port) + "/v1"));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_THROW(chat.complete(request(), binding("localhost/v1")), ConfigError);
  EXPECT_THROW(chat.complete(request(), binding("")), ConfigError);
}

TEST(HttpChat, HubRetriesServerErrors) {
  FakeServer server;
  std::atomic<int> calls{0};
  server.on("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(kChatReply, "application/json");
  });
  Transports t = simulated_transports(0);
  t.chat = std::make_shared<HttpChatTransport>();
  SessionConfig c = default_config();
  c.bindings[ProviderRole::Muse] = binding(server.url());
  ProviderHub hub(t, c, 0, no_sleep());
  ChatReply out = hub.chat(request());
  EXPECT_EQ(out.text, R"({"a":1})");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(hub.sleeps().size(), 2u);
}

TEST(HttpEmbedding, OrdersByIndexAndTagsModel) {
  FakeServer server;
  server.reply("/v1/embeddings", 200,
               R"({"data":[{"index":1,"embedding":[0.0,1.0]},{"index":0,"embedding":[1.0,0.0]}]})");
  HttpEmbeddingTransport emb("k");
  auto out = emb.embed({"first", "second"}, binding(server.url(), "embed-small"));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].values, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(out[1].values, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(out[0].model_tag, "embed-small");
  json body = json::parse(server.seen()[0].body);
  EXPECT_EQ(body.at("input"), (json{"first", "second"}));
  EXPECT_EQ(body.at("model"), "embed-small");
}

TEST(HttpEmbedding, ShapeErrorsAreRetryable) {
  FakeServer server;
  server.reply("/v1/embeddings", 200, R"({"data":[{"embedding":"nope"}]})");
  HttpEmbeddingTransport emb;
  try {
    emb.embed({"x"}, binding(server.url()));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

TEST(HttpSearch, PostsQueryAndDecodesResults) {
  FakeServer server;
  server.reply("/search", 200,
               R"({"results":[{"title":"SitnStand Portable Smart Rising Seat","url":"https://www.sitnstand.com","snippet":"lifts"}]})");
  HttpSearchTransport search;
  auto out = search.search("rising seat", 5, binding(server.url("/search")));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (SearchResult{"SitnStand Portable Smart Rising Seat", "https://www.sitnstand.com", "lifts"}));
  json body = json::parse(server.seen()[0].body);
  EXPECT_EQ(body.at("query"), "rising seat");
  EXPECT_EQ(body.at("limit"), 5);
}

TEST(HttpSearch, MissingFieldIsAShapeError) {
  FakeServer server;
  server.reply("/search", 200, R"({"results":[{"title":"t"}]})");
  HttpSearchTransport search;
  EXPECT_THROW(search.search("q", 5, binding(server.url("/search"))), ProviderError);
}

TEST(HttpImage, DecodesBase64Payload) {
  FakeServer server;
  // "PNG bytes!" in base64.
  server.reply("/v1/images/generations", 200, R"({"data":[{"b64_json":"UE5HIGJ5dGVzIQ=="}]})");
  HttpImageTransport image;
  ImageResult out = image.render("a chair", binding(server.url()));
  EXPECT_EQ(out.bytes, "PNG bytes!");
  EXPECT_EQ(out.media_type, "image/png");
  json body = json::parse(server.seen()[0].body);
  EXPECT_EQ(body.at("prompt"), "a chair");
  EXPECT_EQ(body.at("response_format"), "b64_json");
}

TEST(HttpImage, Base64PaddingVariants) {
  FakeServer server;
  HttpImageTransport image;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"YQ==", "a"}, {"YWI=", "ab"}, {"YWJj", "abc"}, {"YWJj\nZA==", "abcd"}};
  for (const auto& [b64, want] : cases) {
    json body = {{"data", json::array({{{"b64_json", b64}}})}};
    server.reply("/v1/images/generations", 200, body.dump());
    EXPECT_EQ(image.render("p", binding(server.url())).bytes, want) << b64;
  }
  server.reply("/v1/images/generations", 200, R"({"data":[{"b64_json":"abc"}]})");
  EXPECT_THROW(image.render("p", binding(server.url())), ProviderError);
}
