#pragma once

// Provider seam: every model, embedding, search and image call made by the
// agents goes through a ProviderHub, which owns retries, in-flight limits and
// usage accounting. Transports only move bytes.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "midas/embedding.hpp"
#include "midas/model.hpp"
#include "midas/session.hpp"

namespace midas {

struct AgentRequest {
  ProviderRole role = ProviderRole::Scribe;
  std::string prompt;
  double temperature = 0.0;
  std::string response_schema;  // schema asset id, e.g. "scribe"
  int attempt = 0;              // transport attempt, 0-based
  json vars = json::object();   // template variables the prompt was rendered from
};

struct ChatReply {
  std::string text;
  std::uint64_t tokens = 0;  // 0 = let the hub estimate
};

struct SearchResult {
  std::string title;
  std::string url;
  std::string snippet;

  bool operator==(const SearchResult&) const = default;
};

struct ImageResult {
  std::string bytes;
  std::string media_type = "image/png";
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatReply complete(const AgentRequest& request, const ProviderBinding& binding) = 0;
};

class EmbeddingTransport {
 public:
  virtual ~EmbeddingTransport() = default;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, const ProviderBinding& binding) = 0;
};

class SearchTransport {
 public:
  virtual ~SearchTransport() = default;
  virtual std::vector<SearchResult> search(const std::string& query, int limit, const ProviderBinding& binding) = 0;
};

class ImageTransport {
 public:
  virtual ~ImageTransport() = default;
  virtual ImageResult render(const std::string& prompt, const ProviderBinding& binding) = 0;
};

struct Transports {
  std::shared_ptr<ChatTransport> chat;
  std::shared_ptr<EmbeddingTransport> embedding;
  std::shared_ptr<SearchTransport> search;
  std::shared_ptr<ImageTransport> image;
};

struct BackoffPolicy {
  double base_ms = 250.0;
  double factor = 2.0;
  double jitter = 0.2;  // +/- fraction
  double cap_ms = 8000.0;

  // Delay before retry number `retry` (1 = first retry).
  std::chrono::milliseconds delay(int retry, std::mt19937_64& rng) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

// FIFO counting semaphore: waiters are served in arrival order.
class FairSemaphore {
 public:
  explicit FairSemaphore(int permits);
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int permits_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

// Runs fn(i) for i in [0, n) on up to `parallel` threads. Results keep input
// order; the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int parallel, const std::function<void(std::size_t)>& fn);

std::uint64_t estimate_tokens(std::string_view text);

class ProviderHub {
 public:
  ProviderHub(Transports transports, SessionConfig config, std::uint64_t seed = 0, Sleeper sleeper = real_sleeper(),
              BackoffPolicy backoff = {});

  ChatReply chat(AgentRequest request);
  // Chunked by embed_batch_size; chunks run concurrently, output keeps input
  // order, each chunk is retried as a whole.
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
  std::vector<SearchResult> search(const std::string& query);
  ImageResult render_image(const std::string& prompt);

  const SessionConfig& config() const { return config_; }
  EmbeddingProvider& embedder() { return embedder_; }

  std::map<std::string, RoleUsage> usage() const;
  std::vector<std::chrono::milliseconds> sleeps() const;

 private:
  template <typename F>
  auto with_retries(ProviderRole role, F&& call) -> decltype(call(0));
  FairSemaphore& gate(ProviderRole role);
  void record(ProviderRole role, std::uint64_t tokens);

  class HubEmbedder : public EmbeddingProvider {
   public:
    explicit HubEmbedder(ProviderHub& hub) : hub_(hub) {}
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
      return hub_.embed_batch(texts);
    }

   private:
    ProviderHub& hub_;
  };

  Transports transports_;
  SessionConfig config_;
  Sleeper sleeper_;
  BackoffPolicy backoff_;
  HubEmbedder embedder_{*this};

  mutable std::mutex mu_;
  std::mt19937_64 jitter_rng_;
  std::map<std::string, RoleUsage> usage_;
  std::vector<std::chrono::milliseconds> sleeps_;
  std::map<ProviderRole, std::unique_ptr<FairSemaphore>> gates_;
};

// --- Offline transports ------------------------------------------------------

class HashingEmbeddingTransport : public EmbeddingTransport {
 public:
  explicit HashingEmbeddingTransport(std::size_t dimension = 64, std::uint64_t seed = 0) : embedder_(dimension, seed) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, const ProviderBinding&) override {
    return embedder_.embed_batch(texts);
  }

 private:
  HashingEmbedder embedder_;
};

// 1x1 PNG for every prompt.
class PlaceholderImageTransport : public ImageTransport {
 public:
  ImageResult render(const std::string& prompt, const ProviderBinding&) override;
};

const std::string& placeholder_png();

class NullSearchTransport : public SearchTransport {
 public:
  std::vector<SearchResult> search(const std::string&, int, const ProviderBinding&) override { return {}; }
};

// --- Fault injection ---------------------------------------------------------

enum class FaultKind { Transient, Fatal, Timeout, Malformed };
std::optional<FaultKind> parse_fault_kind(std::string_view text);
[[noreturn]] void raise_fault(FaultKind kind, const std::string& where);

// Decorates a chat transport: fails selected calls before they reach the
// wrapped transport, so scripted cursors are never consumed by a fault.
class FaultInjector : public ChatTransport {
 public:
  using Rule = std::function<std::optional<FaultKind>(const AgentRequest&, std::uint64_t call_index)>;

  FaultInjector(std::shared_ptr<ChatTransport> inner, Rule rule) : inner_(std::move(inner)), rule_(std::move(rule)) {}

  ChatReply complete(const AgentRequest& request, const ProviderBinding& binding) override;

  std::uint64_t calls() const;
  std::uint64_t faults() const;

  // The first `count` calls for `role` fail with `kind`.
  static Rule first_calls(ProviderRole role, int count, FaultKind kind = FaultKind::Transient);
  // Every call for `role` fails.
  static Rule always(ProviderRole role, FaultKind kind = FaultKind::Transient);

 private:
  std::shared_ptr<ChatTransport> inner_;
  Rule rule_;
  mutable std::mutex mu_;
  std::uint64_t calls_ = 0;
  std::uint64_t faults_ = 0;
};

// --- HTTP transports ---------------------------------------------------------

// OpenAI-compatible chat completions: POST {endpoint}/chat/completions.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(std::string api_key = {}) : key_(std::move(api_key)) {}
  ChatReply complete(const AgentRequest& request, const ProviderBinding& binding) override;

 private:
  std::string key_;
};

// OpenAI-compatible embeddings: POST {endpoint}/embeddings.
class HttpEmbeddingTransport : public EmbeddingTransport {
 public:
  explicit HttpEmbeddingTransport(std::string api_key = {}) : key_(std::move(api_key)) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, const ProviderBinding& binding) override;

 private:
  std::string key_;
};

// Generic search JSON: POST {endpoint} {"query", "limit"} -> {"results": [{title, url, snippet}]}.
class HttpSearchTransport : public SearchTransport {
 public:
  explicit HttpSearchTransport(std::string api_key = {}) : key_(std::move(api_key)) {}
  std::vector<SearchResult> search(const std::string& query, int limit, const ProviderBinding& binding) override;

 private:
  std::string key_;
};

// OpenAI-compatible images: POST {endpoint}/images/generations, b64_json reply.
class HttpImageTransport : public ImageTransport {
 public:
  explicit HttpImageTransport(std::string api_key = {}) : key_(std::move(api_key)) {}
  ImageResult render(const std::string& prompt, const ProviderBinding& binding) override;

 private:
  std::string key_;
};

std::vector<SearchResult> decode_search_results(const Reader& r);

}  // namespace midas
