#include "midas/providers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace midas {

std::chrono::milliseconds BackoffPolicy::delay(int retry, std::mt19937_64& rng) const {
  double raw = base_ms * std::pow(factor, std::max(0, retry - 1));
  std::uniform_real_distribution<double> jitter_dist(1.0 - jitter, 1.0 + jitter);
  double ms = std::min(cap_ms, raw * jitter_dist(rng));
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

FairSemaphore::FairSemaphore(int permits) : permits_(std::max(1, permits)) {}

void FairSemaphore::acquire() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return ticket == serving_ && permits_ > 0; });
  --permits_;
  ++serving_;
  cv_.notify_all();
}

void FairSemaphore::release() {
  {
    std::lock_guard lock(mu_);
    ++permits_;
  }
  cv_.notify_all();
}

void parallel_for(std::size_t n, int parallel, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallel)));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

// --- ProviderHub -------------------------------------------------------------

ProviderHub::ProviderHub(Transports transports, SessionConfig config, std::uint64_t seed, Sleeper sleeper,
                         BackoffPolicy backoff)
    : transports_(std::move(transports)),
      config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      backoff_(backoff),
      jitter_rng_(seed ^ 0x6a09e667f3bcc908ULL) {
  for (ProviderRole role : kAllProviderRoles) {
    gates_[role] = std::make_unique<FairSemaphore>(config_.binding(role).max_in_flight);
  }
}

FairSemaphore& ProviderHub::gate(ProviderRole role) { return *gates_.at(role); }

void ProviderHub::record(ProviderRole role, std::uint64_t tokens) {
  std::lock_guard lock(mu_);
  auto& u = usage_[std::string(to_string(role))];
  ++u.calls;
  u.tokens += tokens;
}

std::map<std::string, RoleUsage> ProviderHub::usage() const {
  std::lock_guard lock(mu_);
  return usage_;
}

std::vector<std::chrono::milliseconds> ProviderHub::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

template <typename F>
auto ProviderHub::with_retries(ProviderRole role, F&& call) -> decltype(call(0)) {
  const ProviderBinding& binding = config_.binding(role);
  for (int attempt = 0;; ++attempt) {
    try {
      gate(role).acquire();
      struct Release {
        FairSemaphore& s;
        ~Release() { s.release(); }
      } release{gate(role)};
      return call(attempt);
    } catch (const ProviderError& e) {
      const int made = attempt + 1;
      if (!e.retryable()) throw ProviderError(e.what(), false, made, e.status());
      if (attempt >= binding.max_retries) {
        throw ProviderError(std::string(to_string(role)) + ": retry budget exhausted after " + std::to_string(made) +
                                " attempts: " + e.what(),
                            false, made, e.status());
      }
      std::chrono::milliseconds d;
      {
        std::lock_guard lock(mu_);
        d = backoff_.delay(attempt + 1, jitter_rng_);
        sleeps_.push_back(d);
      }
      sleeper_(d);
    }
  }
}

ChatReply ProviderHub::chat(AgentRequest request) {
  if (!transports_.chat) throw ConfigError("no chat provider configured");
  const ProviderRole role = request.role;
  request.temperature = config_.temperature(role);
  ChatReply reply = with_retries(role, [&](int attempt) {
    request.attempt = attempt;
    return transports_.chat->complete(request, config_.binding(role));
  });
  if (reply.tokens == 0) reply.tokens = estimate_tokens(request.prompt) + estimate_tokens(reply.text);
  record(role, reply.tokens);
  return reply;
}

std::vector<EmbeddingVector> ProviderHub::embed_batch(const std::vector<std::string>& texts) {
  if (texts.empty()) throw InvalidInput("embedding batch must be non-empty");
  if (!transports_.embedding) throw ConfigError("no embedding provider configured");
  const auto chunk = static_cast<std::size_t>(std::max(1, config_.embed_batch_size));
  const std::size_t chunks = (texts.size() + chunk - 1) / chunk;
  std::vector<std::vector<EmbeddingVector>> parts(chunks);
  const auto& binding = config_.binding(ProviderRole::Embedding);

  parallel_for(chunks, binding.max_in_flight, [&](std::size_t c) {
    std::vector<std::string> slice(texts.begin() + static_cast<long>(c * chunk),
                                   texts.begin() + static_cast<long>(std::min(texts.size(), (c + 1) * chunk)));
    parts[c] = with_retries(ProviderRole::Embedding, [&](int) {
      auto out = transports_.embedding->embed(slice, binding);
      if (out.size() != slice.size()) {
        throw ProviderError("embedding provider returned " + std::to_string(out.size()) + " of " +
                                std::to_string(slice.size()) + " vectors",
                            true);
      }
      return out;
    });
    std::uint64_t tokens = 0;
    for (const auto& t : slice) tokens += estimate_tokens(t);
    record(ProviderRole::Embedding, tokens);
  });

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& part : parts) {
    for (auto& v : part) {
      v.values = normalize(std::move(v.values));
      if (!out.empty() && (v.model_tag != out.front().model_tag || v.values.size() != out.front().values.size())) {
        throw ConfigError("embedding provider returned vectors of mixed model or dimension");
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<SearchResult> ProviderHub::search(const std::string& query) {
  if (!transports_.search) throw ProviderError("no search provider configured", false);
  const int limit = config_.search_limit;
  auto results = with_retries(ProviderRole::Search, [&](int) {
    return transports_.search->search(query, limit, config_.binding(ProviderRole::Search));
  });
  if (results.size() > static_cast<std::size_t>(limit)) results.resize(static_cast<std::size_t>(limit));
  std::uint64_t tokens = estimate_tokens(query);
  for (const auto& r : results) tokens += estimate_tokens(r.title) + estimate_tokens(r.snippet);
  record(ProviderRole::Search, tokens);
  return results;
}

ImageResult ProviderHub::render_image(const std::string& prompt) {
  if (prompt.empty()) throw InvalidInput("image prompt must be non-empty");
  if (!transports_.image) throw ProviderError("no image provider configured", false);
  auto out = with_retries(ProviderRole::Leo,
                          [&](int) { return transports_.image->render(prompt, config_.binding(ProviderRole::Leo)); });
  record(ProviderRole::Leo, estimate_tokens(prompt));
  return out;
}

// --- Offline transports ------------------------------------------------------

const std::string& placeholder_png() {
  static const std::string png = [] {
    const unsigned char bytes[] = {
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
        0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f, 0x15, 0xc4,
        0x89, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xf0,
        0x1f, 0x00, 0x05, 0x00, 0x01, 0xff, 0x89, 0x99, 0x3d, 0x1d, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45,
        0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  }();
  return png;
}

ImageResult PlaceholderImageTransport::render(const std::string&, const ProviderBinding&) {
  return ImageResult{placeholder_png(), "image/png"};
}

// --- Faults ------------------------------------------------------------------

std::optional<FaultKind> parse_fault_kind(std::string_view text) {
  if (text == "transient") return FaultKind::Transient;
  if (text == "fatal") return FaultKind::Fatal;
  if (text == "timeout") return FaultKind::Timeout;
  if (text == "malformed") return FaultKind::Malformed;
  return std::nullopt;
}

void raise_fault(FaultKind kind, const std::string& where) {
  switch (kind) {
    case FaultKind::Transient: throw ProviderError(where + ": injected transient fault", true, 0, 503);
    case FaultKind::Timeout: throw ProviderError(where + ": request timed out", true);
    case FaultKind::Fatal: throw ProviderError(where + ": injected fatal fault", false, 0, 400);
    case FaultKind::Malformed: break;
  }
  throw ProviderError(where + ": malformed fault has no transport error", false);
}

ChatReply FaultInjector::complete(const AgentRequest& request, const ProviderBinding& binding) {
  std::optional<FaultKind> fault;
  {
    std::lock_guard lock(mu_);
    fault = rule_(request, calls_++);
    if (fault) ++faults_;
  }
  if (fault) {
    if (*fault == FaultKind::Malformed) return ChatReply{"{\"truncated\": ", 0};
    raise_fault(*fault, std::string(to_string(request.role)));
  }
  return inner_->complete(request, binding);
}

std::uint64_t FaultInjector::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::uint64_t FaultInjector::faults() const {
  std::lock_guard lock(mu_);
  return faults_;
}

FaultInjector::Rule FaultInjector::first_calls(ProviderRole role, int count, FaultKind kind) {
  auto seen = std::make_shared<std::atomic<int>>(0);
  return [=](const AgentRequest& r, std::uint64_t) -> std::optional<FaultKind> {
    if (r.role != role) return std::nullopt;
    if ((*seen)++ < count) return kind;
    return std::nullopt;
  };
}

FaultInjector::Rule FaultInjector::always(ProviderRole role, FaultKind kind) {
  return [=](const AgentRequest& r, std::uint64_t) -> std::optional<FaultKind> {
    if (r.role == role) return kind;
    return std::nullopt;
  };
}

std::vector<SearchResult> decode_search_results(const Reader& r) {
  std::vector<SearchResult> out;
  for (const auto& item : r.at("results").items()) {
    out.push_back(SearchResult{item.at("title").str(), item.at("url").str(),
                               item.maybe("snippet") ? item.at("snippet").str() : std::string{}});
  }
  return out;
}

}  // namespace midas
