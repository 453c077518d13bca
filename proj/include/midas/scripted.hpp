#pragma once

// Deterministic, network-free providers for tests and demos.
//
// Transcript document:
//   {"chat": [{"role": "scout", "match": "Action: Lifts", "response": {...}}, ...],
//    "search": [{"match": "...", "results": [{title, url, snippet}]}],
//    "embeddings": {"model_tag": "...", "dimension": 64,
//                   "vectors": {"<text>": [..]}, "fallback": "hashing"}}
// A chat entry holds either "response" (object, serialized, or string, sent
// verbatim) or "fault" (transient | fatal | timeout | malformed). For each
// request the first unconsumed entry of that role whose "match" is a
// substring of the prompt (or that has no "match") is consumed.

#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>

#include "midas/providers.hpp"

namespace midas {

struct ScriptedChatEntry {
  ProviderRole role = ProviderRole::Scribe;
  std::optional<std::string> match;
  std::string response;
  std::optional<FaultKind> fault;
};

struct ScriptedSearchEntry {
  std::optional<std::string> match;
  std::vector<SearchResult> results;
  std::optional<FaultKind> fault;
};

struct ScriptedEmbeddings {
  std::string model_tag = "scripted";
  std::size_t dimension = 64;
  std::map<std::string, std::vector<double>> vectors;
  bool hashing_fallback = false;
};

struct Transcript {
  std::vector<ScriptedChatEntry> chat;
  std::vector<ScriptedSearchEntry> search;
  std::optional<ScriptedEmbeddings> embeddings;
};

Transcript decode_transcript(const Reader& r);
Transcript load_transcript(const std::filesystem::path& path);

// Shared cursor over one transcript; hands out the per-kind transports.
class ScriptedProvider : public std::enable_shared_from_this<ScriptedProvider> {
 public:
  static std::shared_ptr<ScriptedProvider> create(Transcript transcript);

  std::shared_ptr<ChatTransport> chat();
  std::shared_ptr<EmbeddingTransport> embedding();
  std::shared_ptr<SearchTransport> search();

  ChatReply next_chat(const AgentRequest& request);
  std::vector<SearchResult> next_search(const std::string& query);
  std::vector<EmbeddingVector> lookup_embeddings(const std::vector<std::string>& texts);

  std::size_t remaining_chat() const;
  std::size_t remaining_chat(ProviderRole role) const;
  std::size_t remaining_search() const;
  // Every prompt seen, in call order.
  std::vector<AgentRequest> requests() const;

 private:
  explicit ScriptedProvider(Transcript transcript);

  mutable std::mutex mu_;
  std::map<ProviderRole, std::deque<ScriptedChatEntry>> chat_;
  std::deque<ScriptedSearchEntry> search_;
  std::optional<ScriptedEmbeddings> embeddings_;
  std::optional<HashingEmbedder> fallback_;
  std::vector<AgentRequest> requests_;
};

}  // namespace midas
