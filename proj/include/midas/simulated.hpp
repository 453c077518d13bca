#pragma once

// Content-addressed mock providers: every reply is a pure function of
// (seed, schema, template variables), so calls may complete in any order and
// reruns see identical answers. Replies are schema-valid by construction.

#include "midas/providers.hpp"

namespace midas {

class SimulatedChat : public ChatTransport {
 public:
  explicit SimulatedChat(std::uint64_t seed = 0) : seed_(seed) {}
  ChatReply complete(const AgentRequest& request, const ProviderBinding& binding) override;

 private:
  std::uint64_t seed_;
};

class SimulatedSearch : public SearchTransport {
 public:
  explicit SimulatedSearch(std::uint64_t seed = 0, int results = 10) : seed_(seed), results_(results) {}
  std::vector<SearchResult> search(const std::string& query, int limit, const ProviderBinding& binding) override;

 private:
  std::uint64_t seed_;
  int results_;
};

// Hashing embeddings, simulated chat and search, placeholder images.
Transports simulated_transports(std::uint64_t seed = 0, int search_results = 10);

}  // namespace midas
