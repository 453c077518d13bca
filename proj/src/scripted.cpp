#include "midas/scripted.hpp"

#include <fstream>
#include <sstream>

namespace midas {

namespace {

std::optional<FaultKind> decode_fault(const Reader& r) {
  auto f = r.maybe("fault");
  if (!f) return std::nullopt;
  auto kind = parse_fault_kind(f->str());
  if (!kind) f->fail("unknown fault '" + f->str() + "'");
  return kind;
}

class ScriptedChat : public ChatTransport {
 public:
  explicit ScriptedChat(std::shared_ptr<ScriptedProvider> p) : p_(std::move(p)) {}
  ChatReply complete(const AgentRequest& request, const ProviderBinding&) override { return p_->next_chat(request); }

 private:
  std::shared_ptr<ScriptedProvider> p_;
};

class ScriptedEmbedding : public EmbeddingTransport {
 public:
  explicit ScriptedEmbedding(std::shared_ptr<ScriptedProvider> p) : p_(std::move(p)) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, const ProviderBinding&) override {
    return p_->lookup_embeddings(texts);
  }

 private:
  std::shared_ptr<ScriptedProvider> p_;
};

class ScriptedSearch : public SearchTransport {
 public:
  explicit ScriptedSearch(std::shared_ptr<ScriptedProvider> p) : p_(std::move(p)) {}
  std::vector<SearchResult> search(const std::string& query, int, const ProviderBinding&) override {
    return p_->next_search(query);
  }

 private:
  std::shared_ptr<ScriptedProvider> p_;
};

}  // namespace

Transcript decode_transcript(const Reader& r) {
  Transcript t;
  if (auto chat = r.maybe("chat")) {
    for (const auto& item : chat->items()) {
      ScriptedChatEntry e;
      e.role = decode_provider_role(item.at("role"));
      if (auto m = item.maybe("match")) e.match = m->nonempty_str();
      e.fault = decode_fault(item);
      if (!e.fault) {
        const json& resp = item.at("response").raw();
        e.response = resp.is_string() ? resp.get<std::string>() : resp.dump();
      }
      t.chat.push_back(std::move(e));
    }
  }
  if (auto search = r.maybe("search")) {
    for (const auto& item : search->items()) {
      ScriptedSearchEntry e;
      if (auto m = item.maybe("match")) e.match = m->nonempty_str();
      e.fault = decode_fault(item);
      if (!e.fault) e.results = decode_search_results(item);
      t.search.push_back(std::move(e));
    }
  }
  if (auto emb = r.maybe("embeddings")) {
    ScriptedEmbeddings e;
    e.model_tag = emb->at("model_tag").nonempty_str();
    e.dimension = emb->at("dimension").unsigned_integer();
    if (auto vs = emb->maybe("vectors")) {
      for (const auto& [text, v] : vs->entries()) {
        auto values = v.numbers();
        if (values.size() != e.dimension) v.fail("expected " + std::to_string(e.dimension) + " entries");
        e.vectors.emplace(text, std::move(values));
      }
    }
    if (auto fb = emb->maybe("fallback")) {
      if (fb->str() != "hashing") fb->fail("only \"hashing\" is supported");
      e.hashing_fallback = true;
    }
    t.embeddings = std::move(e);
  }
  return t;
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("transcript not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw DecodeError("$", std::string("transcript is not valid JSON: ") + e.what());
  }
  return decode_transcript(Reader(doc));
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::create(Transcript transcript) {
  return std::shared_ptr<ScriptedProvider>(new ScriptedProvider(std::move(transcript)));
}

ScriptedProvider::ScriptedProvider(Transcript transcript)
    : search_(transcript.search.begin(), transcript.search.end()), embeddings_(std::move(transcript.embeddings)) {
  for (auto& e : transcript.chat) chat_[e.role].push_back(std::move(e));
  if (embeddings_ && embeddings_->hashing_fallback) fallback_.emplace(embeddings_->dimension, 0);
}

std::shared_ptr<ChatTransport> ScriptedProvider::chat() { return std::make_shared<ScriptedChat>(shared_from_this()); }

std::shared_ptr<EmbeddingTransport> ScriptedProvider::embedding() {
  return std::make_shared<ScriptedEmbedding>(shared_from_this());
}

std::shared_ptr<SearchTransport> ScriptedProvider::search() {
  return std::make_shared<ScriptedSearch>(shared_from_this());
}

ChatReply ScriptedProvider::next_chat(const AgentRequest& request) {
  ScriptedChatEntry entry;
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    auto& queue = chat_[request.role];
    auto it = std::find_if(queue.begin(), queue.end(), [&](const ScriptedChatEntry& e) {
      return !e.match || request.prompt.find(*e.match) != std::string::npos;
    });
    if (it == queue.end()) {
      throw ProviderError("scripted transcript has no " + std::string(to_string(request.role)) +
                              " entry matching the request",
                          false);
    }
    entry = std::move(*it);
    queue.erase(it);
  }
  if (entry.fault) {
    if (*entry.fault == FaultKind::Malformed) return ChatReply{"{\"truncated\": ", 0};
    raise_fault(*entry.fault, "scripted " + std::string(to_string(request.role)));
  }
  return ChatReply{entry.response, 0};
}

std::vector<SearchResult> ScriptedProvider::next_search(const std::string& query) {
  ScriptedSearchEntry entry;
  {
    std::lock_guard lock(mu_);
    auto it = std::find_if(search_.begin(), search_.end(), [&](const ScriptedSearchEntry& e) {
      return !e.match || query.find(*e.match) != std::string::npos;
    });
    if (it == search_.end()) throw ProviderError("scripted transcript has no search entry matching the query", false);
    entry = std::move(*it);
    search_.erase(it);
  }
  if (entry.fault) {
    if (*entry.fault == FaultKind::Malformed) throw DecodeError("$.results", "malformed search payload");
    raise_fault(*entry.fault, "scripted search");
  }
  return entry.results;
}

std::vector<EmbeddingVector> ScriptedProvider::lookup_embeddings(const std::vector<std::string>& texts) {
  if (!embeddings_) throw ProviderError("scripted transcript has no embeddings", false);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto it = embeddings_->vectors.find(text);
    if (it != embeddings_->vectors.end()) {
      out.push_back(EmbeddingVector{it->second, embeddings_->model_tag});
    } else if (fallback_) {
      out.push_back(EmbeddingVector{fallback_->embed(text).values, embeddings_->model_tag});
    } else {
      throw ProviderError("scripted transcript has no embedding for \"" + text.substr(0, 60) + "\"", false);
    }
  }
  return out;
}

std::size_t ScriptedProvider::remaining_chat() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [role, q] : chat_) n += q.size();
  return n;
}

std::size_t ScriptedProvider::remaining_chat(ProviderRole role) const {
  std::lock_guard lock(mu_);
  auto it = chat_.find(role);
  return it == chat_.end() ? 0 : it->second.size();
}

std::size_t ScriptedProvider::remaining_search() const {
  std::lock_guard lock(mu_);
  return search_.size();
}

std::vector<AgentRequest> ScriptedProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

}  // namespace midas
