#include "midas/runtime_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "midas/simulated.hpp"

namespace midas {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TransportSpec decode_spec(const Reader& r, TransportSpec spec, std::initializer_list<std::string_view> kinds) {
  if (auto k = r.maybe("kind")) {
    spec.kind = k->str();
    if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) k->fail("unsupported kind '" + spec.kind + "'");
  }
  if (auto d = r.maybe("dimension")) {
    if (d->integer() < 2) d->fail("must be at least 2");
    spec.dimension = static_cast<std::size_t>(d->integer());
  }
  if (auto n = r.maybe("results")) {
    if (n->integer() < 0) n->fail("must be non-negative");
    spec.results = static_cast<int>(n->integer());
  }
  return spec;
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

RuntimeConfig decode_runtime_config(const Reader& r, const fs::path& base_dir) {
  RuntimeConfig c;
  if (auto s = r.maybe("session")) {
    c.session = decode_config(*s);
    try {
      validate(c.session);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto p = r.maybe("providers")) {
    if (auto t = p->maybe("transcript")) {
      fs::path path = t->nonempty_str();
      c.transcript = path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    }
    if (auto x = p->maybe("chat")) c.chat = decode_spec(*x, c.chat, {"http", "scripted", "simulated"});
    if (auto x = p->maybe("embedding")) c.embedding = decode_spec(*x, c.embedding, {"http", "scripted", "hashing"});
    if (auto x = p->maybe("search")) c.search = decode_spec(*x, c.search, {"http", "scripted", "simulated", "none"});
    if (auto x = p->maybe("image")) c.image = decode_spec(*x, c.image, {"http", "placeholder"});
  }
  bool scripted = c.chat.kind == "scripted" || c.embedding.kind == "scripted" || c.search.kind == "scripted";
  if (scripted && !c.transcript) throw ConfigError("scripted providers need providers.transcript");
  return c;
}

RuntimeConfig load_runtime_config(const fs::path& path) {
  std::string text = slurp(path, "config");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return decode_runtime_config(Reader(doc), path.parent_path());
}

RuntimeTransports build_transports(const RuntimeConfig& c, std::uint64_t seed) {
  RuntimeTransports out;
  if (c.transcript) out.scripted = ScriptedProvider::create(load_transcript(*c.transcript));

  if (c.chat.kind == "http") out.transports.chat = std::make_shared<HttpChatTransport>(env("MIDAS_CHAT_KEY"));
  else if (c.chat.kind == "scripted") out.transports.chat = out.scripted->chat();
  else out.transports.chat = std::make_shared<SimulatedChat>(seed);

  if (c.embedding.kind == "http") out.transports.embedding = std::make_shared<HttpEmbeddingTransport>(env("MIDAS_EMBED_KEY"));
  else if (c.embedding.kind == "scripted") out.transports.embedding = out.scripted->embedding();
  else out.transports.embedding = std::make_shared<HashingEmbeddingTransport>(c.embedding.dimension, 0);

  if (c.search.kind == "http") out.transports.search = std::make_shared<HttpSearchTransport>(env("MIDAS_SEARCH_KEY"));
  else if (c.search.kind == "scripted") out.transports.search = out.scripted->search();
  else if (c.search.kind == "none") out.transports.search = std::make_shared<NullSearchTransport>();
  else out.transports.search = std::make_shared<SimulatedSearch>(seed, c.search.results);

  if (c.image.kind == "http") out.transports.image = std::make_shared<HttpImageTransport>(env("MIDAS_IMAGE_KEY"));
  else out.transports.image = std::make_shared<PlaceholderImageTransport>();
  return out;
}

ProblemInput load_problem(const fs::path& path) {
  std::string text = slurp(path, "problem");
  ProblemInput p;
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    p.problem_text = text;
    while (!p.problem_text.empty() && std::isspace(static_cast<unsigned char>(p.problem_text.back()))) p.problem_text.pop_back();
    if (p.problem_text.empty()) throw InvalidInput("problem file is empty");
    return p;
  }
  Reader r(doc);
  p.problem_text = r.at("problem_text").nonempty_str();
  if (auto ideas = r.maybe("ideas")) p.ideas = ideas->strings();
  if (auto lit = r.maybe("literature")) {
    for (const auto& item : lit->items()) {
      LiteratureEntry e;
      e.id = "lit-pending";
      e.title = item.at("title").nonempty_str();
      e.action = item.at("action").nonempty_str();
      e.object = item.at("object").nonempty_str();
      e.context = item.at("context").nonempty_str();
      if (auto u = item.maybe("source_url")) e.source_url = u->str();
      e.retrieval_mode = RetrievalMode::Manual;
      p.literature.push_back(e);
    }
  }
  return p;
}

}  // namespace midas
