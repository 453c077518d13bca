#include "midas/simulated.hpp"

#include <cctype>

#include "midas/hash.hpp"

namespace midas {

namespace {

constexpr const char* kAdjectives[] = {"Adaptive", "Foldable", "Modular", "Inflatable", "Magnetic", "Solar",
                                       "Kinetic", "Telescopic", "Woven", "Acoustic", "Thermal", "Elastic",
                                       "Hydraulic", "Origami", "Bamboo", "Ceramic"};
constexpr const char* kNouns[] = {"lever",   "cushion", "rail",   "harness", "platform", "sleeve",
                                  "hinge",   "frame",   "strap",  "pod",     "bracket",  "mat",
                                  "chamber", "grip",    "pulley", "shell"};
constexpr const char* kVerbs[] = {"Lifts and steadies", "Guides and cushions", "Tilts and locks",
                                  "Expands and supports", "Senses and adjusts", "Rotates and aligns",
                                  "Stores and releases", "Counterbalances", "Dampens and absorbs",
                                  "Signals and prompts", "Clamps and frees", "Softens and firms"};
constexpr const char* kSettings[] = {"at home after surgery",    "in shared living rooms",    "during night-time use",
                                     "in small apartments",     "outdoors on uneven ground", "in care facilities",
                                     "while travelling",        "in bathrooms",              "for users living alone",
                                     "in public waiting areas", "in kitchens",               "beside the bed"};

template <std::size_t N>
const char* pick(std::uint64_t h, const char* const (&list)[N]) {
  return list[h % N];
}

std::string tag(std::uint64_t h) { return hex16(h).substr(0, 5); }

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string var_str(const json& vars, const char* key) {
  auto it = vars.find(key);
  if (it == vars.end()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

std::string first_words(const std::string& text, std::size_t n) {
  std::string out;
  std::size_t words = 0;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ' && ++words == n) break;
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  while (!out.empty() && (out.back() == ' ' || out.back() == '.' || out.back() == ',')) out.pop_back();
  return out.empty() ? "the task" : out;
}

json make_idea(std::uint64_t h) {
  std::uint64_t a = mix64(h);
  std::uint64_t b = mix64(a);
  std::uint64_t c = mix64(b);
  std::uint64_t d = mix64(c);
  std::string noun = pick(b, kNouns);
  return json{{"title", std::string(pick(a, kAdjectives)) + " " + capitalized(noun) + " " + tag(d)},
              {"action", std::string(pick(c, kVerbs)) + " the body through the movement"},
              {"object", std::string(pick(a >> 8, kAdjectives)) + " " + noun},
              {"context", std::string("Used ") + pick(d, kSettings) + " by people with limited strength"}};
}

int score_of(std::uint64_t seed, const std::string& action, const std::string& object) {
  return static_cast<int>(1 + mix64(fnv1a64(object, fnv1a64(action, fnv1a64(seed)))) % 10);
}

json reply_for(std::uint64_t seed, const AgentRequest& req) {
  const json& v = req.vars;
  const std::string& schema = req.response_schema;
  const std::uint64_t base = fnv1a64(std::string(to_string(req.role)), fnv1a64(seed));

  if (schema == "scribe") {
    std::string text = var_str(v, "problem_text");
    std::string gist = first_words(text, 8);
    return json{{"activity", "Supporting " + gist},
                {"item", "People and products described in: " + first_words(text, 5)},
                {"contradiction", "Users need more help with " + first_words(text, 4) + " but current products give none"},
                {"criteria", {"Enables independence", "Reduces reliance on others", "Keeps the user comfortable"}},
                {"constraints", {"Must be safe", "Must be affordable", "Must fit ordinary homes"}}};
  }
  if (schema == "aoc_idea") {
    std::string text = var_str(v, "idea_text");
    std::uint64_t h = fnv1a64(text, base);
    return json{{"title", "Designer " + capitalized(pick(h, kNouns)) + " " + tag(h)},
                {"action", "Applies " + first_words(text, 6)},
                {"object", capitalized(pick(mix64(h), kNouns))},
                {"context", "Proposed by the designer: " + text.substr(0, 160)}};
  }
  if (schema == "idea_list") {
    json ideas = json::array();
    if (v.contains("pair_list")) {
      std::size_t i = 0;
      for (const auto& p : v.at("pair_list")) {
        std::uint64_t h = fnv1a64(p.at("object").get<std::string>(), fnv1a64(p.at("action").get<std::string>(), base));
        if (i > 0 && mix64(h) % 6 == 0) {
          ideas.push_back(ideas.back());  // scripted near-duplicate
        } else {
          json idea = make_idea(h);
          idea["action"] = p.at("action");
          idea["object"] = p.at("object");
          ideas.push_back(idea);
        }
        ++i;
      }
    } else {
      std::uint64_t h = fnv1a64(var_str(v, "prior_ideas"), fnv1a64(var_str(v, "activity"), base));
      h = fnv1a64(static_cast<std::uint64_t>(v.value("round", 1)), h);
      for (int i = 0; i < v.value("count", 0); ++i) ideas.push_back(make_idea(fnv1a64(static_cast<std::uint64_t>(i), h)));
    }
    return json{{"ideas", ideas}};
  }
  if (schema == "literature_list") {
    json entries = json::array();
    int limit = v.value("limit", 10);
    for (const auto& r : v.value("results", json::array())) {
      if (static_cast<int>(entries.size()) >= limit) break;
      std::uint64_t h = fnv1a64(r.at("url").get<std::string>(), base);
      json idea = make_idea(h);
      entries.push_back(json{{"title", r.at("title")},
                             {"action", idea["action"]},
                             {"object", idea["object"]},
                             {"context", "Existing solution: " + r.at("snippet").get<std::string>()},
                             {"source_url", r.at("url")}});
    }
    return json{{"entries", entries}};
  }
  if (schema == "mint") {
    int n = v.value("list_size", 20);
    std::uint64_t h = fnv1a64(var_str(v, "ideas"), base);
    json actions = json::array();
    json objects = json::array();
    for (int i = 0; i < n; ++i) {
      std::uint64_t k = mix64(fnv1a64(static_cast<std::uint64_t>(i), h));
      actions.push_back(std::string(pick(k, kVerbs)) + " " + tag(k));
      objects.push_back(std::string(pick(k >> 16, kAdjectives)) + " " + pick(k >> 32, kNouns) + " " + tag(mix64(k)));
    }
    return json{{"actions", actions}, {"objects", objects}};
  }
  if (schema == "scout_row") {
    std::string action = var_str(v, "action");
    json scores = json::array();
    std::size_t i = 0;
    for (const auto& o : v.at("object_list")) {
      int s = score_of(seed, action, o.get<std::string>());
      scores.push_back(json{{"object_index", i++}, {"score", s}, {"rationale", "simulated feasibility " + std::to_string(s)}});
    }
    return json{{"scores", scores}};
  }
  if (schema == "scout_pair") {
    int s = score_of(seed, var_str(v, "action"), var_str(v, "object"));
    return json{{"score", s}, {"rationale", "simulated feasibility " + std::to_string(s)}};
  }
  if (schema == "sentinel") {
    json verdicts = json::array();
    std::size_t i = 0;
    for (const auto& c : v.at("candidate_list")) {
      std::string context = c.at("context").get<std::string>();
      std::uint64_t h = mix64(fnv1a64(context, fnv1a64(c.at("title").get<std::string>(), base)));
      json verdict{{"index", i++}};
      switch (h % 10) {
        case 0:
          verdict["verdict"] = "remove";
          verdict["rationale"] = "drifted from the criteria";
          break;
        case 1:
          verdict["verdict"] = "polish";
          verdict["rationale"] = "relevant, wording tightened";
          verdict["context"] = context + ", tuned to the stated criteria";
          break;
        default:
          verdict["verdict"] = "keep";
          verdict["rationale"] = "meets the criteria";
      }
      verdicts.push_back(verdict);
    }
    return json{{"verdicts", verdicts}};
  }
  if (schema == "pfic") {
    std::string title = var_str(v, "title");
    std::uint64_t h = fnv1a64(title, base);
    return json{{"principle", "Providing support by " + var_str(v, "action") + " with " + var_str(v, "object")},
                {"features", {title + " core mechanism", std::string(pick(h, kAdjectives)) + " housing"}},
                {"implementation", {"Prototype the mechanism", "Test with " + first_words(var_str(v, "context"), 6)}},
                {"characteristics", {"Safe in daily use", std::string(pick(mix64(h), kAdjectives)) + " finish"}}};
  }
  throw ProviderError("simulated provider cannot answer schema '" + schema + "'", false);
}

}  // namespace

ChatReply SimulatedChat::complete(const AgentRequest& request, const ProviderBinding&) {
  return ChatReply{reply_for(seed_, request).dump(), 0};
}

std::vector<SearchResult> SimulatedSearch::search(const std::string& query, int limit, const ProviderBinding&) {
  std::vector<SearchResult> out;
  std::uint64_t h = fnv1a64(query, fnv1a64(seed_));
  for (int i = 0; i < std::min(limit, results_); ++i) {
    std::uint64_t k = mix64(fnv1a64(static_cast<std::uint64_t>(i), h));
    std::string name = std::string(pick(k, kAdjectives)) + " " + capitalized(pick(k >> 8, kNouns)) + " " + tag(k);
    out.push_back(SearchResult{name, "https://example.org/prior/" + tag(k), "A product that " + std::string(pick(k >> 16, kVerbs))});
  }
  return out;
}

Transports simulated_transports(std::uint64_t seed, int search_results) {
  Transports t;
  t.chat = std::make_shared<SimulatedChat>(seed);
  t.embedding = std::make_shared<HashingEmbeddingTransport>(64, 0);
  t.search = std::make_shared<SimulatedSearch>(seed, search_results);
  t.image = std::make_shared<PlaceholderImageTransport>();
  return t;
}

}  // namespace midas
