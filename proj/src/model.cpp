#include "midas/model.hpp"

#include <algorithm>
#include <cmath>

namespace midas {

namespace {

constexpr EnumNames<Phase, 7> kPhaseNames{{
    {Phase::Definition, "Definition"},
    {Phase::Generation, "Generation"},
    {Phase::Assessment, "Assessment"},
    {Phase::Divergence, "Divergence"},
    {Phase::Refinement, "Refinement"},
    {Phase::Conceptualization, "Conceptualization"},
    {Phase::Done, "Done"},
}};

constexpr EnumNames<Provenance, 4> kProvenanceNames{{
    {Provenance::Human, "Human"},
    {Provenance::AIFormulator, "AI-Formulator"},
    {Provenance::AIExplorer, "AI-Explorer"},
    {Provenance::NavigatorSynthesized, "Navigator-Synthesized"},
}};

constexpr EnumNames<IdeaStatus, 5> kStatusNames{{
    {IdeaStatus::Raw, "Raw"},
    {IdeaStatus::Shortlisted, "Shortlisted"},
    {IdeaStatus::GloballyNovel, "GloballyNovel"},
    {IdeaStatus::Curated, "Curated"},
    {IdeaStatus::Removed, "Removed"},
}};

constexpr EnumNames<RetrievalMode, 2> kRetrievalNames{{
    {RetrievalMode::Search, "Search"},
    {RetrievalMode::Manual, "Manual"},
}};

constexpr EnumNames<Actor, 2> kActorNames{{
    {Actor::System, "system"},
    {Actor::Human, "human"},
}};

constexpr EnumNames<ProviderRole, 13> kRoleNames{{
    {ProviderRole::Scribe, "scribe"},
    {ProviderRole::Muse, "muse"},
    {ProviderRole::ForgeFormulator, "forge_formulator"},
    {ProviderRole::ForgeExplorer, "forge_explorer"},
    {ProviderRole::Librarian, "librarian"},
    {ProviderRole::Mint, "mint"},
    {ProviderRole::Scout, "scout"},
    {ProviderRole::Navigator, "navigator"},
    {ProviderRole::Sentinel, "sentinel"},
    {ProviderRole::Director, "director"},
    {ProviderRole::Leo, "leo"},
    {ProviderRole::Embedding, "embedding"},
    {ProviderRole::Search, "search"},
}};

constexpr EnumNames<AgentKind, 13> kAgentNames{{
    {AgentKind::Scribe, "scribe"},
    {AgentKind::Muse, "muse"},
    {AgentKind::Forge, "forge"},
    {AgentKind::Gatekeeper, "gatekeeper"},
    {AgentKind::Librarian, "librarian"},
    {AgentKind::Challenger, "challenger"},
    {AgentKind::Mint, "mint"},
    {AgentKind::Scout, "scout"},
    {AgentKind::Navigator, "navigator"},
    {AgentKind::Sentinel, "sentinel"},
    {AgentKind::Director, "director"},
    {AgentKind::Leo, "leo"},
    {AgentKind::Professor, "professor"},
}};

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

json encode_strings(const std::vector<std::string>& v) { return json(v); }

template <typename T, typename F>
json encode_list(const std::vector<T>& items, F&& f) {
  json out = json::array();
  for (const auto& item : items) out.push_back(f(item));
  return out;
}

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames.name(p); }
std::string_view to_string(Provenance p) { return kProvenanceNames.name(p); }
std::string_view to_string(IdeaStatus s) { return kStatusNames.name(s); }
std::string_view to_string(RetrievalMode m) { return kRetrievalNames.name(m); }
std::string_view to_string(Actor a) { return kActorNames.name(a); }
std::string_view to_string(ProviderRole r) { return kRoleNames.name(r); }
std::string_view to_string(AgentKind a) { return kAgentNames.name(a); }

std::optional<Phase> parse_phase(std::string_view text) { return kPhaseNames.parse(text); }
std::optional<ProviderRole> parse_provider_role(std::string_view text) { return kRoleNames.parse(text); }
std::optional<AgentKind> parse_agent_kind(std::string_view text) { return kAgentNames.parse(text); }

Phase decode_phase(const Reader& r) { return kPhaseNames.decode(r); }
Provenance decode_provenance(const Reader& r) { return kProvenanceNames.decode(r); }
IdeaStatus decode_status(const Reader& r) { return kStatusNames.decode(r); }
ProviderRole decode_provider_role(const Reader& r) { return kRoleNames.decode(r); }
AgentKind decode_agent_kind(const Reader& r) { return kAgentNames.decode(r); }
Actor decode_actor(const Reader& r) { return kActorNames.decode(r); }

Phase next_phase(Phase p) {
  switch (p) {
    case Phase::Definition: return Phase::Generation;
    case Phase::Generation: return Phase::Assessment;
    case Phase::Assessment: return Phase::Divergence;
    case Phase::Divergence: return Phase::Refinement;
    case Phase::Refinement: return Phase::Conceptualization;
    case Phase::Conceptualization: return Phase::Done;
    case Phase::Done: return Phase::Done;
  }
  return Phase::Done;
}

int phase_index(Phase p) { return static_cast<int>(p); }

// --- Vaults ------------------------------------------------------------------

const Idea* Vaults::find_idea(std::string_view id) const {
  for (const auto& idea : idea_vault) {
    if (idea.id == id) return &idea;
  }
  return nullptr;
}

Idea* Vaults::find_idea(std::string_view id) {
  return const_cast<Idea*>(static_cast<const Vaults*>(this)->find_idea(id));
}

const LiteratureEntry* Vaults::find_literature(std::string_view id) const {
  for (const auto& e : literature_vault) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Concept* Vaults::find_concept(std::string_view id) {
  for (auto& c : concept_vault) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const ProblemStatement* Vaults::current_problem() const {
  for (auto it = problem_vault.rbegin(); it != problem_vault.rend(); ++it) {
    if (!it->invalidated) return &*it;
  }
  return nullptr;
}

std::vector<Idea> Vaults::ideas_with_status(IdeaStatus status) const {
  std::vector<Idea> out;
  for (const auto& idea : idea_vault) {
    if (idea.status == status) out.push_back(idea);
  }
  return out;
}

std::vector<LiteratureEntry> Vaults::live_literature() const {
  std::vector<LiteratureEntry> out;
  for (const auto& e : literature_vault) {
    if (!e.invalidated) out.push_back(e);
  }
  return out;
}

std::vector<Concept> Vaults::live_concepts() const {
  std::vector<Concept> out;
  for (const auto& c : concept_vault) {
    if (!c.invalidated) out.push_back(c);
  }
  return out;
}

// --- Config ------------------------------------------------------------------

double SessionConfig::temperature(ProviderRole role) const {
  auto it = temperatures.find(role);
  if (it == temperatures.end()) throw ConfigError("no temperature configured for role " + std::string(to_string(role)));
  return it->second;
}

const ProviderBinding& SessionConfig::binding(ProviderRole role) const {
  auto it = bindings.find(role);
  if (it == bindings.end()) throw ConfigError("no provider binding for role " + std::string(to_string(role)));
  return it->second;
}

SessionConfig default_config() {
  SessionConfig c;
  c.temperatures = {
      {ProviderRole::Scribe, 0.5},    {ProviderRole::Muse, 0.5},      {ProviderRole::ForgeFormulator, 0.5},
      {ProviderRole::ForgeExplorer, 1.0}, {ProviderRole::Librarian, 0.2}, {ProviderRole::Mint, 0.5},
      {ProviderRole::Scout, 0.2},     {ProviderRole::Navigator, 0.6}, {ProviderRole::Sentinel, 0.2},
      {ProviderRole::Director, 0.5},  {ProviderRole::Leo, 0.5},       {ProviderRole::Embedding, 0.0},
      {ProviderRole::Search, 0.2},
  };
  for (auto role : kAllProviderRoles) c.bindings[role] = ProviderBinding{};
  return c;
}

void validate(const SessionConfig& c) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw InvalidInput("config." + field + ": " + why);
  };
  for (auto role : kAllProviderRoles) {
    auto it = c.temperatures.find(role);
    if (it == c.temperatures.end()) bad("temperatures." + std::string(to_string(role)), "missing");
    if (!(it->second >= 0.0 && it->second <= 2.0)) bad("temperatures." + std::string(to_string(role)), "must be in [0,2]");
    auto b = c.bindings.find(role);
    if (b == c.bindings.end()) bad("bindings." + std::string(to_string(role)), "missing");
    if (b->second.timeout_ms <= 0) bad("bindings." + std::string(to_string(role)) + ".timeout_ms", "must be > 0");
    if (b->second.max_retries < 0) bad("bindings." + std::string(to_string(role)) + ".max_retries", "must be >= 0");
    if (b->second.max_in_flight < 1) bad("bindings." + std::string(to_string(role)) + ".max_in_flight", "must be >= 1");
  }
  if (!(c.gatekeeper_eps > 0.0 && c.gatekeeper_eps <= 2.0)) bad("gatekeeper_eps", "must be in (0,2]");
  if (c.gatekeeper_min_pts < 1) bad("gatekeeper_min_pts", "must be >= 1");
  if (!(c.challenger_threshold > 0.0 && c.challenger_threshold < 1.0)) bad("challenger_threshold", "must be in (0,1)");
  if (c.mint_list_size < 1) bad("mint_list_size", "must be >= 1");
  if (c.scout_top_k < 1) bad("scout_top_k", "must be >= 1");
  if (c.max_rounds < 1) bad("max_rounds", "must be >= 1");
  if (c.raw_idea_budget && *c.raw_idea_budget < 1) bad("raw_idea_budget", "must be >= 1");
  if (c.max_repair_retries < 0) bad("max_repair_retries", "must be >= 0");
  if (c.search_limit < 0) bad("search_limit", "must be >= 0");
  if (c.embed_batch_size < 1) bad("embed_batch_size", "must be >= 1");
  if (c.min_survivors_to_diverge < 0) bad("min_survivors_to_diverge", "must be >= 0");
}

// --- Invariants --------------------------------------------------------------

void validate(const ProblemStatement& p) {
  if (blank(p.activity)) throw InvalidInput("problem.activity must be non-empty");
  if (blank(p.item)) throw InvalidInput("problem.item must be non-empty");
  if (blank(p.contradiction)) throw InvalidInput("problem.contradiction must be non-empty");
  if (p.criteria.empty()) throw InvalidInput("problem.criteria needs at least one entry");
  if (p.constraints.empty()) throw InvalidInput("problem.constraints needs at least one entry");
  for (const auto& s : p.criteria) {
    if (blank(s)) throw InvalidInput("problem.criteria entries must be non-empty");
  }
  for (const auto& s : p.constraints) {
    if (blank(s)) throw InvalidInput("problem.constraints entries must be non-empty");
  }
}

void validate_aoc(std::string_view title, std::string_view action, std::string_view object, std::string_view context) {
  if (blank(title)) throw InvalidInput("title must be non-empty");
  if (blank(action)) throw InvalidInput("action must be non-empty");
  if (blank(object)) throw InvalidInput("object must be non-empty");
  if (blank(context)) throw InvalidInput("context must be non-empty");
}

void validate(const LiteratureEntry& e) {
  validate_aoc(e.title, e.action, e.object, e.context);
  if (blank(e.source_url)) throw InvalidInput("literature source_url must be non-empty");
}

void validate(const Concept& c) {
  if (blank(c.principle)) throw InvalidInput("concept.principle must be non-empty");
  if (c.features.empty()) throw InvalidInput("concept.features must be non-empty");
  if (c.implementation.empty()) throw InvalidInput("concept.implementation must be non-empty");
  if (c.characteristics.empty()) throw InvalidInput("concept.characteristics must be non-empty");
}

void validate_unit_norm(const EmbeddingVector& v) {
  if (v.values.empty()) throw InvalidInput("embedding must be non-empty");
  double sq = 0.0;
  for (double x : v.values) {
    if (!std::isfinite(x)) throw InvalidInput("embedding has a non-finite entry");
    sq += x * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) throw InvalidInput("embedding is not unit-norm");
}

// --- Encoding ----------------------------------------------------------------

json encode(const EmbeddingVector& v) { return json{{"values", v.values}, {"model_tag", v.model_tag}}; }

json encode(const ProblemStatement& p) {
  return json{{"id", p.id},
              {"raw_text", p.raw_text},
              {"activity", p.activity},
              {"item", p.item},
              {"contradiction", p.contradiction},
              {"criteria", encode_strings(p.criteria)},
              {"constraints", encode_strings(p.constraints)},
              {"created_at", p.created_at},
              {"invalidated", p.invalidated}};
}

json encode(const StatusChange& c) {
  return json{{"phase", to_string(c.phase)}, {"decision", to_string(c.decision)}, {"reason", c.reason}, {"by", c.by}};
}

json encode(const Idea& i) {
  return json{{"id", i.id},
              {"title", i.title},
              {"action", i.action},
              {"object", i.object},
              {"context", i.context},
              {"provenance", to_string(i.provenance)},
              {"origin_phase", to_string(i.origin_phase)},
              {"embedding", i.embedding ? encode(*i.embedding) : json()},
              {"status", to_string(i.status)},
              {"status_history", encode_list(i.status_history, [](const auto& c) { return encode(c); })}};
}

json encode(const LiteratureEntry& e) {
  return json{{"id", e.id},
              {"title", e.title},
              {"action", e.action},
              {"object", e.object},
              {"context", e.context},
              {"source_url", e.source_url},
              {"retrieval_mode", to_string(e.retrieval_mode)},
              {"embedding", e.embedding ? encode(*e.embedding) : json()},
              {"invalidated", e.invalidated}};
}

json encode(const Concept& c) {
  return json{{"id", c.id},
              {"idea_id", c.idea_id},
              {"principle", c.principle},
              {"features", c.features},
              {"implementation", c.implementation},
              {"characteristics", c.characteristics},
              {"rendering_ref", c.rendering_ref ? json(*c.rendering_ref) : json()},
              {"invalidated", c.invalidated}};
}

json encode(const ActionObjectPair& p) {
  return json{{"action", p.action},
              {"object", p.object},
              {"feasibility_score", p.feasibility_score},
              {"rationale", p.rationale},
              {"action_index", p.action_index},
              {"object_index", p.object_index},
              {"defaulted", p.defaulted}};
}

json encode(const FeasibilityGrid& g) {
  return json{{"actions", g.actions},
              {"objects", g.objects},
              {"pairs", encode_list(g.pairs, [](const auto& p) { return encode(p); })}};
}

json encode(const Vaults& v) {
  auto all = [](const auto& items) { return encode_list(items, [](const auto& x) { return encode(x); }); };
  return json{{"problem_vault", all(v.problem_vault)},
              {"idea_vault", all(v.idea_vault)},
              {"literature_vault", all(v.literature_vault)},
              {"concept_vault", all(v.concept_vault)}};
}

json encode(const ProviderBinding& b) {
  json out{{"endpoint", b.endpoint},
           {"model", b.model},
           {"max_in_flight", b.max_in_flight},
           {"timeout_ms", b.timeout_ms},
           {"max_retries", b.max_retries}};
  if (b.temperature) out["temperature"] = *b.temperature;
  return out;
}

json encode(const SessionConfig& c) {
  json temps = json::object();
  for (const auto& [role, t] : c.temperatures) temps[std::string(to_string(role))] = t;
  json bindings = json::object();
  for (const auto& [role, b] : c.bindings) bindings[std::string(to_string(role))] = encode(b);
  json gated = json::array();
  for (auto p : c.gated_phases) gated.push_back(to_string(p));
  return json{{"temperatures", temps},
              {"gatekeeper_eps", c.gatekeeper_eps},
              {"gatekeeper_min_pts", c.gatekeeper_min_pts},
              {"challenger_threshold", c.challenger_threshold},
              {"mint_list_size", c.mint_list_size},
              {"scout_top_k", c.scout_top_k},
              {"scout_batched", c.scout_batched},
              {"max_rounds", c.max_rounds},
              {"raw_idea_budget", c.raw_idea_budget ? json(*c.raw_idea_budget) : json()},
              {"max_repair_retries", c.max_repair_retries},
              {"search_limit", c.search_limit},
              {"embed_batch_size", c.embed_batch_size},
              {"gated_phases", gated},
              {"min_survivors_to_diverge", c.min_survivors_to_diverge},
              {"annotate_wall_clock", c.annotate_wall_clock},
              {"bindings", bindings}};
}

// --- Decoding ----------------------------------------------------------------

EmbeddingVector decode_embedding(const Reader& r) {
  EmbeddingVector v;
  v.values = r.at("values").numbers();
  v.model_tag = r.at("model_tag").str();
  return v;
}

ProblemStatement decode_problem(const Reader& r) {
  ProblemStatement p;
  p.id = r.at("id").nonempty_str();
  p.raw_text = r.at("raw_text").str();
  p.activity = r.at("activity").str();
  p.item = r.at("item").str();
  p.contradiction = r.at("contradiction").str();
  p.criteria = r.at("criteria").strings();
  p.constraints = r.at("constraints").strings();
  p.created_at = r.at("created_at").unsigned_integer();
  if (auto inv = r.maybe("invalidated")) p.invalidated = inv->boolean();
  return p;
}

Idea decode_idea(const Reader& r) {
  Idea i;
  i.id = r.at("id").nonempty_str();
  i.title = r.at("title").str();
  i.action = r.at("action").nonempty_str();
  i.object = r.at("object").nonempty_str();
  i.context = r.at("context").nonempty_str();
  i.provenance = decode_provenance(r.at("provenance"));
  i.origin_phase = decode_phase(r.at("origin_phase"));
  if (auto e = r.maybe("embedding")) i.embedding = decode_embedding(*e);
  i.status = decode_status(r.at("status"));
  for (const auto& c : r.at("status_history").items()) {
    StatusChange sc;
    sc.phase = decode_phase(c.at("phase"));
    sc.decision = decode_status(c.at("decision"));
    sc.reason = c.at("reason").str();
    sc.by = c.at("by").str();
    i.status_history.push_back(std::move(sc));
  }
  return i;
}

LiteratureEntry decode_literature(const Reader& r) {
  LiteratureEntry e;
  e.id = r.at("id").nonempty_str();
  e.title = r.at("title").str();
  e.action = r.at("action").nonempty_str();
  e.object = r.at("object").nonempty_str();
  e.context = r.at("context").nonempty_str();
  e.source_url = r.at("source_url").nonempty_str();
  auto mode = r.at("retrieval_mode");
  if (auto m = kRetrievalNames.parse(mode.str())) {
    e.retrieval_mode = *m;
  } else {
    mode.fail("unknown value '" + mode.str() + "'");
  }
  if (auto emb = r.maybe("embedding")) e.embedding = decode_embedding(*emb);
  if (auto inv = r.maybe("invalidated")) e.invalidated = inv->boolean();
  return e;
}

Concept decode_concept(const Reader& r) {
  Concept c;
  c.id = r.at("id").nonempty_str();
  c.idea_id = r.at("idea_id").nonempty_str();
  c.principle = r.at("principle").str();
  c.features = r.at("features").strings();
  c.implementation = r.at("implementation").strings();
  c.characteristics = r.at("characteristics").strings();
  if (auto ref = r.maybe("rendering_ref")) c.rendering_ref = ref->str();
  if (auto inv = r.maybe("invalidated")) c.invalidated = inv->boolean();
  return c;
}

ActionObjectPair decode_pair(const Reader& r) {
  ActionObjectPair p;
  p.action = r.at("action").str();
  p.object = r.at("object").str();
  auto score = r.at("feasibility_score");
  p.feasibility_score = static_cast<int>(score.integer());
  if (p.feasibility_score < 1 || p.feasibility_score > 10) score.fail("must be in [1,10]");
  p.rationale = r.at("rationale").str();
  p.action_index = r.at("action_index").unsigned_integer();
  p.object_index = r.at("object_index").unsigned_integer();
  p.defaulted = r.at("defaulted").boolean();
  return p;
}

FeasibilityGrid decode_grid(const Reader& r) {
  FeasibilityGrid g;
  g.actions = r.at("actions").strings();
  g.objects = r.at("objects").strings();
  for (const auto& p : r.at("pairs").items()) g.pairs.push_back(decode_pair(p));
  return g;
}

Vaults decode_vaults(const Reader& r) {
  Vaults v;
  for (const auto& p : r.at("problem_vault").items()) v.problem_vault.push_back(decode_problem(p));
  for (const auto& i : r.at("idea_vault").items()) v.idea_vault.push_back(decode_idea(i));
  for (const auto& e : r.at("literature_vault").items()) v.literature_vault.push_back(decode_literature(e));
  for (const auto& c : r.at("concept_vault").items()) v.concept_vault.push_back(decode_concept(c));
  return v;
}

ProviderBinding decode_binding(const Reader& r) {
  ProviderBinding b;
  if (auto x = r.maybe("endpoint")) b.endpoint = x->str();
  if (auto x = r.maybe("model")) b.model = x->str();
  if (auto x = r.maybe("temperature")) b.temperature = x->number();
  if (auto x = r.maybe("max_in_flight")) b.max_in_flight = static_cast<int>(x->integer());
  if (auto x = r.maybe("timeout_ms")) b.timeout_ms = static_cast<int>(x->integer());
  if (auto x = r.maybe("max_retries")) b.max_retries = static_cast<int>(x->integer());
  return b;
}

SessionConfig decode_config(const Reader& r) {
  SessionConfig c = default_config();
  if (auto temps = r.maybe("temperatures")) {
    for (const auto& [name, value] : temps->entries()) {
      auto role = kRoleNames.parse(name);
      if (!role) value.fail("unknown provider role");
      c.temperatures[*role] = value.number();
    }
  }
  if (auto x = r.maybe("gatekeeper_eps")) c.gatekeeper_eps = x->number();
  if (auto x = r.maybe("gatekeeper_min_pts")) c.gatekeeper_min_pts = static_cast<int>(x->integer());
  if (auto x = r.maybe("challenger_threshold")) c.challenger_threshold = x->number();
  if (auto x = r.maybe("mint_list_size")) c.mint_list_size = static_cast<int>(x->integer());
  if (auto x = r.maybe("scout_top_k")) c.scout_top_k = static_cast<int>(x->integer());
  if (auto x = r.maybe("scout_batched")) c.scout_batched = x->boolean();
  if (auto x = r.maybe("max_rounds")) c.max_rounds = static_cast<int>(x->integer());
  if (auto x = r.maybe("raw_idea_budget")) c.raw_idea_budget = static_cast<int>(x->integer());
  if (auto x = r.maybe("max_repair_retries")) c.max_repair_retries = static_cast<int>(x->integer());
  if (auto x = r.maybe("search_limit")) c.search_limit = static_cast<int>(x->integer());
  if (auto x = r.maybe("embed_batch_size")) c.embed_batch_size = static_cast<int>(x->integer());
  if (auto x = r.maybe("gated_phases")) {
    c.gated_phases.clear();
    for (const auto& p : x->items()) c.gated_phases.push_back(decode_phase(p));
  }
  if (auto x = r.maybe("min_survivors_to_diverge")) c.min_survivors_to_diverge = static_cast<int>(x->integer());
  if (auto x = r.maybe("annotate_wall_clock")) c.annotate_wall_clock = x->boolean();
  if (auto bindings = r.maybe("bindings")) {
    for (const auto& [name, value] : bindings->entries()) {
      auto role = kRoleNames.parse(name);
      if (!role) value.fail("unknown provider role");
      auto b = decode_binding(value);
      if (b.temperature) c.temperatures[*role] = *b.temperature;
      c.bindings[*role] = b;
    }
  }
  return c;
}

}  // namespace midas
