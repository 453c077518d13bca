#pragma once

// Domain types shared by every agent: the AI3C problem, AOC idea, PFIC
// concept, literature entries, the four vaults and the session config.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "midas/json_util.hpp"

namespace midas {

enum class Phase { Definition, Generation, Assessment, Divergence, Refinement, Conceptualization, Done };

enum class Provenance { Human, AIFormulator, AIExplorer, NavigatorSynthesized };

enum class IdeaStatus { Raw, Shortlisted, GloballyNovel, Curated, Removed };

enum class RetrievalMode { Search, Manual };

enum class Actor { System, Human };

// Fine-grained provider roles. Forge is split into its two sub-agents because
// they run at different temperatures.
enum class ProviderRole {
  Scribe,
  Muse,
  ForgeFormulator,
  ForgeExplorer,
  Librarian,
  Mint,
  Scout,
  Navigator,
  Sentinel,
  Director,
  Leo,
  Embedding,
  Search,
};

// The twelve agents, plus the orchestrator for its own events.
enum class AgentKind {
  Scribe,
  Muse,
  Forge,
  Gatekeeper,
  Librarian,
  Challenger,
  Mint,
  Scout,
  Navigator,
  Sentinel,
  Director,
  Leo,
  Professor,
};

std::string_view to_string(Phase p);
std::string_view to_string(Provenance p);
std::string_view to_string(IdeaStatus s);
std::string_view to_string(RetrievalMode m);
std::string_view to_string(Actor a);
std::string_view to_string(ProviderRole r);
std::string_view to_string(AgentKind a);

std::optional<Phase> parse_phase(std::string_view text);
std::optional<ProviderRole> parse_provider_role(std::string_view text);
std::optional<AgentKind> parse_agent_kind(std::string_view text);

Phase decode_phase(const Reader& r);
Provenance decode_provenance(const Reader& r);
IdeaStatus decode_status(const Reader& r);
ProviderRole decode_provider_role(const Reader& r);
AgentKind decode_agent_kind(const Reader& r);
Actor decode_actor(const Reader& r);

// Next phase in the forward order; Done maps to Done.
Phase next_phase(Phase p);
int phase_index(Phase p);

inline constexpr ProviderRole kAllProviderRoles[] = {
    ProviderRole::Scribe,   ProviderRole::Muse,      ProviderRole::ForgeFormulator, ProviderRole::ForgeExplorer,
    ProviderRole::Librarian, ProviderRole::Mint,     ProviderRole::Scout,           ProviderRole::Navigator,
    ProviderRole::Sentinel, ProviderRole::Director,  ProviderRole::Leo,             ProviderRole::Embedding,
    ProviderRole::Search,
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_tag;

  bool operator==(const EmbeddingVector&) const = default;
};

struct ProblemStatement {
  std::string id;
  std::string raw_text;
  std::string activity;
  std::string item;
  std::string contradiction;
  std::vector<std::string> criteria;
  std::vector<std::string> constraints;
  std::uint64_t created_at = 0;  // logical: index of the creating event
  bool invalidated = false;

  bool operator==(const ProblemStatement&) const = default;
};

struct StatusChange {
  Phase phase = Phase::Definition;
  IdeaStatus decision = IdeaStatus::Raw;
  std::string reason;
  std::string by;  // agent name, "human", or "rerun"

  bool operator==(const StatusChange&) const = default;
};

struct Idea {
  std::string id;
  std::string title;
  std::string action;
  std::string object;
  std::string context;
  Provenance provenance = Provenance::Human;
  Phase origin_phase = Phase::Generation;
  std::optional<EmbeddingVector> embedding;
  IdeaStatus status = IdeaStatus::Raw;
  std::vector<StatusChange> status_history;

  bool operator==(const Idea&) const = default;
};

struct LiteratureEntry {
  std::string id;
  std::string title;
  std::string action;
  std::string object;
  std::string context;
  std::string source_url;
  RetrievalMode retrieval_mode = RetrievalMode::Search;
  std::optional<EmbeddingVector> embedding;
  bool invalidated = false;

  bool operator==(const LiteratureEntry&) const = default;
};

struct Concept {
  std::string id;
  std::string idea_id;
  std::string principle;
  std::vector<std::string> features;
  std::vector<std::string> implementation;
  std::vector<std::string> characteristics;
  std::optional<std::string> rendering_ref;
  bool invalidated = false;

  bool operator==(const Concept&) const = default;
};

struct ActionObjectPair {
  std::string action;
  std::string object;
  int feasibility_score = 1;
  std::string rationale;
  std::size_t action_index = 0;
  std::size_t object_index = 0;
  bool defaulted = false;  // score could not be parsed and fell back to 1

  bool operator==(const ActionObjectPair&) const = default;
};

struct FeasibilityGrid {
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::vector<ActionObjectPair> pairs;

  bool operator==(const FeasibilityGrid&) const = default;
};

struct Vaults {
  std::vector<ProblemStatement> problem_vault;
  std::vector<Idea> idea_vault;
  std::vector<LiteratureEntry> literature_vault;
  std::vector<Concept> concept_vault;

  bool operator==(const Vaults&) const = default;

  const Idea* find_idea(std::string_view id) const;
  Idea* find_idea(std::string_view id);
  const LiteratureEntry* find_literature(std::string_view id) const;
  Concept* find_concept(std::string_view id);
  const ProblemStatement* current_problem() const;

  std::vector<Idea> ideas_with_status(IdeaStatus status) const;
  std::vector<LiteratureEntry> live_literature() const;
  std::vector<Concept> live_concepts() const;
};

struct ProviderBinding {
  std::string endpoint;
  std::string model;
  std::optional<double> temperature;  // folded into SessionConfig::temperatures
  int max_in_flight = 4;
  int timeout_ms = 60000;
  int max_retries = 3;

  bool operator==(const ProviderBinding&) const = default;
};

struct SessionConfig {
  std::map<ProviderRole, double> temperatures;
  double gatekeeper_eps = 0.3;  // cosine distance
  int gatekeeper_min_pts = 2;   // counts the point itself
  double challenger_threshold = 0.85;
  int mint_list_size = 20;
  int scout_top_k = 15;
  bool scout_batched = true;
  int max_rounds = 5;
  std::optional<int> raw_idea_budget;  // total Forge ideas across CG/CA rounds
  int max_repair_retries = 2;
  int search_limit = 10;
  int embed_batch_size = 32;
  std::vector<Phase> gated_phases = {Phase::Definition, Phase::Assessment, Phase::Refinement};
  int min_survivors_to_diverge = 0;
  bool annotate_wall_clock = false;
  std::map<ProviderRole, ProviderBinding> bindings;

  bool operator==(const SessionConfig&) const = default;

  double temperature(ProviderRole role) const;
  const ProviderBinding& binding(ProviderRole role) const;
};

// Defaults: lower temperature for reasoning roles, 1.0 for the Explorer,
// 0.2 for search-grounded work; one binding per role.
SessionConfig default_config();

// Throws InvalidInput naming the first out-of-range field.
void validate(const SessionConfig& config);

// Invariant checks; each throws InvalidInput.
void validate(const ProblemStatement& p);
void validate_aoc(std::string_view title, std::string_view action, std::string_view object, std::string_view context);
void validate(const LiteratureEntry& e);
void validate(const Concept& c);
void validate_unit_norm(const EmbeddingVector& v);

json encode(const EmbeddingVector& v);
json encode(const ProblemStatement& p);
json encode(const StatusChange& c);
json encode(const Idea& i);
json encode(const LiteratureEntry& e);
json encode(const Concept& c);
json encode(const ActionObjectPair& p);
json encode(const FeasibilityGrid& g);
json encode(const Vaults& v);
json encode(const ProviderBinding& b);
json encode(const SessionConfig& c);

EmbeddingVector decode_embedding(const Reader& r);
ProblemStatement decode_problem(const Reader& r);
Idea decode_idea(const Reader& r);
LiteratureEntry decode_literature(const Reader& r);
Concept decode_concept(const Reader& r);
ActionObjectPair decode_pair(const Reader& r);
FeasibilityGrid decode_grid(const Reader& r);
Vaults decode_vaults(const Reader& r);
ProviderBinding decode_binding(const Reader& r);
// Missing fields take their default_config() value.
SessionConfig decode_config(const Reader& r);

}  // namespace midas
