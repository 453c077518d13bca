#pragma once

// The twelve agents as pure functions over providers and vault snapshots.
// They return drafts and verdicts; the orchestrator assigns ids and commits.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "midas/clustering.hpp"
#include "midas/providers.hpp"
#include "midas/session.hpp"

namespace midas {

// --- Structured output -------------------------------------------------------

using SemanticCheck = std::function<std::optional<std::string>(const json&)>;

struct StructuredResult {
  json value;
  std::string raw;
  int repairs = 0;
  // Set when the last schema-valid reply was accepted despite failing the
  // semantic check (only with accept_last_valid).
  std::optional<std::string> accepted_with;
};

// Extracts a JSON document from a reply, tolerating code fences and prose
// around the object. Throws DecodeError.
json parse_reply(const std::string& text);

// Renders `template_name` with vars plus {schema}, calls the provider, and
// repairs up to config.max_repair_retries times by quoting the validation
// error. Throws StructuredOutputError carrying the last raw reply.
StructuredResult structured_call(ProviderHub& hub, ProviderRole role, std::string_view template_name,
                                 std::string_view schema_name, json vars, const SemanticCheck& check = {},
                                 bool accept_last_valid = false);

json problem_vars(const ProblemStatement& p);

// --- Drafts ------------------------------------------------------------------

struct IdeaDraft {
  std::string title;
  std::string action;
  std::string object;
  std::string context;
  Provenance provenance = Provenance::Human;

  bool operator==(const IdeaDraft&) const = default;
};

IdeaDraft decode_draft(const Reader& r, Provenance provenance);

// --- Phase 1 -------------------------------------------------------------------

ProblemStatement scribe_structure(const std::string& raw_problem, ProviderHub& hub);

// --- Phase 2 -------------------------------------------------------------------

IdeaDraft muse_structure(const std::string& raw_idea, const ProblemStatement& problem, ProviderHub& hub);

struct ForgeBatch {
  std::vector<IdeaDraft> formulator;
  std::vector<IdeaDraft> explorer;
};

inline constexpr int kForgeIdeasPerAgent = 5;

// Both sub-agents run concurrently; either failing fails the batch.
ForgeBatch forge_generate(const ProblemStatement& problem, ProviderHub& hub, const std::vector<Idea>& prior_survivors,
                          int round, int formulator_count = kForgeIdeasPerAgent,
                          int explorer_count = kForgeIdeasPerAgent);

// --- Phase 3 -------------------------------------------------------------------

struct GatekeeperDecision {
  std::string idea_id;
  IdeaStatus status = IdeaStatus::Shortlisted;
  std::string reason;
};

struct GatekeeperResult {
  std::vector<GatekeeperDecision> decisions;  // only ideas whose status changes
  std::vector<std::string> shortlisted;       // Raw ideas promoted this pass
  std::vector<std::string> inputs;
  ClusterAssignment assignment;
  std::vector<std::string> warnings;
};

// `pool` is every live Raw or Shortlisted idea, embedded. Clusters that
// already hold a Shortlisted idea keep it and drop their Raw members; any
// other cluster keeps its medoid. Provenance is never read.
GatekeeperResult gatekeeper_filter(const std::vector<Idea>& pool, double eps, int min_pts);
GatekeeperResult gatekeeper_filter(const Session& session);

struct LibrarianResult {
  std::vector<LiteratureEntry> entries;  // ids left empty
  std::vector<std::string> warnings;
  bool searched = false;
};

std::string librarian_query(const ProblemStatement& problem);

LibrarianResult librarian_gather(const ProblemStatement& problem, ProviderHub& hub,
                                 const std::vector<LiteratureEntry>& manual_entries, bool search = true);

struct ChallengerRejection {
  std::string idea_id;
  std::string literature_id;
  double similarity = 0.0;
};

struct ChallengerResult {
  std::vector<std::string> survivors;
  std::vector<ChallengerRejection> rejected;
  std::vector<std::string> inputs;
  std::vector<std::string> warnings;
};

ChallengerResult challenger_filter(const std::vector<Idea>& shortlisted, const std::vector<LiteratureEntry>& literature,
                                   double threshold);
ChallengerResult challenger_filter(const Session& session);

// --- Phase 4 -------------------------------------------------------------------

struct MintResult {
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::vector<std::string> warnings;
};

MintResult mint_extract(const std::vector<Idea>& ideas, ProviderHub& hub, int list_size);

struct ScoutResult {
  FeasibilityGrid grid;
  std::vector<std::string> warnings;
};

// Parses 7, 7.0, "7" or "7/10"; nullopt outside 1..10.
std::optional<int> parse_score(const json& value);

ScoutResult scout_score(const std::vector<std::string>& actions, const std::vector<std::string>& objects,
                        const ProblemStatement& problem, ProviderHub& hub, bool batched = true);

// Sorted copy: descending score, ties by (action index, object index).
std::vector<ActionObjectPair> sort_pairs(std::vector<ActionObjectPair> pairs);

// --- Phase 5 -------------------------------------------------------------------

struct NavigatorResult {
  std::vector<IdeaDraft> drafts;
  std::vector<EmbeddingVector> embeddings;
  std::vector<bool> keep;  // survived the internal novelty pass
  ClusterAssignment assignment;
  std::vector<std::string> warnings;
};

NavigatorResult navigator_rehydrate(const std::vector<ActionObjectPair>& top_pairs, const ProblemStatement& problem,
                                    ProviderHub& hub, double eps, int min_pts);

enum class Verdict { Keep, Polish, Remove };
std::string_view to_string(Verdict v);

struct SentinelVerdict {
  std::string idea_id;
  Verdict verdict = Verdict::Keep;
  std::string rationale;
  std::optional<std::string> context;  // polish only
};

struct SentinelResult {
  std::vector<SentinelVerdict> verdicts;  // one per candidate, candidate order
  std::vector<std::string> warnings;
};

SentinelResult sentinel_curate(const std::vector<Idea>& candidates, const ProblemStatement& problem, ProviderHub& hub);

// --- Phase 6 -------------------------------------------------------------------

Concept director_conceptualize(const Idea& idea, const ProblemStatement& problem, ProviderHub& hub);

std::string leo_render_prompt(const Concept& c);

}  // namespace midas
