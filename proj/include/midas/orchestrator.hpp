#pragma once

// The Professor: runs each phase's agent steps against a ProviderHub and
// commits their results, enforces gates, and handles reruns.
//
// Phase plan
//   Definition         Scribe                                   gate
//   Generation         Muse (pending human ideas), Forge
//   Assessment         Gatekeeper; then loop back to Generation, or
//                      Librarian + Challenger on the final round   gate
//   Divergence         Mint, Scout
//   Refinement         Navigator, Sentinel                       gate
//   Conceptualization  Director, Leo

#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "midas/agents.hpp"
#include "midas/providers.hpp"
#include "midas/session.hpp"

namespace midas {

struct ImageArtifact {
  std::string ref;
  std::string media_type;
  std::string bytes;
  std::string prompt;
};

// Content-addressed in-memory image store; persistence flushes it to disk.
class ArtifactStore {
 public:
  std::string put(const ImageResult& image, const std::string& prompt);
  void insert(ImageArtifact artifact);
  std::optional<ImageArtifact> get(const std::string& ref) const;
  std::map<std::string, ImageArtifact> all() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, ImageArtifact> items_;
};

struct HumanApproval {
  std::string note;
  Actor actor = Actor::Human;
};

// Agent owning each phase, for count aggregation.
Phase phase_of(AgentKind agent);

class Professor {
 public:
  explicit Professor(ProviderHub& hub, ArtifactStore* artifacts = nullptr) : hub_(hub), artifacts_(artifacts) {}

  // Executes the current phase on a working copy. On success the copy
  // replaces `session`; on failure `session` only gains phase_started and
  // phase_failed events and the error is rethrown.
  void run_phase(Session& session);

  // Moves to the next phase (or back to Generation for a pending CG/CA
  // round). Gated phases need an approval unless one was already recorded.
  void advance(Session& session, const std::optional<HumanApproval>& approval = std::nullopt);

  void rerun_from(Session& session, Phase target, Actor actor = Actor::Human);

  // Headless mode: every gate is approved by the system.
  void run_to_completion(Session& session);

  // Runs and advances until a gate needs a human or the session is Done.
  void run_until_gate(Session& session);

  static void submit_idea(Session& session, const std::string& text);
  static std::string add_literature(Session& session, LiteratureEntry entry);
  static void revise_problem(Session& session, const std::string& text);

 private:
  void definition(Session& s);
  void generation(Session& s);
  void assessment(Session& s);
  void divergence(Session& s);
  void refinement(Session& s);
  void conceptualization(Session& s);

  void embed_pending_ideas(Session& s, const std::vector<IdeaStatus>& statuses);
  void embed_pending_literature(Session& s);

  void reason(Session& s, AgentKind agent, const std::string& note);
  void warn(Session& s, AgentKind agent, const std::vector<std::string>& warnings);
  void complete(Session& s, AgentKind agent, std::size_t output_count, const std::vector<std::string>& inputs,
                const std::vector<std::string>& outputs, const std::map<std::string, RoleUsage>& before,
                json extra = json::object());

  ProviderHub& hub_;
  ArtifactStore* artifacts_;
};

// Forge ideas that have not been invalidated by a rerun.
std::size_t forge_total(const Session& s);

}  // namespace midas
