#pragma once

// Event-sourced session state. Every mutation goes through Session::commit,
// which appends one SessionEvent and folds it into the snapshot with the same
// reducer that replay() uses, so replaying the log reproduces the state.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "midas/model.hpp"

namespace midas {

enum class EventKind {
  SessionCreated,
  ProblemRevised,
  ProblemStructured,
  HumanIdeaSubmitted,
  PendingIdeasCleared,
  IdeaAdded,
  IdeaEmbedded,
  IdeaStatusChanged,
  IdeaPolished,
  LiteratureAdded,
  LiteratureEmbedded,
  MintExtracted,
  FeasibilityScored,
  ConceptAdded,
  ConceptRendered,
  PhaseStarted,
  AgentReasoning,
  AgentCompleted,
  AgentWarning,
  PhaseCompleted,
  GateWaiting,
  GateApproved,
  PhaseAdvanced,
  PhaseFailed,
  RerunStarted,
  SchemaMigrated,
  SessionDone,
};

std::string_view to_string(EventKind k);
EventKind decode_event_kind(const Reader& r);

struct SessionEvent {
  std::uint64_t index = 0;  // logical timestamp
  EventKind kind = EventKind::SessionCreated;
  Actor actor = Actor::System;
  Phase phase = Phase::Definition;  // phase current when the event was committed
  json payload = json::object();
  std::optional<std::string> wall_clock;  // annotation only

  bool operator==(const SessionEvent&) const = default;
};

json encode(const SessionEvent& e);
SessionEvent decode_event(const Reader& r);

enum class PhaseState { Ready, Completed, Failed };
std::string_view to_string(PhaseState s);

struct MintLists {
  std::vector<std::string> actions;
  std::vector<std::string> objects;

  bool operator==(const MintLists&) const = default;
};

struct RoleUsage {
  std::uint64_t calls = 0;
  std::uint64_t tokens = 0;

  bool operator==(const RoleUsage&) const = default;
};

struct Session {
  std::string id;
  Phase phase = Phase::Definition;
  Vaults vaults;
  SessionConfig config;
  std::vector<SessionEvent> event_log;
  std::uint64_t seed = 0;

  // Derived by the reducer, serialized for inspection.
  std::string problem_text;
  PhaseState phase_state = PhaseState::Ready;
  int round = 1;              // CG/CA round, starts at 1
  bool loop_pending = false;  // Assessment asked for another Generation round
  bool gate_approved = false;
  std::vector<std::string> pending_human_ideas;
  std::optional<MintLists> mint_lists;
  std::optional<FeasibilityGrid> feasibility;
  std::optional<std::string> embedding_model;  // model_tag shared by all vectors
  std::optional<std::size_t> embedding_dimension;
  std::map<Phase, std::uint64_t> phase_entry_event;
  std::map<std::string, RoleUsage> usage;
  std::uint64_t next_problem = 1;
  std::uint64_t next_idea = 1;
  std::uint64_t next_literature = 1;
  std::uint64_t next_concept = 1;

  bool operator==(const Session&) const = default;

  // Appends one event and applies it. Throws (leaving the session untouched)
  // when the reducer rejects the event.
  const SessionEvent& commit(EventKind kind, Actor actor, json payload);

  // Fresh identifiers. They are not reserved until the event carrying them
  // is committed.
  std::string peek_problem_id() const;
  std::string peek_idea_id(std::uint64_t offset = 0) const;
  std::string peek_literature_id(std::uint64_t offset = 0) const;
  std::string peek_concept_id(std::uint64_t offset = 0) const;

  std::vector<Idea> live_ideas() const;  // everything not Removed
  const ProblemStatement& problem() const;  // throws PhaseError when unstructured
};

// Folds one event into the state; `s.event_log` already ends with `e`.
void apply_event(Session& s, const SessionEvent& e);

Session replay(std::span<const SessionEvent> events);

json encode(const Session& s);
Session decode_session(const Reader& r);

// --- Core operations ---------------------------------------------------------

Session new_session(const std::string& problem_text, const SessionConfig& config, std::uint64_t seed);

struct AddIdea {
  std::string title;
  std::string action;
  std::string object;
  std::string context;
  std::string reason;
};

struct RemoveIdea {
  std::string idea_id;
  std::string reason;
};

struct RestoreIdea {
  std::string idea_id;
  std::string reason;
};

using Override = std::variant<AddIdea, RemoveIdea, RestoreIdea>;

Override decode_override(const Reader& r);

// Applies a human override. Returns the affected idea id.
std::string apply_override(Session& s, const Override& o);

// Status a human-added idea enters with: the input pool of the next filter
// stage still to run.
IdeaStatus override_entry_status(const Session& s);

bool phase_is_gated(const SessionConfig& config, Phase p);

}  // namespace midas
