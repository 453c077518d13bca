#include <gtest/gtest.h>

#include "support.hpp"

using namespace midas;
using namespace midas::testing;

namespace {

Session fresh() { return new_session(kProblemText, small_config(), 11); }

void complete_phase(Session& s) { s.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(s.phase)}}); }

void advance_to(Session& s, Phase to) {
  s.commit(EventKind::PhaseAdvanced, Actor::System, json{{"from", to_string(s.phase)}, {"to", to_string(to)}});
}

void approve_and_advance(Session& s) {
  complete_phase(s);
  if (phase_is_gated(s.config, s.phase)) s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", to_string(s.phase)}});
  advance_to(s, next_phase(s.phase));
}

std::string add_raw(Session& s, const std::string& title) {
  return apply_override(s, AddIdea{title, "Lifts the user", "Seat", "Home", ""});
}

}  // namespace

TEST(Session, NewSessionIsDeterministic) {
  Session a = new_session(kProblemText, small_config(), 5);
  Session b = new_session(kProblemText, small_config(), 5);
  Session c = new_session(kProblemText, small_config(), 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.id, c.id);
  EXPECT_EQ(a.id.rfind("ses-", 0), 0u);
  EXPECT_EQ(a.id.size(), 4u + 16u);
  EXPECT_EQ(a.phase, Phase::Definition);
  EXPECT_EQ(a.round, 1);
  ASSERT_EQ(a.event_log.size(), 1u);
  EXPECT_EQ(a.event_log[0].kind, EventKind::SessionCreated);
  EXPECT_EQ(a.problem_text, kProblemText);
}

TEST(Session, RejectsBlankProblemAndInvalidConfig) {
  EXPECT_THROW(new_session("   ", small_config(), 0), InvalidInput);
  SessionConfig bad = small_config();
  bad.challenger_threshold = 0.0;
  EXPECT_THROW(new_session(kProblemText, bad, 0), InvalidInput);
}

TEST(Session, IdsAreSequentialAndPrefixed) {
  Session s = fresh();
  EXPECT_EQ(s.peek_idea_id(), "idea-000001");
  EXPECT_EQ(s.peek_idea_id(2), "idea-000003");
  EXPECT_EQ(s.peek_literature_id(), "lit-000001");
  EXPECT_EQ(s.peek_concept_id(), "concept-000001");
  EXPECT_EQ(s.peek_problem_id(), "problem-000001");
  EXPECT_EQ(add_raw(s, "First"), "idea-000001");
  EXPECT_EQ(add_raw(s, "Second"), "idea-000002");
  EXPECT_EQ(s.peek_idea_id(), "idea-000003");
}

TEST(Session, RejectedEventLeavesStateUntouched) {
  Session s = fresh();
  Session before = s;
  EXPECT_THROW(advance_to(s, Phase::Generation), PhaseError);
  EXPECT_EQ(s, before);
  EXPECT_THROW(s.commit(EventKind::IdeaStatusChanged, Actor::System,
                        json{{"idea_id", "idea-000404"}, {"status", "Shortlisted"}, {"reason", "x"}, {"by", "gatekeeper"}}),
               NotFound);
  EXPECT_EQ(s, before);
}

TEST(Session, GatedPhaseNeedsApproval) {
  Session s = fresh();
  complete_phase(s);
  EXPECT_THROW(advance_to(s, Phase::Generation), GateError);
  s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", "Definition"}});
  advance_to(s, Phase::Generation);
  EXPECT_EQ(s.phase, Phase::Generation);
  EXPECT_FALSE(s.gate_approved);
  EXPECT_EQ(s.phase_state, PhaseState::Ready);
}

TEST(Session, ApprovalBeforeCompletionIsRejected) {
  Session s = fresh();
  EXPECT_THROW(s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", "Definition"}}), GateError);
}

TEST(Session, PhasesAdvanceOnlyInOrder) {
  Session s = fresh();
  complete_phase(s);
  s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", "Definition"}});
  EXPECT_THROW(advance_to(s, Phase::Assessment), PhaseError);
}

TEST(Session, LoopBackIncrementsRound) {
  Session s = fresh();
  approve_and_advance(s);
  approve_and_advance(s);
  ASSERT_EQ(s.phase, Phase::Assessment);
  s.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", "Assessment"}, {"loop_back", true}});
  EXPECT_TRUE(s.loop_pending);
  EXPECT_THROW(advance_to(s, Phase::Divergence), PhaseError);
  advance_to(s, Phase::Generation);
  EXPECT_EQ(s.round, 2);
  EXPECT_EQ(s.phase, Phase::Generation);
}

TEST(Session, LoopWithoutPendingRoundIsRejected) {
  Session s = fresh();
  approve_and_advance(s);
  approve_and_advance(s);
  complete_phase(s);
  EXPECT_THROW(advance_to(s, Phase::Generation), PhaseError);
}

TEST(Session, StatusTransitionsAreForwardOnly) {
  Session s = fresh();
  std::string id = add_raw(s, "Idea");
  auto change = [&](const std::string& status, Actor actor = Actor::System) {
    s.commit(EventKind::IdeaStatusChanged, actor,
             json{{"idea_id", id}, {"status", status}, {"reason", "t"}, {"by", "gatekeeper"}});
  };
  EXPECT_THROW(change("GloballyNovel"), InvalidInput);
  change("Shortlisted");
  EXPECT_THROW(change("Raw"), InvalidInput);
  change("GloballyNovel");
  change("Curated");
  EXPECT_THROW(change("Shortlisted"), InvalidInput);
  change("Removed");
  EXPECT_THROW(change("Removed"), InvalidInput);
  EXPECT_EQ(s.vaults.find_idea(id)->status_history.size(), 5u);
}

TEST(Session, OverrideRemoveAndRestoreRoundTrip) {
  Session s = fresh();
  std::string id = add_raw(s, "Idea");
  s.commit(EventKind::IdeaStatusChanged, Actor::System,
           json{{"idea_id", id}, {"status", "Shortlisted"}, {"reason", "t"}, {"by", "gatekeeper"}});
  apply_override(s, RemoveIdea{id, "not useful"});
  EXPECT_EQ(s.vaults.find_idea(id)->status, IdeaStatus::Removed);
  EXPECT_THROW(apply_override(s, RemoveIdea{id, ""}), InvalidInput);
  apply_override(s, RestoreIdea{id, ""});
  EXPECT_EQ(s.vaults.find_idea(id)->status, IdeaStatus::Shortlisted);
  EXPECT_THROW(apply_override(s, RestoreIdea{id, ""}), InvalidInput);
  EXPECT_THROW(apply_override(s, RemoveIdea{"idea-000999", ""}), NotFound);
  const auto& hist = s.vaults.find_idea(id)->status_history;
  EXPECT_EQ(hist.back().by, "human");
}

TEST(Session, OnlyHumansRestore) {
  Session s = fresh();
  std::string id = add_raw(s, "Idea");
  apply_override(s, RemoveIdea{id, ""});
  EXPECT_THROW(s.commit(EventKind::IdeaStatusChanged, Actor::System,
                        json{{"idea_id", id}, {"status", "Raw"}, {"restore", true}, {"reason", "r"}, {"by", "x"}}),
               InvalidInput);
}

TEST(Session, OverrideEntryStatusFollowsPhase) {
  Session s = fresh();
  EXPECT_EQ(override_entry_status(s), IdeaStatus::Raw);
  approve_and_advance(s);
  approve_and_advance(s);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::Raw);
  complete_phase(s);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::GloballyNovel);
  s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", "Assessment"}});
  advance_to(s, Phase::Divergence);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::GloballyNovel);
  approve_and_advance(s);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::GloballyNovel);
  complete_phase(s);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::Curated);
  s.commit(EventKind::GateApproved, Actor::Human, json{{"phase", "Refinement"}});
  advance_to(s, Phase::Conceptualization);
  EXPECT_EQ(override_entry_status(s), IdeaStatus::Curated);
  std::string id = add_raw(s, "Late idea");
  EXPECT_EQ(s.vaults.find_idea(id)->status, IdeaStatus::Curated);
  EXPECT_EQ(s.vaults.find_idea(id)->provenance, Provenance::Human);
  approve_and_advance(s);
  EXPECT_EQ(s.phase, Phase::Done);
  EXPECT_THROW(add_raw(s, "Too late"), PhaseError);
}

TEST(Session, ProblemRevisionOnlyDuringDefinition) {
  Session s = fresh();
  s.commit(EventKind::ProblemRevised, Actor::Human, json{{"problem_text", "Revised"}});
  EXPECT_EQ(s.problem_text, "Revised");
  approve_and_advance(s);
  EXPECT_THROW(s.commit(EventKind::ProblemRevised, Actor::Human, json{{"problem_text", "Late"}}), PhaseError);
}

TEST(Session, EmbeddingModelIsFixedByFirstVector) {
  Session s = fresh();
  std::string a = add_raw(s, "A");
  std::string b = add_raw(s, "B");
  s.commit(EventKind::IdeaEmbedded, Actor::System, json{{"idea_id", a}, {"embedding", encode(EmbeddingVector{{0.6, 0.8}, "m1"})}});
  EXPECT_EQ(s.embedding_model, "m1");
  EXPECT_EQ(s.embedding_dimension, 2u);
  EXPECT_THROW(s.commit(EventKind::IdeaEmbedded, Actor::System,
                        json{{"idea_id", b}, {"embedding", encode(EmbeddingVector{{0.6, 0.8}, "m2"})}}),
               ConfigError);
  EXPECT_THROW(s.commit(EventKind::IdeaEmbedded, Actor::System,
                        json{{"idea_id", b}, {"embedding", encode(EmbeddingVector{{1.0, 0.0, 0.0}, "m1"})}}),
               ConfigError);
  EXPECT_THROW(s.commit(EventKind::IdeaEmbedded, Actor::System,
                        json{{"idea_id", b}, {"embedding", encode(EmbeddingVector{{1.0, 1.0}, "m1"})}}),
               InvalidInput);
}

TEST(Session, RerunTargetMustBeEnteredAndNotAhead) {
  Session s = fresh();
  EXPECT_THROW(s.commit(EventKind::RerunStarted, Actor::Human, json{{"target", "Generation"}}), PhaseError);
  approve_and_advance(s);
  EXPECT_THROW(s.commit(EventKind::RerunStarted, Actor::Human, json{{"target", "Assessment"}}), PhaseError);
  EXPECT_THROW(s.commit(EventKind::RerunStarted, Actor::Human,
                        json{{"target", "Generation"}, {"snapshot_event", 0}}),
               DecodeError);
}

TEST(Session, RerunInvalidatesLaterIdeas) {
  Session s = fresh();
  std::string early = add_raw(s, "Early");
  approve_and_advance(s);
  std::uint64_t entry = s.phase_entry_event.at(Phase::Generation);
  std::string late = add_raw(s, "Late");
  s.commit(EventKind::IdeaStatusChanged, Actor::System,
           json{{"idea_id", early}, {"status", "Shortlisted"}, {"reason", "t"}, {"by", "gatekeeper"}});
  s.commit(EventKind::RerunStarted, Actor::Human, json{{"target", "Generation"}, {"snapshot_event", entry}});
  EXPECT_EQ(s.phase, Phase::Generation);
  EXPECT_EQ(s.phase_state, PhaseState::Ready);
  EXPECT_EQ(s.vaults.find_idea(late)->status, IdeaStatus::Removed);
  EXPECT_EQ(s.vaults.find_idea(late)->status_history.back().by, "rerun");
  EXPECT_EQ(s.vaults.find_idea(early)->status, IdeaStatus::Raw);
  EXPECT_EQ(s.vaults.idea_vault.size(), 2u);
  EXPECT_EQ(s.peek_idea_id(), "idea-000003");
}

TEST(Session, PendingIdeasQueueAndClear) {
  Session s = fresh();
  Professor::submit_idea(s, "one");
  Professor::submit_idea(s, "two");
  EXPECT_EQ(s.pending_human_ideas.size(), 2u);
  s.commit(EventKind::PendingIdeasCleared, Actor::System, json{{"count", 1}});
  EXPECT_EQ(s.pending_human_ideas, std::vector<std::string>{"two"});
  EXPECT_THROW(s.commit(EventKind::PendingIdeasCleared, Actor::System, json{{"count", 5}}), InvalidInput);
}

TEST(Session, DecodeOverride) {
  json add = {{"type", "AddIdea"}, {"idea", {{"title", "t"}, {"action", "a"}, {"object", "o"}, {"context", "c"}}}};
  EXPECT_TRUE(std::holds_alternative<AddIdea>(decode_override(Reader(add))));
  json rm = {{"type", "RemoveIdea"}, {"idea_id", "idea-000001"}, {"reason", "r"}};
  auto o = decode_override(Reader(rm));
  ASSERT_TRUE(std::holds_alternative<RemoveIdea>(o));
  EXPECT_EQ(std::get<RemoveIdea>(o).reason, "r");
  json bad = {{"type", "Nope"}};
  try {
    decode_override(Reader(bad));
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "$.type");
  }
}

TEST(Session, EventCodecRoundTrip) {
  SessionEvent e;
  e.index = 4;
  e.kind = EventKind::AgentCompleted;
  e.actor = Actor::Human;
  e.phase = Phase::Refinement;
  e.payload = json{{"agent", "sentinel"}};
  e.wall_clock = "2026-01-01T00:00:00Z";
  EXPECT_EQ(decode_event(Reader(encode(e))), e);
}

// Property: for full simulated sessions with overrides and reruns, replaying
// the event log reproduces the live state exactly.
TEST(SessionProperty, ReplayReproducesState) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto run = simulated_run(seed);
    auto& s = run.session;
    run.professor->run_until_gate(s);
    run.professor->advance(s, HumanApproval{"ok"});
    run.professor->run_until_gate(s);
    if (seed % 3 == 0 && !s.live_ideas().empty()) apply_override(s, RemoveIdea{s.live_ideas().front().id, "prop"});
    if (seed % 4 == 0) run.professor->rerun_from(s, Phase::Generation);
    run.professor->run_to_completion(s);
    Session back = replay(s.event_log);
    ASSERT_EQ(back, s) << "seed " << seed;
    ASSERT_EQ(encode(back), encode(s)) << "seed " << seed;
  }
}

TEST(SessionProperty, EventIndicesAreContiguous) {
  auto run = simulated_run(3);
  run.professor->run_to_completion(run.session);
  for (std::size_t i = 0; i < run.session.event_log.size(); ++i) EXPECT_EQ(run.session.event_log[i].index, i);
  auto events = run.session.event_log;
  events.erase(events.begin() + 3);
  EXPECT_THROW(replay(events), InvalidInput);
}
