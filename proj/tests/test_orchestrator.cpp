#include <gtest/gtest.h>

#include "support.hpp"

using namespace midas;
using namespace midas::testing;

namespace {

std::vector<const SessionEvent*> events_of(const Session& s, EventKind kind) {
  std::vector<const SessionEvent*> out;
  for (const auto& e : s.event_log) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

std::vector<const SessionEvent*> completions(const Session& s, const std::string& agent) {
  std::vector<const SessionEvent*> out;
  for (const auto* e : events_of(s, EventKind::AgentCompleted)) {
    if (e->payload.at("agent") == agent) out.push_back(e);
  }
  return out;
}

Transports faulty(std::uint64_t seed, FaultInjector::Rule rule) {
  Transports t = simulated_transports(seed);
  t.chat = std::make_shared<FaultInjector>(t.chat, std::move(rule));
  return t;
}

SessionConfig random_config(std::mt19937_64& rng) {
  SessionConfig c = small_config();
  c.raw_idea_budget = 10 + static_cast<int>(rng() % 30);
  c.max_rounds = 1 + static_cast<int>(rng() % 4);
  c.gatekeeper_eps = 0.1 + 0.1 * static_cast<double>(rng() % 5);
  c.gatekeeper_min_pts = 1 + static_cast<int>(rng() % 3);
  c.challenger_threshold = 0.3 + 0.1 * static_cast<double>(rng() % 6);
  c.mint_list_size = 2 + static_cast<int>(rng() % 5);
  c.scout_top_k = 1 + static_cast<int>(rng() % 8);
  c.scout_batched = rng() % 2 == 0;
  return c;
}

}  // namespace

TEST(Professor, HeadlessRunReachesDone) {
  auto r = simulated_run(1);
  r.professor->run_to_completion(r.session);
  EXPECT_EQ(r.session.phase, Phase::Done);
  EXPECT_EQ(events_of(r.session, EventKind::SessionDone).size(), 1u);
  auto curated = r.session.vaults.ideas_with_status(IdeaStatus::Curated);
  EXPECT_EQ(r.session.vaults.live_concepts().size(), curated.size());
  for (const auto& c : r.session.vaults.live_concepts()) {
    ASSERT_TRUE(c.rendering_ref.has_value());
    EXPECT_TRUE(r.artifacts->get(*c.rendering_ref).has_value());
  }
  EXPECT_EQ(replay(r.session.event_log), r.session);
}

TEST(Professor, GatesStopUntilApproved) {
  auto r = simulated_run(2);
  r.professor->run_until_gate(r.session);
  EXPECT_EQ(r.session.phase, Phase::Definition);
  EXPECT_EQ(r.session.phase_state, PhaseState::Completed);
  EXPECT_EQ(events_of(r.session, EventKind::GateWaiting).size(), 1u);
  EXPECT_THROW(r.professor->advance(r.session), GateError);
  r.professor->advance(r.session, HumanApproval{"looks right"});
  EXPECT_EQ(r.session.phase, Phase::Generation);
  auto approvals = events_of(r.session, EventKind::GateApproved);
  ASSERT_EQ(approvals.size(), 1u);
  EXPECT_EQ(approvals[0]->actor, Actor::Human);
  EXPECT_EQ(approvals[0]->payload.at("note"), "looks right");

  r.professor->run_until_gate(r.session);
  EXPECT_EQ(r.session.phase, Phase::Assessment);
  EXPECT_FALSE(r.session.loop_pending);
  EXPECT_THROW(r.professor->run_phase(r.session), PhaseError);
}

TEST(Professor, UngatedConfigRunsStraightThrough) {
  SessionConfig c = small_config();
  c.gated_phases.clear();
  auto r = simulated_run(3, c);
  r.professor->run_until_gate(r.session);
  EXPECT_EQ(r.session.phase, Phase::Done);
  EXPECT_TRUE(events_of(r.session, EventKind::GateWaiting).empty());
}

TEST(Professor, AdvanceRequiresCompletedPhase) {
  auto r = simulated_run(4);
  EXPECT_THROW(r.professor->advance(r.session, HumanApproval{}), PhaseError);
}

TEST(Professor, MinimumSurvivorsGuardsDivergence) {
  SessionConfig c = small_config();
  c.min_survivors_to_diverge = 1000;
  auto r = simulated_run(5, c);
  EXPECT_THROW(r.professor->run_to_completion(r.session), GateError);
  EXPECT_EQ(r.session.phase, Phase::Assessment);
}

TEST(Loop, RoundsRepeatGenerationAndAssessment) {
  SessionConfig c = small_config();
  c.raw_idea_budget = 40;
  c.max_rounds = 3;
  auto r = simulated_run(6, c);
  r.professor->run_to_completion(r.session);
  auto forge = completions(r.session, "forge");
  auto gate = completions(r.session, "gatekeeper");
  ASSERT_GE(forge.size(), 1u);
  EXPECT_EQ(forge.size(), gate.size());
  EXPECT_LE(forge.size(), 3u);
  for (std::size_t i = 0; i < forge.size(); ++i) EXPECT_EQ(forge[i]->payload.at("round"), static_cast<int>(i + 1));
  for (std::size_t i = 1; i < forge.size(); ++i) EXPECT_FALSE(forge[i]->payload.at("inputs").empty());
  EXPECT_EQ(completions(r.session, "challenger").size(), 1u);
  EXPECT_EQ(completions(r.session, "librarian").size(), 1u);
}

TEST(Loop, ForgeStopsAtTheBudget) {
  for (int budget : {1, 7, 10, 23}) {
    SessionConfig c = small_config();
    c.raw_idea_budget = budget;
    c.max_rounds = 10;
    c.gatekeeper_min_pts = 1;
    c.gatekeeper_eps = 0.01;
    auto r = simulated_run(7, c);
    r.professor->run_to_completion(r.session);
    EXPECT_EQ(forge_total(r.session), static_cast<std::size_t>(budget)) << "budget " << budget;
  }
}

TEST(Funnel, StageOutputsAreSubsetsOfInputs) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = simulated_run(rng(), random_config(rng));
    r.professor->run_to_completion(r.session);
    for (const char* agent : {"gatekeeper", "challenger", "sentinel"}) {
      for (const auto* e : completions(r.session, agent)) {
        auto in = e->payload.at("inputs").get<std::vector<std::string>>();
        std::set<std::string> inputs(in.begin(), in.end());
        for (const auto& id : e->payload.at("outputs").get<std::vector<std::string>>()) {
          ASSERT_TRUE(inputs.count(id)) << agent << " output " << id << " trial " << trial;
        }
      }
    }
    auto gk = decided(r.session, IdeaStatus::Shortlisted, "gatekeeper");
    for (const auto& id : decided(r.session, IdeaStatus::GloballyNovel, "challenger")) {
      const Idea* idea = r.session.vaults.find_idea(id);
      ASSERT_TRUE(gk.count(id) || idea->provenance == Provenance::Human) << id;
    }
    for (const auto& idea : r.session.vaults.ideas_with_status(IdeaStatus::Curated)) {
      bool via_challenger = decided(r.session, IdeaStatus::GloballyNovel, "challenger").count(idea.id) > 0;
      ASSERT_TRUE(via_challenger || idea.provenance == Provenance::NavigatorSynthesized) << idea.id;
    }
  }
}

TEST(Determinism, SameSeedSameBytes) {
  auto a = simulated_run(11);
  auto b = simulated_run(11);
  a.professor->run_to_completion(a.session);
  b.professor->run_to_completion(b.session);
  EXPECT_EQ(encode(a.session).dump(), encode(b.session).dump());

  auto c = simulated_run(12);
  c.professor->run_to_completion(c.session);
  EXPECT_NE(encode(a.session).dump(), encode(c.session).dump());
}

TEST(Determinism, Ps1IsReproducible) {
  auto a = ps1_run();
  auto b = ps1_run();
  EXPECT_EQ(encode(a->session).dump(), encode(b->session).dump());
  EXPECT_EQ(a->transports.scripted->remaining_chat(), 0u);
}

TEST(Failure, PhaseFailureLeavesOnlyStartAndFailure) {
  SessionConfig c = small_config();
  auto r = simulated_run(13, c, {"A spring seat"}, faulty(13, FaultInjector::always(ProviderRole::Mint, FaultKind::Fatal)));
  while (r.session.phase != Phase::Divergence) {
    if (r.session.phase_state != PhaseState::Completed) r.professor->run_phase(r.session);
    r.professor->advance(r.session, HumanApproval{});
  }
  const Session before = r.session;
  EXPECT_THROW(r.professor->run_phase(r.session), ProviderError);
  ASSERT_EQ(r.session.event_log.size(), before.event_log.size() + 2);
  EXPECT_EQ(r.session.event_log[before.event_log.size()].kind, EventKind::PhaseStarted);
  const auto& failed = r.session.event_log.back();
  EXPECT_EQ(failed.kind, EventKind::PhaseFailed);
  EXPECT_EQ(failed.payload.at("error_kind"), "provider");
  EXPECT_EQ(r.session.phase_state, PhaseState::Failed);
  EXPECT_EQ(r.session.vaults, before.vaults);
  EXPECT_EQ(r.session.usage, before.usage);
  EXPECT_EQ(replay(r.session.event_log), r.session);
}

TEST(Failure, RetryBudgetExhaustionFailsThePhase) {
  SessionConfig c = small_config();
  c.bindings[ProviderRole::Scribe].max_retries = 2;
  auto fi = std::make_shared<FaultInjector>(simulated_transports(14).chat,
                                            FaultInjector::always(ProviderRole::Scribe, FaultKind::Transient));
  Transports t = simulated_transports(14);
  t.chat = fi;
  auto r = simulated_run(14, c, {}, t);
  try {
    r.professor->run_phase(r.session);
    FAIL() << "expected a provider error";
  } catch (const ProviderError& e) {
    EXPECT_FALSE(e.retryable());
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(fi->calls(), 3u);
  EXPECT_EQ(r.session.phase_state, PhaseState::Failed);
  EXPECT_TRUE(r.session.vaults.problem_vault.empty());
}

TEST(Failure, TransientFaultsDoNotChangeTheOutcome) {
  auto clean = simulated_run(15);
  clean.professor->run_to_completion(clean.session);
  for (ProviderRole role : {ProviderRole::Scribe, ProviderRole::ForgeExplorer, ProviderRole::Scout, ProviderRole::Director}) {
    auto r = simulated_run(15, small_config(), {"A spring seat that pushes the user up"},
                           faulty(15, FaultInjector::first_calls(role, 2)));
    r.professor->run_to_completion(r.session);
    EXPECT_EQ(encode(r.session).dump(), encode(clean.session).dump()) << to_string(role);
  }
}

TEST(Failure, FailedPhaseCanBeResumed) {
  int failures = 1;
  auto rule = [&failures](const AgentRequest& r, std::uint64_t) -> std::optional<FaultKind> {
    if (r.role == ProviderRole::Sentinel && failures > 0) {
      --failures;
      return FaultKind::Fatal;
    }
    return std::nullopt;
  };
  auto r = simulated_run(16, small_config(), {"A spring seat that pushes the user up"}, faulty(16, rule));
  EXPECT_THROW(r.professor->run_to_completion(r.session), ProviderError);
  EXPECT_EQ(r.session.phase, Phase::Refinement);
  EXPECT_EQ(r.session.phase_state, PhaseState::Failed);
  r.professor->run_to_completion(r.session);
  EXPECT_EQ(r.session.phase, Phase::Done);

  auto clean = simulated_run(16);
  clean.professor->run_to_completion(clean.session);
  EXPECT_EQ(r.session.vaults, clean.session.vaults);
}

TEST(Rerun, GenerationRerunInvalidatesLaterWork) {
  SessionConfig c = small_config();
  c.max_rounds = 1;
  auto r = simulated_run(17, c);
  while (r.session.phase != Phase::Refinement) {
    if (r.session.phase_state != PhaseState::Completed) r.professor->run_phase(r.session);
    r.professor->advance(r.session, HumanApproval{});
  }
  const Session before = r.session;
  EXPECT_THROW(r.professor->rerun_from(r.session, Phase::Conceptualization), PhaseError);
  r.professor->rerun_from(r.session, Phase::Generation);
  EXPECT_EQ(r.session.phase, Phase::Generation);
  EXPECT_EQ(r.session.phase_state, PhaseState::Ready);
  EXPECT_FALSE(r.session.feasibility.has_value());
  EXPECT_FALSE(r.session.mint_lists.has_value());
  const auto entry = before.phase_entry_event.at(Phase::Generation);
  const Session snap = replay(std::span<const SessionEvent>(before.event_log).first(entry + 1));
  std::size_t invalidated = 0;
  for (const auto& idea : r.session.vaults.idea_vault) {
    ASSERT_NE(before.vaults.find_idea(idea.id), nullptr);
    if (const Idea* old = snap.vaults.find_idea(idea.id)) {
      EXPECT_EQ(idea.status, old->status) << idea.id;
    } else {
      EXPECT_EQ(idea.status, IdeaStatus::Removed) << idea.id;
      if (before.vaults.find_idea(idea.id)->status != IdeaStatus::Removed) {
        EXPECT_EQ(idea.status_history.back().by, "rerun");
        ++invalidated;
      }
    }
  }
  EXPECT_GT(invalidated, 0u);
  EXPECT_EQ(r.session.round, snap.round);
  r.professor->run_to_completion(r.session);
  EXPECT_EQ(r.session.phase, Phase::Done);
  EXPECT_FALSE(r.session.vaults.live_concepts().empty());
  EXPECT_EQ(replay(r.session.event_log), r.session);
}

TEST(Rerun, ConceptualizationRerunReplacesConcepts) {
  auto r = simulated_run(18);
  while (r.session.phase != Phase::Conceptualization) {
    if (r.session.phase_state != PhaseState::Completed) r.professor->run_phase(r.session);
    r.professor->advance(r.session, HumanApproval{});
  }
  r.professor->run_phase(r.session);
  auto first = r.session.vaults.live_concepts();
  ASSERT_FALSE(first.empty());
  r.professor->rerun_from(r.session, Phase::Conceptualization);
  EXPECT_TRUE(r.session.vaults.live_concepts().empty());
  r.professor->run_phase(r.session);
  auto second = r.session.vaults.live_concepts();
  ASSERT_EQ(second.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_NE(second[i].id, first[i].id);
    EXPECT_EQ(second[i].principle, first[i].principle);
  }
}

TEST(Overrides, HumanIdeaJoinsTheNextFilter) {
  auto r = simulated_run(19);
  r.professor->run_until_gate(r.session);
  r.professor->advance(r.session, HumanApproval{});
  r.professor->run_phase(r.session);
  ASSERT_EQ(r.session.phase, Phase::Generation);
  EXPECT_EQ(override_entry_status(r.session), IdeaStatus::Raw);
  std::string id = apply_override(r.session, AddIdea{"Lift cushion", "Inflates to lift", "Cushion", "Home", "mine"});
  r.professor->advance(r.session);
  r.professor->run_phase(r.session);
  const auto& inputs = completions(r.session, "gatekeeper").back()->payload.at("inputs");
  EXPECT_NE(std::find(inputs.begin(), inputs.end(), id), inputs.end());
}

TEST(Overrides, SubmittedIdeasAreStructuredByMuse) {
  auto r = simulated_run(20, small_config(), {"one", "two", "three"});
  EXPECT_EQ(r.session.pending_human_ideas.size(), 3u);
  r.professor->run_phase(r.session);
  r.professor->advance(r.session, HumanApproval{});
  r.professor->run_phase(r.session);
  EXPECT_TRUE(r.session.pending_human_ideas.empty());
  auto muse = completions(r.session, "muse");
  ASSERT_EQ(muse.size(), 1u);
  EXPECT_EQ(muse[0]->payload.at("output_count"), 3);
  std::size_t human = 0;
  for (const auto& idea : r.session.vaults.idea_vault) human += idea.provenance == Provenance::Human;
  EXPECT_EQ(human, 3u);
}

TEST(Usage, CompletionsCarryPerRoleUsage) {
  auto r = simulated_run(21);
  r.professor->run_to_completion(r.session);
  std::uint64_t calls = 0;
  for (const auto* e : events_of(r.session, EventKind::AgentCompleted)) calls += e->payload.at("calls").get<std::uint64_t>();
  std::uint64_t hub_calls = 0;
  for (const auto& [role, u] : r.hub->usage()) hub_calls += u.calls;
  EXPECT_EQ(calls, hub_calls);
  std::uint64_t session_calls = 0;
  for (const auto& [role, u] : r.session.usage) session_calls += u.calls;
  EXPECT_EQ(session_calls, hub_calls);
}

TEST(PhaseOf, AgentsMapToTheirPhase) {
  EXPECT_EQ(phase_of(AgentKind::Scribe), Phase::Definition);
  EXPECT_EQ(phase_of(AgentKind::Forge), Phase::Generation);
  EXPECT_EQ(phase_of(AgentKind::Challenger), Phase::Assessment);
  EXPECT_EQ(phase_of(AgentKind::Scout), Phase::Divergence);
  EXPECT_EQ(phase_of(AgentKind::Sentinel), Phase::Refinement);
  EXPECT_EQ(phase_of(AgentKind::Leo), Phase::Conceptualization);
}
