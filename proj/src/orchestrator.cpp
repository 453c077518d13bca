#include "midas/orchestrator.hpp"

#include <algorithm>
#include <cstdio>

#include "midas/embedding.hpp"
#include "midas/hash.hpp"

namespace midas {

// --- ArtifactStore ---------------------------------------------------------------

std::string ArtifactStore::put(const ImageResult& image, const std::string& prompt) {
  std::string ref = "img-" + hex16(mix64(fnv1a64(prompt, fnv1a64(image.bytes))));
  std::lock_guard lock(mu_);
  items_[ref] = ImageArtifact{ref, image.media_type, image.bytes, prompt};
  return ref;
}

void ArtifactStore::insert(ImageArtifact artifact) {
  std::lock_guard lock(mu_);
  items_[artifact.ref] = std::move(artifact);
}

std::optional<ImageArtifact> ArtifactStore::get(const std::string& ref) const {
  std::lock_guard lock(mu_);
  auto it = items_.find(ref);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, ImageArtifact> ArtifactStore::all() const {
  std::lock_guard lock(mu_);
  return items_;
}

// --- helpers ---------------------------------------------------------------------

Phase phase_of(AgentKind agent) {
  switch (agent) {
    case AgentKind::Scribe: return Phase::Definition;
    case AgentKind::Muse:
    case AgentKind::Forge: return Phase::Generation;
    case AgentKind::Gatekeeper:
    case AgentKind::Librarian:
    case AgentKind::Challenger: return Phase::Assessment;
    case AgentKind::Mint:
    case AgentKind::Scout: return Phase::Divergence;
    case AgentKind::Navigator:
    case AgentKind::Sentinel: return Phase::Refinement;
    case AgentKind::Director:
    case AgentKind::Leo: return Phase::Conceptualization;
    case AgentKind::Professor: break;
  }
  return Phase::Done;
}

namespace {

bool rerun_invalidated(const Idea& idea) {
  return std::any_of(idea.status_history.begin(), idea.status_history.end(), [](const StatusChange& c) {
    return c.by == "rerun" && c.decision == IdeaStatus::Removed;
  });
}

json idea_payload(const Idea& idea, const std::string& reason, const std::string& by) {
  json body = encode(idea);
  body.erase("status_history");
  return json{{"idea", body}, {"reason", reason}, {"by", by}};
}

Idea make_idea(const Session& s, const IdeaDraft& d, IdeaStatus status) {
  Idea idea;
  idea.id = s.peek_idea_id();
  idea.title = d.title;
  idea.action = d.action;
  idea.object = d.object;
  idea.context = d.context;
  idea.provenance = d.provenance;
  idea.origin_phase = s.phase;
  idea.status = status;
  return idea;
}

void change_status(Session& s, const std::string& id, IdeaStatus to, const std::string& reason, const std::string& by) {
  s.commit(EventKind::IdeaStatusChanged, Actor::System,
           json{{"idea_id", id}, {"status", to_string(to)}, {"reason", reason}, {"by", by}});
}

std::map<std::string, RoleUsage> usage_delta(const std::map<std::string, RoleUsage>& before,
                                             const std::map<std::string, RoleUsage>& after) {
  std::map<std::string, RoleUsage> out;
  for (const auto& [role, u] : after) {
    RoleUsage prior;
    if (auto it = before.find(role); it != before.end()) prior = it->second;
    if (u.calls != prior.calls || u.tokens != prior.tokens) out[role] = RoleUsage{u.calls - prior.calls, u.tokens - prior.tokens};
  }
  return out;
}

std::string agent_name(AgentKind a) { return std::string(to_string(a)); }

}  // namespace

std::size_t forge_total(const Session& s) {
  std::size_t n = 0;
  for (const auto& idea : s.vaults.idea_vault) {
    if ((idea.provenance == Provenance::AIFormulator || idea.provenance == Provenance::AIExplorer) &&
        !rerun_invalidated(idea)) {
      ++n;
    }
  }
  return n;
}

void Professor::reason(Session& s, AgentKind agent, const std::string& note) {
  s.commit(EventKind::AgentReasoning, Actor::System, json{{"agent", agent_name(agent)}, {"note", note}});
}

void Professor::warn(Session& s, AgentKind agent, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    s.commit(EventKind::AgentWarning, Actor::System, json{{"agent", agent_name(agent)}, {"message", w}});
  }
}

void Professor::complete(Session& s, AgentKind agent, std::size_t output_count, const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs, const std::map<std::string, RoleUsage>& before,
                         json extra) {
  auto delta = usage_delta(before, hub_.usage());
  std::uint64_t calls = 0;
  std::uint64_t tokens = 0;
  json usage = json::object();
  for (const auto& [role, u] : delta) {
    calls += u.calls;
    tokens += u.tokens;
    usage[role] = json{{"calls", u.calls}, {"tokens", u.tokens}};
  }
  json payload{{"agent", agent_name(agent)}, {"output_count", output_count}, {"inputs", inputs},
               {"outputs", outputs},         {"calls", calls},               {"tokens", tokens},
               {"usage", usage},             {"round", s.round}};
  for (auto it = extra.begin(); it != extra.end(); ++it) payload[it.key()] = it.value();
  s.commit(EventKind::AgentCompleted, Actor::System, std::move(payload));
}

void Professor::embed_pending_ideas(Session& s, const std::vector<IdeaStatus>& statuses) {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (const auto& idea : s.vaults.idea_vault) {
    if (idea.embedding || std::find(statuses.begin(), statuses.end(), idea.status) == statuses.end()) continue;
    ids.push_back(idea.id);
    texts.push_back(embedding_text(idea));
  }
  if (texts.empty()) return;
  auto vectors = hub_.embed_batch(texts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s.commit(EventKind::IdeaEmbedded, Actor::System, json{{"idea_id", ids[i]}, {"embedding", encode(vectors[i])}});
  }
}

void Professor::embed_pending_literature(Session& s) {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (const auto& lit : s.vaults.literature_vault) {
    if (lit.invalidated || lit.embedding) continue;
    ids.push_back(lit.id);
    texts.push_back(embedding_text(lit));
  }
  if (texts.empty()) return;
  auto vectors = hub_.embed_batch(texts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s.commit(EventKind::LiteratureEmbedded, Actor::System,
             json{{"literature_id", ids[i]}, {"embedding", encode(vectors[i])}});
  }
}

// --- Phases ----------------------------------------------------------------------

void Professor::definition(Session& s) {
  auto before = hub_.usage();
  ProblemStatement p = scribe_structure(s.problem_text, hub_);
  reason(s, AgentKind::Scribe, "structured the problem statement into AI3C form");
  p.id = s.peek_problem_id();
  p.created_at = s.event_log.size();
  s.commit(EventKind::ProblemStructured, Actor::System, json{{"problem", encode(p)}});
  complete(s, AgentKind::Scribe, 1, {}, {p.id}, before);
}

void Professor::generation(Session& s) {
  const ProblemStatement problem = s.problem();

  if (!s.pending_human_ideas.empty()) {
    auto before = hub_.usage();
    const auto pending = s.pending_human_ideas;
    std::vector<IdeaDraft> drafts(pending.size());
    parallel_for(pending.size(), s.config.binding(ProviderRole::Muse).max_in_flight,
                 [&](std::size_t i) { drafts[i] = muse_structure(pending[i], problem, hub_); });
    reason(s, AgentKind::Muse, "re-framed " + std::to_string(drafts.size()) + " designer ideas into AOC form");
    std::vector<std::string> outputs;
    for (const auto& d : drafts) {
      Idea idea = make_idea(s, d, IdeaStatus::Raw);
      outputs.push_back(idea.id);
      s.commit(EventKind::IdeaAdded, Actor::System, idea_payload(idea, "structured by muse", "muse"));
    }
    s.commit(EventKind::PendingIdeasCleared, Actor::System, json{{"count", pending.size()}});
    complete(s, AgentKind::Muse, outputs.size(), {}, outputs, before);
  }

  int want = 2 * kForgeIdeasPerAgent;
  if (s.config.raw_idea_budget) {
    auto made = static_cast<int>(forge_total(s));
    want = std::clamp(*s.config.raw_idea_budget - made, 0, want);
  }
  if (want == 0) {
    warn(s, AgentKind::Forge, {"raw idea budget exhausted; no new ideas generated"});
    return;
  }
  auto before = hub_.usage();
  std::vector<Idea> prior;
  if (s.round >= 2) {
    for (const auto& idea : s.vaults.idea_vault) {
      if (idea.status != IdeaStatus::Removed && idea.status != IdeaStatus::Raw) prior.push_back(idea);
    }
  }
  const int formulator = (want + 1) / 2;
  ForgeBatch batch = forge_generate(problem, hub_, prior, s.round, formulator, want - formulator);
  reason(s, AgentKind::Forge,
         "round " + std::to_string(s.round) + ": formulator proposed " + std::to_string(batch.formulator.size()) +
             " grounded ideas, explorer proposed " + std::to_string(batch.explorer.size()) + " wild ideas");
  std::vector<std::string> outputs;
  for (const auto* group : {&batch.formulator, &batch.explorer}) {
    for (const auto& d : *group) {
      Idea idea = make_idea(s, d, IdeaStatus::Raw);
      outputs.push_back(idea.id);
      s.commit(EventKind::IdeaAdded, Actor::System, idea_payload(idea, "generated by forge", "forge"));
    }
  }
  std::vector<std::string> inputs;
  for (const auto& idea : prior) inputs.push_back(idea.id);
  complete(s, AgentKind::Forge, outputs.size(), inputs, outputs, before,
           json{{"formulator", batch.formulator.size()}, {"explorer", batch.explorer.size()}});
}

void Professor::assessment(Session& s) {
  auto before = hub_.usage();
  embed_pending_ideas(s, {IdeaStatus::Raw, IdeaStatus::Shortlisted});
  GatekeeperResult gk = gatekeeper_filter(s);
  reason(s, AgentKind::Gatekeeper,
         "clustered " + std::to_string(gk.inputs.size()) + " ideas into " + std::to_string(gk.assignment.n_clusters) +
             " clusters; shortlisting " + std::to_string(gk.shortlisted.size()) + " new ideas");
  warn(s, AgentKind::Gatekeeper, gk.warnings);
  for (const auto& d : gk.decisions) change_status(s, d.idea_id, d.status, d.reason, "gatekeeper");
  complete(s, AgentKind::Gatekeeper, gk.shortlisted.size(), gk.inputs, gk.shortlisted, before,
           json{{"n_clusters", gk.assignment.n_clusters}});

  bool budget_left = !s.config.raw_idea_budget || forge_total(s) < static_cast<std::size_t>(*s.config.raw_idea_budget);
  bool loop = !gk.shortlisted.empty() && s.round < s.config.max_rounds && budget_left;
  if (loop) {
    s.commit(EventKind::PhaseCompleted, Actor::System,
             json{{"phase", to_string(Phase::Assessment)}, {"loop_back", true}, {"round", s.round}});
    return;
  }

  const ProblemStatement problem = s.problem();
  bool already = std::any_of(s.vaults.literature_vault.begin(), s.vaults.literature_vault.end(), [](const LiteratureEntry& l) {
    return !l.invalidated && l.retrieval_mode == RetrievalMode::Search;
  });
  if (!already) {
    before = hub_.usage();
    LibrarianResult lib = librarian_gather(problem, hub_, {}, true);
    reason(s, AgentKind::Librarian, "gathered " + std::to_string(lib.entries.size()) + " existing solutions");
    warn(s, AgentKind::Librarian, lib.warnings);
    std::vector<std::string> outputs;
    for (auto& entry : lib.entries) {
      entry.id = s.peek_literature_id();
      outputs.push_back(entry.id);
      s.commit(EventKind::LiteratureAdded, Actor::System, json{{"entry", encode(entry)}});
    }
    embed_pending_literature(s);
    complete(s, AgentKind::Librarian, outputs.size(), {}, outputs, before);
  } else {
    embed_pending_literature(s);
  }

  before = hub_.usage();
  ChallengerResult ch = challenger_filter(s);
  reason(s, AgentKind::Challenger,
         std::to_string(ch.survivors.size()) + " of " + std::to_string(ch.inputs.size()) +
             " shortlisted ideas are globally novel at threshold " + std::to_string(s.config.challenger_threshold));
  warn(s, AgentKind::Challenger, ch.warnings);
  for (const auto& id : ch.inputs) {
    auto rej = std::find_if(ch.rejected.begin(), ch.rejected.end(), [&](const auto& r) { return r.idea_id == id; });
    if (rej == ch.rejected.end()) {
      change_status(s, id, IdeaStatus::GloballyNovel, "globally novel against the literature vault", "challenger");
    } else {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", rej->similarity);
      change_status(s, id, IdeaStatus::Removed, "too close to " + rej->literature_id + " (similarity " + buf + ")",
                    "challenger");
    }
  }
  complete(s, AgentKind::Challenger, ch.survivors.size(), ch.inputs, ch.survivors, before);
  s.commit(EventKind::PhaseCompleted, Actor::System,
           json{{"phase", to_string(Phase::Assessment)}, {"loop_back", false}, {"round", s.round}});
}

void Professor::divergence(Session& s) {
  const ProblemStatement problem = s.problem();
  auto novel = s.vaults.ideas_with_status(IdeaStatus::GloballyNovel);
  std::vector<std::string> inputs;
  for (const auto& idea : novel) inputs.push_back(idea.id);

  auto before = hub_.usage();
  if (novel.empty()) {
    warn(s, AgentKind::Mint, {"no globally novel ideas to deconstruct"});
    complete(s, AgentKind::Mint, 0, inputs, {}, before);
    return;
  }
  MintResult mint = mint_extract(novel, hub_, s.config.mint_list_size);
  reason(s, AgentKind::Mint,
         "extracted " + std::to_string(mint.actions.size()) + " actions and " + std::to_string(mint.objects.size()) +
             " objects");
  warn(s, AgentKind::Mint, mint.warnings);
  s.commit(EventKind::MintExtracted, Actor::System, json{{"actions", mint.actions}, {"objects", mint.objects}});
  complete(s, AgentKind::Mint, mint.actions.size(), inputs, {}, before,
           json{{"actions", mint.actions.size()}, {"objects", mint.objects.size()}});

  if (mint.actions.empty() || mint.objects.empty()) {
    warn(s, AgentKind::Scout, {"empty mint lists; nothing to score"});
    return;
  }
  before = hub_.usage();
  ScoutResult scout = scout_score(mint.actions, mint.objects, problem, hub_, s.config.scout_batched);
  reason(s, AgentKind::Scout, "scored " + std::to_string(scout.grid.pairs.size()) + " action-object pairs");
  warn(s, AgentKind::Scout, scout.warnings);
  s.commit(EventKind::FeasibilityScored, Actor::System, json{{"grid", encode(scout.grid)}});
  std::size_t defaulted = std::count_if(scout.grid.pairs.begin(), scout.grid.pairs.end(),
                                        [](const ActionObjectPair& p) { return p.defaulted; });
  complete(s, AgentKind::Scout, scout.grid.pairs.size(), {}, {}, before, json{{"defaulted", defaulted}});
}

void Professor::refinement(Session& s) {
  const ProblemStatement problem = s.problem();
  auto before = hub_.usage();
  if (s.feasibility && !s.feasibility->pairs.empty()) {
    std::vector<ActionObjectPair> top = s.feasibility->pairs;
    if (top.size() > static_cast<std::size_t>(s.config.scout_top_k)) top.resize(static_cast<std::size_t>(s.config.scout_top_k));
    NavigatorResult nav = navigator_rehydrate(top, problem, hub_, s.config.gatekeeper_eps, s.config.gatekeeper_min_pts);
    std::size_t kept = std::count(nav.keep.begin(), nav.keep.end(), true);
    reason(s, AgentKind::Navigator,
           "re-hydrated " + std::to_string(top.size()) + " pairs into " + std::to_string(nav.drafts.size()) +
               " ideas; " + std::to_string(kept) + " pass the internal novelty check");
    warn(s, AgentKind::Navigator, nav.warnings);
    std::vector<std::string> ids;
    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < nav.drafts.size(); ++i) {
      Idea idea = make_idea(s, nav.drafts[i], IdeaStatus::GloballyNovel);
      idea.embedding = nav.embeddings[i];
      ids.push_back(idea.id);
      if (nav.keep[i]) outputs.push_back(idea.id);
      s.commit(EventKind::IdeaAdded, Actor::System, idea_payload(idea, "re-hydrated from top feasible pairs", "navigator"));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!nav.keep[i]) change_status(s, ids[i], IdeaStatus::Removed, "duplicate in the internal novelty check", "navigator");
    }
    std::vector<std::string> pair_inputs;
    for (const auto& p : top) pair_inputs.push_back(p.action + " + " + p.object);
    complete(s, AgentKind::Navigator, outputs.size(), pair_inputs, outputs, before,
             json{{"generated", nav.drafts.size()}});
  } else {
    warn(s, AgentKind::Navigator, {"no feasibility grid; skipping re-hydration"});
  }

  before = hub_.usage();
  auto candidates = s.vaults.ideas_with_status(IdeaStatus::GloballyNovel);
  SentinelResult sentinel = sentinel_curate(candidates, problem, hub_);
  std::size_t keep = 0, polish = 0, removed = 0;
  for (const auto& v : sentinel.verdicts) {
    if (v.verdict == Verdict::Keep) ++keep;
    if (v.verdict == Verdict::Polish) ++polish;
    if (v.verdict == Verdict::Remove) ++removed;
  }
  reason(s, AgentKind::Sentinel,
         "checked " + std::to_string(candidates.size()) + " candidates against criteria and constraints: " +
             std::to_string(keep) + " keep, " + std::to_string(polish) + " polish, " + std::to_string(removed) + " remove");
  warn(s, AgentKind::Sentinel, sentinel.warnings);
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  for (const auto& c : candidates) inputs.push_back(c.id);
  for (const auto& v : sentinel.verdicts) {
    if (v.verdict == Verdict::Remove) {
      change_status(s, v.idea_id, IdeaStatus::Removed, "not relevant: " + v.rationale, "sentinel");
      continue;
    }
    if (v.verdict == Verdict::Polish) {
      s.commit(EventKind::IdeaPolished, Actor::System,
               json{{"idea_id", v.idea_id}, {"context", *v.context}, {"reason", v.rationale}});
    }
    change_status(s, v.idea_id, IdeaStatus::Curated, "relevant: " + v.rationale, "sentinel");
    outputs.push_back(v.idea_id);
  }
  embed_pending_ideas(s, {IdeaStatus::Curated});
  complete(s, AgentKind::Sentinel, outputs.size(), inputs, outputs, before,
           json{{"keep", keep}, {"polish", polish}, {"remove", removed}});
  s.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(Phase::Refinement)}});
}

void Professor::conceptualization(Session& s) {
  const ProblemStatement problem = s.problem();
  std::vector<Idea> todo;
  for (const auto& idea : s.vaults.ideas_with_status(IdeaStatus::Curated)) {
    bool has = std::any_of(s.vaults.concept_vault.begin(), s.vaults.concept_vault.end(),
                           [&](const Concept& c) { return !c.invalidated && c.idea_id == idea.id; });
    if (!has) todo.push_back(idea);
  }

  auto before = hub_.usage();
  std::vector<Concept> concepts(todo.size());
  parallel_for(todo.size(), s.config.binding(ProviderRole::Director).max_in_flight,
               [&](std::size_t i) { concepts[i] = director_conceptualize(todo[i], problem, hub_); });
  reason(s, AgentKind::Director, "expanded " + std::to_string(concepts.size()) + " curated ideas into PFIC concepts");
  std::vector<std::string> inputs;
  std::vector<std::string> ids;
  for (auto& c : concepts) {
    inputs.push_back(c.idea_id);
    c.id = s.peek_concept_id();
    ids.push_back(c.id);
    s.commit(EventKind::ConceptAdded, Actor::System, json{{"concept", encode(c)}});
  }
  complete(s, AgentKind::Director, ids.size(), inputs, ids, before);

  before = hub_.usage();
  std::vector<std::string> prompts(concepts.size());
  std::vector<std::optional<std::string>> refs(concepts.size());
  std::vector<std::string> failures(concepts.size());
  parallel_for(concepts.size(), s.config.binding(ProviderRole::Leo).max_in_flight, [&](std::size_t i) {
    prompts[i] = leo_render_prompt(concepts[i]);
    try {
      ImageResult image = hub_.render_image(prompts[i]);
      if (artifacts_) {
        refs[i] = artifacts_->put(image, prompts[i]);
      } else {
        refs[i] = "img-" + hex16(mix64(fnv1a64(prompts[i], fnv1a64(image.bytes))));
      }
    } catch (const ProviderError& e) {
      failures[i] = e.what();
    }
  });
  reason(s, AgentKind::Leo, "rendering " + std::to_string(concepts.size()) + " concepts from features and characteristics");
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    if (!refs[i]) {
      warn(s, AgentKind::Leo, {"rendering failed for " + ids[i] + ": " + failures[i]});
      continue;
    }
    s.commit(EventKind::ConceptRendered, Actor::System,
             json{{"concept_id", ids[i]}, {"rendering_ref", *refs[i]}, {"prompt", prompts[i]}});
    rendered.push_back(ids[i]);
  }
  complete(s, AgentKind::Leo, rendered.size(), ids, rendered, before);
  s.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(Phase::Conceptualization)}});
}

// --- Control ---------------------------------------------------------------------

void Professor::run_phase(Session& session) {
  if (session.phase == Phase::Done) throw PhaseError("session is done");
  if (session.phase_state == PhaseState::Completed) throw PhaseError("phase already completed; advance instead");

  Session work = session;
  const json started{{"phase", to_string(session.phase)}, {"round", session.round}};
  try {
    work.commit(EventKind::PhaseStarted, Actor::System, started);
    switch (work.phase) {
      case Phase::Definition:
        definition(work);
        work.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(Phase::Definition)}});
        break;
      case Phase::Generation:
        generation(work);
        work.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(Phase::Generation)}});
        break;
      case Phase::Assessment: assessment(work); break;
      case Phase::Divergence:
        divergence(work);
        work.commit(EventKind::PhaseCompleted, Actor::System, json{{"phase", to_string(Phase::Divergence)}});
        break;
      case Phase::Refinement: refinement(work); break;
      case Phase::Conceptualization: conceptualization(work); break;
      case Phase::Done: break;
    }
    if (phase_is_gated(work.config, work.phase) && !work.loop_pending) {
      work.commit(EventKind::GateWaiting, Actor::System, json{{"phase", to_string(work.phase)}});
    }
  } catch (const std::exception& e) {
    std::string kind = "error";
    if (dynamic_cast<const ProviderError*>(&e)) kind = "provider";
    if (dynamic_cast<const StructuredOutputError*>(&e)) kind = "structured_output";
    if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
    session.commit(EventKind::PhaseStarted, Actor::System, started);
    session.commit(EventKind::PhaseFailed, Actor::System,
                   json{{"phase", to_string(session.phase)}, {"error", e.what()}, {"error_kind", kind}});
    throw;
  }
  session = std::move(work);
}

void Professor::advance(Session& s, const std::optional<HumanApproval>& approval) {
  if (s.phase == Phase::Done) throw PhaseError("cannot advance a Done session");
  if (s.phase_state != PhaseState::Completed) throw PhaseError("current phase steps are not complete");
  const Phase from = s.phase;
  if (s.loop_pending) {
    s.commit(EventKind::PhaseAdvanced, Actor::System,
             json{{"from", to_string(from)}, {"to", to_string(Phase::Generation)}, {"trigger", "system"},
                  {"reason", "CG/CA round " + std::to_string(s.round + 1)}});
    return;
  }
  if (phase_is_gated(s.config, from) && !s.gate_approved) {
    if (!approval) throw GateError(std::string(to_string(from)) + " gate requires human approval");
    s.commit(EventKind::GateApproved, approval->actor, json{{"phase", to_string(from)}, {"note", approval->note}});
  }
  if (from == Phase::Assessment) {
    auto novel = s.vaults.ideas_with_status(IdeaStatus::GloballyNovel).size();
    if (novel < static_cast<std::size_t>(s.config.min_survivors_to_diverge)) {
      throw GateError("only " + std::to_string(novel) + " globally novel ideas; gate needs " +
                      std::to_string(s.config.min_survivors_to_diverge));
    }
  }
  const Actor actor = approval ? approval->actor : Actor::System;
  const Phase to = next_phase(from);
  s.commit(EventKind::PhaseAdvanced, actor,
           json{{"from", to_string(from)}, {"to", to_string(to)}, {"trigger", to_string(actor)}});
  if (to == Phase::Done) {
    s.commit(EventKind::SessionDone, Actor::System,
             json{{"curated", s.vaults.ideas_with_status(IdeaStatus::Curated).size()},
                  {"concepts", s.vaults.live_concepts().size()}});
  }
}

void Professor::rerun_from(Session& s, Phase target, Actor actor) {
  if (phase_index(target) > phase_index(s.phase)) {
    throw PhaseError("rerun target " + std::string(to_string(target)) + " lies after the current phase");
  }
  auto entry = s.phase_entry_event.find(target);
  if (entry == s.phase_entry_event.end()) throw PhaseError("phase was never entered");
  s.commit(EventKind::RerunStarted, actor, json{{"target", to_string(target)}, {"snapshot_event", entry->second}});
}

void Professor::run_to_completion(Session& s) {
  while (s.phase != Phase::Done) {
    if (s.phase_state != PhaseState::Completed) run_phase(s);
    std::optional<HumanApproval> approval;
    if (phase_is_gated(s.config, s.phase) && !s.loop_pending && !s.gate_approved) {
      approval = HumanApproval{"auto-approved (headless)", Actor::System};
    }
    advance(s, approval);
  }
}

void Professor::run_until_gate(Session& s) {
  while (s.phase != Phase::Done) {
    if (s.phase_state != PhaseState::Completed) run_phase(s);
    if (phase_is_gated(s.config, s.phase) && !s.loop_pending && !s.gate_approved) return;
    advance(s);
  }
}

void Professor::submit_idea(Session& s, const std::string& text) {
  if (s.phase == Phase::Done) throw PhaseError("session is done");
  bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  if (blank) throw InvalidInput("idea text must be non-empty");
  s.commit(EventKind::HumanIdeaSubmitted, Actor::Human, json{{"text", text}});
}

std::string Professor::add_literature(Session& s, LiteratureEntry entry) {
  if (s.phase == Phase::Done) throw PhaseError("session is done");
  entry.id = s.peek_literature_id();
  entry.retrieval_mode = RetrievalMode::Manual;
  entry.embedding.reset();
  entry.invalidated = false;
  validate(entry);
  s.commit(EventKind::LiteratureAdded, Actor::Human, json{{"entry", encode(entry)}});
  return entry.id;
}

void Professor::revise_problem(Session& s, const std::string& text) {
  s.commit(EventKind::ProblemRevised, Actor::Human, json{{"problem_text", text}});
}

}  // namespace midas
