#include "midas/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

#include "midas/hash.hpp"

namespace midas {

namespace {

constexpr EnumNames<EventKind, 27> kEventNames{{
    {EventKind::SessionCreated, "session_created"},
    {EventKind::ProblemRevised, "problem_revised"},
    {EventKind::ProblemStructured, "problem_structured"},
    {EventKind::HumanIdeaSubmitted, "human_idea_submitted"},
    {EventKind::PendingIdeasCleared, "pending_ideas_cleared"},
    {EventKind::IdeaAdded, "idea_added"},
    {EventKind::IdeaEmbedded, "idea_embedded"},
    {EventKind::IdeaStatusChanged, "idea_status_changed"},
    {EventKind::IdeaPolished, "idea_polished"},
    {EventKind::LiteratureAdded, "literature_added"},
    {EventKind::LiteratureEmbedded, "literature_embedded"},
    {EventKind::MintExtracted, "mint_extracted"},
    {EventKind::FeasibilityScored, "feasibility_scored"},
    {EventKind::ConceptAdded, "concept_added"},
    {EventKind::ConceptRendered, "concept_rendered"},
    {EventKind::PhaseStarted, "phase_started"},
    {EventKind::AgentReasoning, "agent_reasoning"},
    {EventKind::AgentCompleted, "agent_completed"},
    {EventKind::AgentWarning, "agent_warning"},
    {EventKind::PhaseCompleted, "phase_completed"},
    {EventKind::GateWaiting, "gate_waiting"},
    {EventKind::GateApproved, "gate_approved"},
    {EventKind::PhaseAdvanced, "phase_advanced"},
    {EventKind::PhaseFailed, "phase_failed"},
    {EventKind::RerunStarted, "rerun_started"},
    {EventKind::SchemaMigrated, "schema_migrated"},
    {EventKind::SessionDone, "session_done"},
}};

constexpr EnumNames<PhaseState, 3> kPhaseStateNames{{
    {PhaseState::Ready, "Ready"},
    {PhaseState::Completed, "Completed"},
    {PhaseState::Failed, "Failed"},
}};

std::string seq_id(const char* prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06llu", prefix, static_cast<unsigned long long>(n));
  return buf;
}

bool forward_step(IdeaStatus from, IdeaStatus to) {
  switch (from) {
    case IdeaStatus::Raw: return to == IdeaStatus::Shortlisted;
    case IdeaStatus::Shortlisted: return to == IdeaStatus::GloballyNovel;
    case IdeaStatus::GloballyNovel: return to == IdeaStatus::Curated;
    default: return false;
  }
}

// Status the idea held before its most recent removal.
std::optional<IdeaStatus> status_before_removal(const Idea& idea) {
  for (std::size_t i = idea.status_history.size(); i-- > 1;) {
    if (idea.status_history[i].decision == IdeaStatus::Removed) return idea.status_history[i - 1].decision;
  }
  return std::nullopt;
}

Idea& require_idea(Session& s, const std::string& id) {
  auto* idea = s.vaults.find_idea(id);
  if (!idea) throw NotFound("unknown idea id '" + id + "'");
  return *idea;
}

void set_embedding_model(Session& s, const EmbeddingVector& v) {
  validate_unit_norm(v);
  if (!s.embedding_model) {
    s.embedding_model = v.model_tag;
    s.embedding_dimension = v.values.size();
    return;
  }
  if (*s.embedding_model != v.model_tag || *s.embedding_dimension != v.values.size()) {
    throw ConfigError("embedding model mismatch: session uses '" + *s.embedding_model + "' (" +
                      std::to_string(*s.embedding_dimension) + "d), got '" + v.model_tag + "' (" +
                      std::to_string(v.values.size()) + "d)");
  }
}

void apply_rerun(Session& s, const SessionEvent& e) {
  Reader r(e.payload, "$.payload");
  Phase target = decode_phase(r.at("target"));
  if (phase_index(target) > phase_index(s.phase)) throw PhaseError("rerun target lies after the current phase");
  auto entry = s.phase_entry_event.find(target);
  if (entry == s.phase_entry_event.end()) throw PhaseError("phase was never entered");
  if (auto snap_at = r.maybe("snapshot_event"); snap_at && snap_at->unsigned_integer() != entry->second) {
    snap_at->fail("does not match the latest entry into " + std::string(to_string(target)));
  }

  const Session snap = replay(std::span<const SessionEvent>(s.event_log).first(entry->second + 1));
  const std::string label = "rerun_from " + std::string(to_string(target));

  for (auto& idea : s.vaults.idea_vault) {
    const Idea* old = snap.vaults.find_idea(idea.id);
    if (old) {
      IdeaStatus before = idea.status;
      idea.title = old->title;
      idea.action = old->action;
      idea.object = old->object;
      idea.context = old->context;
      idea.embedding = old->embedding;
      if (before != old->status) {
        idea.status = old->status;
        idea.status_history.push_back({target, old->status, label + ": archived " + std::string(to_string(before)), "rerun"});
      }
    } else if (idea.status != IdeaStatus::Removed) {
      idea.status = IdeaStatus::Removed;
      idea.status_history.push_back({target, IdeaStatus::Removed, "invalidated by " + label, "rerun"});
    }
  }
  for (auto& p : s.vaults.problem_vault) {
    auto it = std::find_if(snap.vaults.problem_vault.begin(), snap.vaults.problem_vault.end(),
                           [&](const ProblemStatement& q) { return q.id == p.id; });
    p.invalidated = it == snap.vaults.problem_vault.end() ? true : it->invalidated;
  }
  for (auto& lit : s.vaults.literature_vault) {
    const auto* old = snap.vaults.find_literature(lit.id);
    lit.invalidated = old ? old->invalidated : true;
  }
  for (auto& c : s.vaults.concept_vault) {
    auto it = std::find_if(snap.vaults.concept_vault.begin(), snap.vaults.concept_vault.end(),
                           [&](const Concept& k) { return k.id == c.id; });
    if (it == snap.vaults.concept_vault.end()) {
      c.invalidated = true;
    } else {
      c = *it;
    }
  }

  s.problem_text = snap.problem_text;
  s.pending_human_ideas = snap.pending_human_ideas;
  s.mint_lists = snap.mint_lists;
  s.feasibility = snap.feasibility;
  s.round = snap.round;
  s.loop_pending = false;
  s.gate_approved = false;
  s.phase = target;
  s.phase_state = PhaseState::Ready;
  for (auto it = s.phase_entry_event.begin(); it != s.phase_entry_event.end();) {
    it = phase_index(it->first) > phase_index(target) ? s.phase_entry_event.erase(it) : std::next(it);
  }
}

json encode_without_history(const Idea& idea) {
  json j = encode(idea);
  j.erase("status_history");
  return j;
}

}  // namespace

std::string_view to_string(EventKind k) { return kEventNames.name(k); }
EventKind decode_event_kind(const Reader& r) { return kEventNames.decode(r); }
std::string_view to_string(PhaseState s) { return kPhaseStateNames.name(s); }

json encode(const SessionEvent& e) {
  json j{{"index", e.index},
         {"kind", to_string(e.kind)},
         {"actor", to_string(e.actor)},
         {"phase", to_string(e.phase)},
         {"payload", e.payload}};
  if (e.wall_clock) j["wall_clock"] = *e.wall_clock;
  return j;
}

SessionEvent decode_event(const Reader& r) {
  SessionEvent e;
  e.index = r.at("index").unsigned_integer();
  e.kind = decode_event_kind(r.at("kind"));
  e.actor = decode_actor(r.at("actor"));
  e.phase = decode_phase(r.at("phase"));
  e.payload = r.at("payload").raw();
  if (auto w = r.maybe("wall_clock")) e.wall_clock = w->str();
  return e;
}

// --- Session -----------------------------------------------------------------

const SessionEvent& Session::commit(EventKind kind, Actor actor, json payload) {
  SessionEvent e;
  e.index = event_log.size();
  e.kind = kind;
  e.actor = actor;
  e.phase = phase;
  e.payload = std::move(payload);
  if (kind != EventKind::SessionCreated && config.annotate_wall_clock) {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    e.wall_clock = buf;
  }
  // Reducer works on a copy so a rejected event leaves *this untouched.
  Session next = *this;
  next.event_log.push_back(e);
  apply_event(next, next.event_log.back());
  *this = std::move(next);
  return event_log.back();
}

std::string Session::peek_problem_id() const { return seq_id("problem", next_problem); }
std::string Session::peek_idea_id(std::uint64_t offset) const { return seq_id("idea", next_idea + offset); }
std::string Session::peek_literature_id(std::uint64_t offset) const { return seq_id("lit", next_literature + offset); }
std::string Session::peek_concept_id(std::uint64_t offset) const { return seq_id("concept", next_concept + offset); }

std::vector<Idea> Session::live_ideas() const {
  std::vector<Idea> out;
  for (const auto& idea : vaults.idea_vault) {
    if (idea.status != IdeaStatus::Removed) out.push_back(idea);
  }
  return out;
}

const ProblemStatement& Session::problem() const {
  const auto* p = vaults.current_problem();
  if (!p) throw PhaseError("problem has not been structured yet");
  return *p;
}

void apply_event(Session& s, const SessionEvent& e) {
  Reader r(e.payload, "$.payload");
  switch (e.kind) {
    case EventKind::SessionCreated: {
      if (e.index != 0) throw InvalidInput("session_created must be the first event");
      s.id = r.at("id").nonempty_str();
      s.problem_text = r.at("problem_text").nonempty_str();
      s.config = decode_config(r.at("config"));
      s.seed = r.at("seed").unsigned_integer();
      s.phase = Phase::Definition;
      s.phase_state = PhaseState::Ready;
      s.phase_entry_event[Phase::Definition] = e.index;
      break;
    }
    case EventKind::ProblemRevised: {
      if (s.phase != Phase::Definition) throw PhaseError("problem text can only change during Definition");
      s.problem_text = r.at("problem_text").nonempty_str();
      s.phase_state = PhaseState::Ready;
      break;
    }
    case EventKind::ProblemStructured: {
      auto p = decode_problem(r.at("problem"));
      validate(p);
      if (p.id != s.peek_problem_id()) throw InvalidInput("unexpected problem id '" + p.id + "'");
      for (auto& old : s.vaults.problem_vault) old.invalidated = true;
      s.vaults.problem_vault.push_back(std::move(p));
      ++s.next_problem;
      break;
    }
    case EventKind::HumanIdeaSubmitted:
      s.pending_human_ideas.push_back(r.at("text").nonempty_str());
      break;
    case EventKind::PendingIdeasCleared: {
      auto n = r.at("count").unsigned_integer();
      if (n > s.pending_human_ideas.size()) throw InvalidInput("clearing more pending ideas than queued");
      s.pending_human_ideas.erase(s.pending_human_ideas.begin(), s.pending_human_ideas.begin() + static_cast<long>(n));
      break;
    }
    case EventKind::IdeaAdded: {
      json body = r.at("idea").raw();
      body["status_history"] = json::array();
      auto idea = decode_idea(Reader(body, "$.payload.idea"));
      validate_aoc(idea.title, idea.action, idea.object, idea.context);
      if (idea.id != s.peek_idea_id()) throw InvalidInput("unexpected idea id '" + idea.id + "'");
      if (idea.status == IdeaStatus::Removed) throw InvalidInput("ideas cannot enter as Removed");
      if (idea.embedding) set_embedding_model(s, *idea.embedding);
      idea.status_history.push_back({e.phase, idea.status, r.at("reason").str(), r.at("by").str()});
      s.vaults.idea_vault.push_back(std::move(idea));
      ++s.next_idea;
      break;
    }
    case EventKind::IdeaEmbedded: {
      auto& idea = require_idea(s, r.at("idea_id").str());
      auto v = decode_embedding(r.at("embedding"));
      set_embedding_model(s, v);
      idea.embedding = std::move(v);
      break;
    }
    case EventKind::IdeaStatusChanged: {
      auto& idea = require_idea(s, r.at("idea_id").str());
      IdeaStatus to = decode_status(r.at("status"));
      bool restore = r.has("restore") && r.at("restore").boolean();
      if (restore) {
        if (e.actor != Actor::Human) throw InvalidInput("only a human override can restore an idea");
        if (idea.status != IdeaStatus::Removed) throw InvalidInput("idea '" + idea.id + "' is not Removed");
        auto prior = status_before_removal(idea);
        if (!prior || *prior != to) throw InvalidInput("restore must return the idea to its prior status");
      } else if (to == IdeaStatus::Removed) {
        if (idea.status == IdeaStatus::Removed) throw InvalidInput("idea '" + idea.id + "' is already Removed");
      } else if (e.actor == Actor::Human || !forward_step(idea.status, to)) {
        throw InvalidInput("illegal status transition " + std::string(to_string(idea.status)) + " -> " +
                           std::string(to_string(to)) + " for '" + idea.id + "'");
      }
      idea.status = to;
      idea.status_history.push_back({e.phase, to, r.at("reason").str(), r.at("by").str()});
      break;
    }
    case EventKind::IdeaPolished: {
      auto& idea = require_idea(s, r.at("idea_id").str());
      if (idea.status == IdeaStatus::Removed) throw InvalidInput("cannot polish a Removed idea");
      idea.context = r.at("context").nonempty_str();
      idea.embedding.reset();
      break;
    }
    case EventKind::LiteratureAdded: {
      auto entry = decode_literature(r.at("entry"));
      validate(entry);
      if (entry.id != s.peek_literature_id()) throw InvalidInput("unexpected literature id '" + entry.id + "'");
      if (entry.embedding) set_embedding_model(s, *entry.embedding);
      s.vaults.literature_vault.push_back(std::move(entry));
      ++s.next_literature;
      break;
    }
    case EventKind::LiteratureEmbedded: {
      auto id = r.at("literature_id").str();
      auto it = std::find_if(s.vaults.literature_vault.begin(), s.vaults.literature_vault.end(),
                             [&](const LiteratureEntry& l) { return l.id == id; });
      if (it == s.vaults.literature_vault.end()) throw NotFound("unknown literature id '" + id + "'");
      auto v = decode_embedding(r.at("embedding"));
      set_embedding_model(s, v);
      it->embedding = std::move(v);
      break;
    }
    case EventKind::MintExtracted: {
      MintLists lists{r.at("actions").strings(), r.at("objects").strings()};
      s.mint_lists = std::move(lists);
      s.feasibility.reset();
      break;
    }
    case EventKind::FeasibilityScored: {
      auto grid = decode_grid(r.at("grid"));
      if (grid.pairs.size() != grid.actions.size() * grid.objects.size()) {
        throw InvalidInput("feasibility grid does not cover the Cartesian product");
      }
      std::vector<char> seen(grid.pairs.size(), 0);
      for (const auto& p : grid.pairs) {
        if (p.action_index >= grid.actions.size() || p.object_index >= grid.objects.size() ||
            grid.actions[p.action_index] != p.action || grid.objects[p.object_index] != p.object) {
          throw InvalidInput("feasibility pair references an unknown action/object");
        }
        auto& flag = seen[p.action_index * grid.objects.size() + p.object_index];
        if (flag) throw InvalidInput("feasibility pair listed twice");
        flag = 1;
      }
      if (s.mint_lists && (s.mint_lists->actions != grid.actions || s.mint_lists->objects != grid.objects)) {
        throw InvalidInput("feasibility grid lists differ from the extracted lists");
      }
      s.feasibility = std::move(grid);
      break;
    }
    case EventKind::ConceptAdded: {
      auto c = decode_concept(r.at("concept"));
      validate(c);
      if (c.id != s.peek_concept_id()) throw InvalidInput("unexpected concept id '" + c.id + "'");
      const auto& idea = require_idea(s, c.idea_id);
      if (idea.status != IdeaStatus::Curated) throw InvalidInput("concepts require a Curated idea");
      for (const auto& other : s.vaults.concept_vault) {
        if (!other.invalidated && other.idea_id == c.idea_id) throw InvalidInput("idea already has a concept");
      }
      s.vaults.concept_vault.push_back(std::move(c));
      ++s.next_concept;
      break;
    }
    case EventKind::ConceptRendered: {
      auto id = r.at("concept_id").str();
      auto* c = s.vaults.find_concept(id);
      if (!c) throw NotFound("unknown concept id '" + id + "'");
      c->rendering_ref = r.at("rendering_ref").nonempty_str();
      break;
    }
    case EventKind::PhaseStarted: {
      if (s.phase == Phase::Done) throw PhaseError("session is done");
      if (s.phase_state == PhaseState::Completed) throw PhaseError("phase already completed");
      s.phase_state = PhaseState::Ready;
      break;
    }
    case EventKind::AgentReasoning:
    case EventKind::AgentWarning:
    case EventKind::GateWaiting:
    case EventKind::SchemaMigrated:
      break;
    case EventKind::AgentCompleted: {
      if (auto usage = r.maybe("usage")) {
        for (const auto& [role, u] : usage->entries()) {
          auto& slot = s.usage[role];
          slot.calls += u.at("calls").unsigned_integer();
          slot.tokens += u.at("tokens").unsigned_integer();
        }
      }
      break;
    }
    case EventKind::PhaseCompleted: {
      if (decode_phase(r.at("phase")) != s.phase) throw PhaseError("completion for a phase that is not current");
      s.phase_state = PhaseState::Completed;
      s.loop_pending = r.has("loop_back") && r.at("loop_back").boolean();
      break;
    }
    case EventKind::GateApproved: {
      if (s.phase_state != PhaseState::Completed) throw GateError("gate approval before the phase completed");
      s.gate_approved = true;
      break;
    }
    case EventKind::PhaseAdvanced: {
      Phase from = decode_phase(r.at("from"));
      Phase to = decode_phase(r.at("to"));
      if (from != s.phase) throw PhaseError("advance from a phase that is not current");
      if (s.phase == Phase::Done) throw PhaseError("session is done");
      if (s.phase_state != PhaseState::Completed) throw PhaseError("current phase steps are not complete");
      bool loop = from == Phase::Assessment && to == Phase::Generation;
      if (loop) {
        if (!s.loop_pending) throw PhaseError("no CG/CA round is pending");
        ++s.round;
      } else {
        if (to != next_phase(from)) throw PhaseError("phases advance only in order");
        if (s.loop_pending) throw PhaseError("a CG/CA round is pending");
        if (phase_is_gated(s.config, from) && !s.gate_approved) throw GateError("human approval required");
      }
      s.phase = to;
      s.phase_state = to == Phase::Done ? PhaseState::Completed : PhaseState::Ready;
      s.gate_approved = false;
      s.loop_pending = false;
      s.phase_entry_event[to] = e.index;
      break;
    }
    case EventKind::PhaseFailed:
      s.phase_state = PhaseState::Failed;
      break;
    case EventKind::RerunStarted:
      apply_rerun(s, e);
      break;
    case EventKind::SessionDone:
      if (s.phase != Phase::Done) throw PhaseError("session_done before reaching Done");
      break;
  }
}

Session replay(std::span<const SessionEvent> events) {
  Session s;
  s.event_log.reserve(events.size());
  for (const auto& e : events) {
    if (e.index != s.event_log.size()) throw InvalidInput("event log indices are not contiguous");
    s.event_log.push_back(e);
    apply_event(s, s.event_log.back());
  }
  return s;
}

json encode(const Session& s) {
  json log = json::array();
  for (const auto& e : s.event_log) log.push_back(encode(e));
  json pending = s.pending_human_ideas;
  json entries = json::object();
  for (const auto& [phase, idx] : s.phase_entry_event) entries[std::string(to_string(phase))] = idx;
  json usage = json::object();
  for (const auto& [role, u] : s.usage) usage[role] = json{{"calls", u.calls}, {"tokens", u.tokens}};
  return json{
      {"schema_version", 2},
      {"id", s.id},
      {"phase", to_string(s.phase)},
      {"phase_state", to_string(s.phase_state)},
      {"seed", s.seed},
      {"problem_text", s.problem_text},
      {"config", encode(s.config)},
      {"vaults", encode(s.vaults)},
      {"round", s.round},
      {"loop_pending", s.loop_pending},
      {"gate_approved", s.gate_approved},
      {"pending_human_ideas", pending},
      {"mint_lists", s.mint_lists ? json{{"actions", s.mint_lists->actions}, {"objects", s.mint_lists->objects}} : json()},
      {"feasibility", s.feasibility ? encode(*s.feasibility) : json()},
      {"embedding_model", s.embedding_model ? json(*s.embedding_model) : json()},
      {"embedding_dimension", s.embedding_dimension ? json(*s.embedding_dimension) : json()},
      {"phase_entry_event", entries},
      {"usage", usage},
      {"next_ids", json{{"problem", s.next_problem}, {"idea", s.next_idea}, {"literature", s.next_literature},
                        {"concept", s.next_concept}}},
      {"event_log", log},
  };
}

Session decode_session(const Reader& r) {
  Session s;
  auto version = r.at("schema_version");
  if (version.integer() != 2) version.fail("unsupported schema_version " + std::to_string(version.integer()));
  s.id = r.at("id").nonempty_str();
  s.phase = decode_phase(r.at("phase"));
  auto state = r.at("phase_state");
  if (auto st = kPhaseStateNames.parse(state.str())) {
    s.phase_state = *st;
  } else {
    state.fail("unknown value '" + state.str() + "'");
  }
  s.seed = r.at("seed").unsigned_integer();
  s.problem_text = r.at("problem_text").str();
  s.config = decode_config(r.at("config"));
  s.vaults = decode_vaults(r.at("vaults"));
  s.round = static_cast<int>(r.at("round").integer());
  s.loop_pending = r.at("loop_pending").boolean();
  s.gate_approved = r.at("gate_approved").boolean();
  s.pending_human_ideas = r.at("pending_human_ideas").strings();
  if (auto m = r.maybe("mint_lists")) s.mint_lists = MintLists{m->at("actions").strings(), m->at("objects").strings()};
  if (auto g = r.maybe("feasibility")) s.feasibility = decode_grid(*g);
  if (auto m = r.maybe("embedding_model")) s.embedding_model = m->str();
  if (auto d = r.maybe("embedding_dimension")) s.embedding_dimension = d->unsigned_integer();
  for (const auto& [name, idx] : r.at("phase_entry_event").entries()) {
    auto p = parse_phase(name);
    if (!p) idx.fail("unknown phase");
    s.phase_entry_event[*p] = idx.unsigned_integer();
  }
  for (const auto& [role, u] : r.at("usage").entries()) {
    s.usage[role] = RoleUsage{u.at("calls").unsigned_integer(), u.at("tokens").unsigned_integer()};
  }
  auto ids = r.at("next_ids");
  s.next_problem = ids.at("problem").unsigned_integer();
  s.next_idea = ids.at("idea").unsigned_integer();
  s.next_literature = ids.at("literature").unsigned_integer();
  s.next_concept = ids.at("concept").unsigned_integer();
  for (const auto& e : r.at("event_log").items()) s.event_log.push_back(decode_event(e));
  return s;
}

// --- Operations --------------------------------------------------------------

bool phase_is_gated(const SessionConfig& config, Phase p) {
  return std::find(config.gated_phases.begin(), config.gated_phases.end(), p) != config.gated_phases.end();
}

Session new_session(const std::string& problem_text, const SessionConfig& config, std::uint64_t seed) {
  if (std::all_of(problem_text.begin(), problem_text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw InvalidInput("problem text must be non-empty");
  }
  validate(config);
  std::mt19937_64 rng(seed);
  std::string id = "ses-" + hex16(mix64(rng() ^ fnv1a64(problem_text)));
  Session s;
  s.commit(EventKind::SessionCreated, Actor::System,
           json{{"id", id}, {"problem_text", problem_text}, {"config", encode(config)}, {"seed", seed}});
  return s;
}

IdeaStatus override_entry_status(const Session& s) {
  bool done = s.phase_state == PhaseState::Completed;
  switch (s.phase) {
    case Phase::Definition:
    case Phase::Generation: return IdeaStatus::Raw;
    case Phase::Assessment: return done && !s.loop_pending ? IdeaStatus::GloballyNovel : IdeaStatus::Raw;
    case Phase::Divergence: return IdeaStatus::GloballyNovel;
    case Phase::Refinement: return done ? IdeaStatus::Curated : IdeaStatus::GloballyNovel;
    case Phase::Conceptualization: return IdeaStatus::Curated;
    case Phase::Done: break;
  }
  throw PhaseError("session is done");
}

Override decode_override(const Reader& r) {
  auto type = r.at("type").str();
  std::string reason = r.maybe("reason") ? r.at("reason").str() : std::string{};
  if (type == "AddIdea") {
    auto idea = r.at("idea");
    AddIdea add{idea.at("title").str(), idea.at("action").str(), idea.at("object").str(), idea.at("context").str(), reason};
    return add;
  }
  if (type == "RemoveIdea") return RemoveIdea{r.at("idea_id").nonempty_str(), reason};
  if (type == "RestoreIdea") return RestoreIdea{r.at("idea_id").nonempty_str(), reason};
  r.at("type").fail("unknown override type '" + type + "'");
}

std::string apply_override(Session& s, const Override& o) {
  if (s.phase == Phase::Done) throw PhaseError("overrides are not accepted once the session is done");
  return std::visit(
      [&](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, AddIdea>) {
          validate_aoc(op.title, op.action, op.object, op.context);
          Idea idea;
          idea.id = s.peek_idea_id();
          idea.title = op.title;
          idea.action = op.action;
          idea.object = op.object;
          idea.context = op.context;
          idea.provenance = Provenance::Human;
          idea.origin_phase = s.phase;
          idea.status = override_entry_status(s);
          s.commit(EventKind::IdeaAdded, Actor::Human,
                   json{{"idea", encode_without_history(idea)},
                        {"reason", op.reason.empty() ? "human override: add" : op.reason},
                        {"by", "human"}});
          return idea.id;
        } else if constexpr (std::is_same_v<T, RemoveIdea>) {
          const auto& idea = require_idea(s, op.idea_id);
          if (idea.status == IdeaStatus::Removed) throw InvalidInput("idea '" + op.idea_id + "' is already Removed");
          s.commit(EventKind::IdeaStatusChanged, Actor::Human,
                   json{{"idea_id", op.idea_id},
                        {"status", to_string(IdeaStatus::Removed)},
                        {"reason", op.reason.empty() ? "human override: remove" : op.reason},
                        {"by", "human"}});
          return op.idea_id;
        } else {
          const auto& idea = require_idea(s, op.idea_id);
          if (idea.status != IdeaStatus::Removed) throw InvalidInput("idea '" + op.idea_id + "' is not Removed");
          auto prior = status_before_removal(idea);
          if (!prior) throw InvalidInput("idea '" + op.idea_id + "' has no prior status");
          s.commit(EventKind::IdeaStatusChanged, Actor::Human,
                   json{{"idea_id", op.idea_id},
                        {"status", to_string(*prior)},
                        {"restore", true},
                        {"reason", op.reason.empty() ? "human override: restore" : op.reason},
                        {"by", "human"}});
          return op.idea_id;
        }
      },
      o);
}

}  // namespace midas
