#include "midas/persistence.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "midas/assets.hpp"
#include "midas/clustering.hpp"
#include "midas/hash.hpp"

namespace midas {

namespace fs = std::filesystem;

namespace {

// Human-readable JSON pointer -> "$.a.b[3]" style path.
std::string pointer_to_path(const std::string& pointer) {
  std::string out = "$";
  std::size_t pos = 1;
  while (pos <= pointer.size() && !pointer.empty()) {
    std::size_t next = pointer.find('/', pos);
    std::string token = pointer.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    bool index = !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); });
    out += index ? "[" + token + "]" : "." + token;
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

void check_vault_invariants(const Session& s) {
  for (const auto& p : s.vaults.problem_vault) validate(p);
  for (const auto& i : s.vaults.idea_vault) {
    validate_aoc(i.title, i.action, i.object, i.context);
    if (i.embedding) validate_unit_norm(*i.embedding);
  }
  for (const auto& l : s.vaults.literature_vault) {
    validate(l);
    if (l.embedding) validate_unit_norm(*l.embedding);
  }
  for (const auto& c : s.vaults.concept_vault) validate(c);
}

Session decode_v2(const json& doc) {
  Session stored;
  try {
    stored = decode_session(Reader(doc));
    check_vault_invariants(stored);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError("$", e.what());
  }
  Session replayed;
  try {
    replayed = replay(stored.event_log);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError("$.event_log", std::string("event log does not replay: ") + e.what());
  }
  json diff = json::diff(encode(replayed), doc);
  if (!diff.empty()) {
    throw DecodeError(pointer_to_path(diff.front().value("path", "")), "stored state disagrees with event log replay");
  }
  return replayed;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  static std::atomic<std::uint64_t> counter{0};
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into " + path.string());
  }
}

std::string extension_for(const std::string& media_type) {
  if (media_type == "image/png") return ".png";
  if (media_type == "image/jpeg") return ".jpg";
  if (media_type == "image/webp") return ".webp";
  return ".bin";
}

std::string media_type_for(const std::string& ext) {
  if (ext == ".png") return "image/png";
  if (ext == ".jpg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

bool valid_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

bool rerun_invalidated(const Idea& idea) {
  return std::any_of(idea.status_history.begin(), idea.status_history.end(), [](const StatusChange& c) {
    return c.by == "rerun" && c.decision == IdeaStatus::Removed;
  });
}

bool decided_by(const Idea& idea, IdeaStatus status, std::string_view agent) {
  return std::any_of(idea.status_history.begin(), idea.status_history.end(),
                     [&](const StatusChange& c) { return c.decision == status && c.by == agent; });
}

std::string md_escape(std::string text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace

std::string serialize(const Session& s) { return encode(s).dump(2) + "\n"; }

Session migrate_v1(const json& doc) {
  Reader r(doc);
  if (r.at("schema_version").integer() != 1) r.at("schema_version").fail("expected schema_version 1");
  std::string id = r.at("session_id").nonempty_str();
  Session s;
  auto events = r.at("events").items();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Reader& ev = events[i];
    SessionEvent e;
    e.index = ev.at("seq").unsigned_integer();
    if (e.index != i) ev.at("seq").fail("events are not contiguous");
    e.kind = decode_event_kind(ev.at("type"));
    e.actor = decode_actor(ev.at("actor"));
    e.phase = s.phase;
    e.payload = ev.at("data").raw();
    if (e.kind == EventKind::SessionCreated) e.payload["id"] = id;
    if (auto ts = ev.maybe("timestamp")) e.wall_clock = ts->str();
    s.event_log.push_back(e);
    try {
      apply_event(s, s.event_log.back());
    } catch (const DecodeError&) {
      throw;
    } catch (const Error& err) {
      throw DecodeError(ev.path(), err.what());
    }
  }
  if (s.event_log.empty()) r.at("events").fail("must be non-empty");
  s.commit(EventKind::SchemaMigrated, Actor::System, json{{"from", 1}, {"to", kSchemaVersion}});
  return s;
}

Session parse_session(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError("$", std::string("malformed JSON: ") + e.what());
  }
  Reader r(doc);
  auto version = r.at("schema_version");
  std::int64_t v = version.integer();
  if (v > kSchemaVersion) version.fail("schema_version " + std::to_string(v) + " is newer than supported");
  if (v == 1) return migrate_v1(doc);
  if (v != kSchemaVersion) version.fail("unsupported schema_version " + std::to_string(v));
  return decode_v2(doc);
}

// --- Store -----------------------------------------------------------------------

Store::Store(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path Store::session_dir(const std::string& id) const {
  if (!valid_id(id)) throw InvalidInput("invalid session id '" + id + "'");
  return root_ / id;
}

std::string Store::save(const Session& s, const ArtifactStore* artifacts) const {
  fs::path dir = session_dir(s.id);
  fs::create_directories(dir / "artifacts");
  if (artifacts) {
    for (const auto& [ref, art] : artifacts->all()) {
      fs::path file = dir / "artifacts" / (ref + extension_for(art.media_type));
      if (!fs::exists(file)) write_atomic(file, art.bytes);
      fs::path prompt = dir / "artifacts" / (ref + ".prompt.txt");
      if (!fs::exists(prompt)) write_atomic(prompt, art.prompt);
    }
  }
  fs::path prompts = dir / "prompts-used" / "prompts" / std::string(assets::kVersion);
  if (!fs::exists(prompts)) {
    for (const auto& [path, body] : assets::embedded()) {
      if (path.find(std::string(assets::kVersion) + "/") == std::string::npos) continue;
      fs::path target = dir / "prompts-used" / fs::path(path);
      fs::create_directories(target.parent_path());
      write_atomic(target, body);
    }
  }
  write_atomic(dir / "session.json", serialize(s));
  return s.id;
}

Session Store::load(const std::string& id) const {
  fs::path file = session_dir(id) / "session.json";
  if (!fs::exists(file)) throw NotFound("unknown session '" + id + "'");
  return parse_session(read_file(file));
}

void Store::load_artifacts(const std::string& id, ArtifactStore& into) const {
  fs::path dir = session_dir(id) / "artifacts";
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    fs::path p = entry.path();
    std::string name = p.filename().string();
    if (name.size() > 11 && name.ends_with(".prompt.txt")) continue;
    if (name.find(".tmp-") != std::string::npos) continue;
    std::string ref = p.stem().string();
    ImageResult image{read_file(p), media_type_for(p.extension().string())};
    fs::path prompt_file = dir / (ref + ".prompt.txt");
    std::string prompt = fs::exists(prompt_file) ? read_file(prompt_file) : std::string();
    into.insert(ImageArtifact{ref, image.media_type, image.bytes, prompt});
  }
}

bool Store::contains(const std::string& id) const {
  return valid_id(id) && fs::exists(root_ / id / "session.json");
}

std::vector<std::string> Store::list() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "session.json")) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- Reports ---------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  if (text == "plot-data" || text == "plot") return ReportFormat::PlotData;
  throw InvalidInput("unknown report format '" + std::string(text) + "'");
}

std::map<AgentKind, std::size_t> event_log_counts(const Session& s) {
  struct Entry {
    std::uint64_t index;
    AgentKind agent;
    std::size_t count;
  };
  std::vector<Entry> entries;
  for (const auto& e : s.event_log) {
    if (e.kind == EventKind::AgentCompleted) {
      Reader r(e.payload, "$.payload");
      entries.push_back({e.index, decode_agent_kind(r.at("agent")), static_cast<std::size_t>(r.at("output_count").unsigned_integer())});
    } else if (e.kind == EventKind::RerunStarted) {
      std::uint64_t snapshot = Reader(e.payload, "$.payload").at("snapshot_event").unsigned_integer();
      std::erase_if(entries, [&](const Entry& x) { return x.index > snapshot; });
    }
  }
  std::map<AgentKind, std::size_t> out;
  for (AgentKind a : {AgentKind::Scribe, AgentKind::Muse, AgentKind::Forge, AgentKind::Gatekeeper, AgentKind::Librarian,
                      AgentKind::Challenger, AgentKind::Mint, AgentKind::Scout, AgentKind::Navigator, AgentKind::Sentinel,
                      AgentKind::Director, AgentKind::Leo}) {
    out[a] = 0;
  }
  for (const auto& x : entries) out[x.agent] += x.count;
  return out;
}

std::map<AgentKind, std::size_t> vault_counts(const Session& s) {
  std::map<AgentKind, std::size_t> out = event_log_counts(Session{});
  const Vaults& v = s.vaults;
  out[AgentKind::Scribe] = v.problem_vault.size();
  for (const auto& idea : v.idea_vault) {
    if (rerun_invalidated(idea)) continue;
    if (!idea.status_history.empty() && idea.status_history.front().by == "muse") ++out[AgentKind::Muse];
    if (idea.provenance == Provenance::AIFormulator || idea.provenance == Provenance::AIExplorer) ++out[AgentKind::Forge];
    if (decided_by(idea, IdeaStatus::Shortlisted, "gatekeeper")) ++out[AgentKind::Gatekeeper];
    if (decided_by(idea, IdeaStatus::GloballyNovel, "challenger")) ++out[AgentKind::Challenger];
    if (idea.provenance == Provenance::NavigatorSynthesized && !decided_by(idea, IdeaStatus::Removed, "navigator")) {
      ++out[AgentKind::Navigator];
    }
    if (decided_by(idea, IdeaStatus::Curated, "sentinel")) ++out[AgentKind::Sentinel];
  }
  for (const auto& lit : v.literature_vault) {
    if (!lit.invalidated && lit.retrieval_mode == RetrievalMode::Search) ++out[AgentKind::Librarian];
  }
  if (s.mint_lists) out[AgentKind::Mint] = s.mint_lists->actions.size();
  if (s.feasibility) out[AgentKind::Scout] = s.feasibility->pairs.size();
  for (const auto& c : v.concept_vault) {
    if (c.invalidated) continue;
    ++out[AgentKind::Director];
    if (c.rendering_ref) ++out[AgentKind::Leo];
  }
  return out;
}

std::vector<Idea> plot_ideas(const Session& s) {
  std::vector<Idea> out;
  for (const auto& idea : s.vaults.idea_vault) {
    if (idea.embedding && !rerun_invalidated(idea)) out.push_back(idea);
  }
  return out;
}

json session_plot_data(const Session& s) {
  return plot_data(plot_ideas(s), s.config.gatekeeper_eps, s.config.gatekeeper_min_pts, s.seed);
}

json report_json(const Session& s) {
  json counts = json::object();
  for (const auto& [agent, n] : event_log_counts(s)) counts[std::string(to_string(agent))] = n;

  json status_counts = json::object();
  for (IdeaStatus st : {IdeaStatus::Raw, IdeaStatus::Shortlisted, IdeaStatus::GloballyNovel, IdeaStatus::Curated,
                        IdeaStatus::Removed}) {
    status_counts[std::string(to_string(st))] = s.vaults.ideas_with_status(st).size();
  }

  json curated = json::array();
  for (const auto& idea : s.vaults.ideas_with_status(IdeaStatus::Curated)) {
    json j{{"id", idea.id},         {"title", idea.title},       {"action", idea.action},
           {"object", idea.object}, {"context", idea.context},   {"provenance", to_string(idea.provenance)}};
    curated.push_back(j);
  }
  json concepts = json::array();
  for (const auto& c : s.vaults.live_concepts()) concepts.push_back(encode(c));

  std::size_t warnings = std::count_if(s.event_log.begin(), s.event_log.end(),
                                       [](const SessionEvent& e) { return e.kind == EventKind::AgentWarning; });
  json usage = json::object();
  for (const auto& [role, u] : s.usage) usage[role] = json{{"calls", u.calls}, {"tokens", u.tokens}};

  json plot = session_plot_data(s);
  return json{{"session_id", s.id},
              {"phase", to_string(s.phase)},
              {"phase_state", to_string(s.phase_state)},
              {"round", s.round},
              {"problem", s.vaults.current_problem() ? encode(*s.vaults.current_problem()) : json()},
              {"counts", counts},
              {"status_counts", status_counts},
              {"diversity", plot.at("report")},
              {"n_clusters", plot.at("n_clusters")},
              {"curated", curated},
              {"concepts", concepts},
              {"usage", usage},
              {"warnings", warnings},
              {"events", s.event_log.size()}};
}

std::string export_report(const Session& s, ReportFormat format) {
  if (phase_index(s.phase) < phase_index(Phase::Assessment)) {
    throw PhaseError("reports are available from the Assessment phase onwards");
  }
  if (format == ReportFormat::Json) return report_json(s).dump(2) + "\n";
  if (format == ReportFormat::PlotData) return session_plot_data(s).dump(2) + "\n";

  json r = report_json(s);
  std::ostringstream md;
  md << "# Session " << s.id << "\n\n";
  md << "Phase: " << to_string(s.phase) << " (" << to_string(s.phase_state) << "), round " << s.round << "\n\n";
  if (const auto* p = s.vaults.current_problem()) {
    md << "## Problem\n\n";
    md << "- Activity: " << p->activity << "\n";
    md << "- Item: " << p->item << "\n";
    md << "- Contradiction: " << p->contradiction << "\n";
    md << "- Criteria: ";
    for (std::size_t i = 0; i < p->criteria.size(); ++i) md << (i ? "; " : "") << p->criteria[i];
    md << "\n- Constraints: ";
    for (std::size_t i = 0; i < p->constraints.size(); ++i) md << (i ? "; " : "") << p->constraints[i];
    md << "\n\n";
  }
  md << "## Agent outputs\n\n| Agent | Outputs |\n|---|---|\n";
  for (const auto& [agent, n] : event_log_counts(s)) md << "| " << to_string(agent) << " | " << n << " |\n";
  const json& d = r.at("diversity");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "idea sparsity %.4f, cluster sparsity %.4f, noise fraction %.4f, %d clusters",
                d.at("idea_sparsity").get<double>(), d.at("cluster_sparsity").get<double>(),
                d.at("noise_fraction").get<double>(), r.at("n_clusters").get<int>());
  md << "\n## Diversity\n\n" << buf << "\n\n## Curated ideas\n\n";
  md << "| ID | Title | Action | Object | Context | Provenance |\n|---|---|---|---|---|---|\n";
  for (const auto& idea : s.vaults.ideas_with_status(IdeaStatus::Curated)) {
    md << "| " << idea.id << " | " << md_escape(idea.title) << " | " << md_escape(idea.action) << " | "
       << md_escape(idea.object) << " | " << md_escape(idea.context) << " | " << to_string(idea.provenance) << " |\n";
  }
  auto concepts = s.vaults.live_concepts();
  if (!concepts.empty()) md << "\n## Concepts\n";
  for (const auto& c : concepts) {
    const Idea* idea = s.vaults.find_idea(c.idea_id);
    md << "\n### " << c.id << ": " << (idea ? idea->title : c.idea_id) << "\n\n";
    md << "- Principle: " << c.principle << "\n- Features: ";
    for (std::size_t i = 0; i < c.features.size(); ++i) md << (i ? "; " : "") << c.features[i];
    md << "\n- Implementation: ";
    for (std::size_t i = 0; i < c.implementation.size(); ++i) md << (i ? "; " : "") << c.implementation[i];
    md << "\n- Characteristics: ";
    for (std::size_t i = 0; i < c.characteristics.size(); ++i) md << (i ? "; " : "") << c.characteristics[i];
    md << "\n";
    if (c.rendering_ref) md << "- Rendering: artifacts/" << *c.rendering_ref << "\n";
  }
  return md.str();
}

}  // namespace midas
