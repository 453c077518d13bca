#pragma once

// File-backed session store and report export.
//
// Layout, one directory per session:
//   <root>/<session id>/session.json
//   <root>/<session id>/artifacts/<ref>.<ext>, <ref>.prompt.txt
//   <root>/<session id>/prompts-used/<version>/{prompts,schemas}/...

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "midas/orchestrator.hpp"
#include "midas/session.hpp"

namespace midas {

inline constexpr int kSchemaVersion = 2;

// Canonical session.json text: two-space indent, trailing newline.
std::string serialize(const Session& s);

// Parses a session document of any supported schema version. Older versions
// are migrated (gaining a schema_migrated event); every version is
// re-validated and checked against a replay of its event log. Throws
// DecodeError naming the offending field.
Session parse_session(std::string_view text);

// Upgrades a schema_version 1 document. The result carries a trailing
// schema_migrated event.
Session migrate_v1(const json& doc);

class Store {
 public:
  explicit Store(std::filesystem::path root);

  // Atomic write of session.json (temp file + rename), artifacts and the
  // prompt assets in use. Returns the session id.
  std::string save(const Session& s, const ArtifactStore* artifacts = nullptr) const;

  // Throws NotFound for unknown ids.
  Session load(const std::string& id) const;
  void load_artifacts(const std::string& id, ArtifactStore& into) const;

  bool contains(const std::string& id) const;
  std::vector<std::string> list() const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path session_dir(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

enum class ReportFormat { Json, Markdown, PlotData };
ReportFormat parse_report_format(std::string_view text);

// Per-agent output counts summed from agent_completed events. Steps undone
// by a rerun (events after its snapshot) are dropped.
std::map<AgentKind, std::size_t> event_log_counts(const Session& s);

// The same counts recomputed from vault contents and status histories.
std::map<AgentKind, std::size_t> vault_counts(const Session& s);

// Ideas shown in the cluster view: everything embedded and not invalidated
// by a rerun.
std::vector<Idea> plot_ideas(const Session& s);
json session_plot_data(const Session& s);

json report_json(const Session& s);

// Throws PhaseError before Assessment.
std::string export_report(const Session& s, ReportFormat format);

}  // namespace midas
