#pragma once

// Shared generators and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "midas/agents.hpp"
#include "midas/orchestrator.hpp"
#include "midas/persistence.hpp"
#include "midas/runtime_config.hpp"
#include "midas/scripted.hpp"
#include "midas/simulated.hpp"

namespace midas::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(MIDAS_FIXTURES) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> n{0};
    path_ = std::filesystem::temp_directory_path() /
            ("midas-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// --- Vector generators -----------------------------------------------------------

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

inline EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim, const std::string& tag = "test") {
  return EmbeddingVector{normalize(random_vector(rng, dim)), tag};
}

// Points drawn around a few random centers so clusters, borders and noise all occur.
inline std::vector<EmbeddingVector> clustered_vectors(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                                      std::size_t centers, double spread) {
  std::vector<std::vector<double>> c;
  for (std::size_t i = 0; i < centers; ++i) c.push_back(normalize(random_vector(rng, dim)));
  std::uniform_int_distribution<std::size_t> pick(0, centers);
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = pick(rng);
    auto noise = random_vector(rng, dim);
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = (k < centers ? c[k][d] : 0.0) + spread * noise[d];
    out.push_back(EmbeddingVector{normalize(v), "test"});
  }
  return out;
}

// Mutually orthogonal unit vectors (pairwise cosine distance 1).
inline std::vector<EmbeddingVector> orthogonal_vectors(std::size_t n, std::size_t dim) {
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    out.push_back(EmbeddingVector{v, "test"});
  }
  return out;
}

inline Idea make_idea(const std::string& id, const EmbeddingVector& v, Provenance p = Provenance::AIFormulator,
                      IdeaStatus status = IdeaStatus::Raw) {
  Idea idea;
  idea.id = id;
  idea.title = "Idea " + id;
  idea.action = "Lifts the user";
  idea.object = "Seat " + id;
  idea.context = "Home use " + id;
  idea.provenance = p;
  idea.embedding = v;
  idea.status = status;
  return idea;
}

inline std::string idea_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "idea-%06zu", i + 1);
  return buf;
}

// --- Oracles ---------------------------------------------------------------------

// Cosine similarity in long double, no clamping or shortcuts.
inline long double cosine_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct OraclePartition {
  std::vector<bool> core;
  std::vector<bool> noise;
  // Connected components of the core eps-graph, as sets of core indices.
  std::vector<std::set<std::size_t>> core_components;
  // For each non-core, non-noise point: the set of components it touches.
  std::map<std::size_t, std::set<std::size_t>> border_options;
};

// DBSCAN by definition: core points have >= min_pts neighbours within eps
// (self included); clusters are connected components of the core graph; a
// border point is any non-core point within eps of a core point.
inline OraclePartition dbscan_oracle(const std::vector<std::vector<double>>& d, double eps, int min_pts) {
  const std::size_t n = d.size();
  OraclePartition out;
  out.core.assign(n, false);
  out.noise.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += d[i][j] <= eps ? 1 : 0;
    out.core[i] = count >= min_pts;
  }
  std::vector<int> comp(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.core[i] || comp[i] >= 0) continue;
    int c = static_cast<int>(out.core_components.size());
    out.core_components.emplace_back();
    std::vector<std::size_t> stack{i};
    comp[i] = c;
    while (!stack.empty()) {
      std::size_t p = stack.back();
      stack.pop_back();
      out.core_components[c].insert(p);
      for (std::size_t q = 0; q < n; ++q) {
        if (out.core[q] && comp[q] < 0 && d[p][q] <= eps) {
          comp[q] = c;
          stack.push_back(q);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    std::set<std::size_t> touches;
    for (std::size_t j = 0; j < n; ++j) {
      if (out.core[j] && d[i][j] <= eps) touches.insert(static_cast<std::size_t>(comp[j]));
    }
    if (touches.empty()) out.noise[i] = true;
    else out.border_options[i] = touches;
  }
  return out;
}

// True when `labels` is a valid DBSCAN partition per the oracle: noise
// matches, core components map one-to-one onto labels, and each border point
// carries the label of a component it touches.
inline bool partition_matches(const OraclePartition& o, const std::vector<int>& labels, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::map<int, std::size_t> label_to_comp;
  for (std::size_t c = 0; c < o.core_components.size(); ++c) {
    int label = labels[*o.core_components[c].begin()];
    if (label < 0) return fail("core point labelled noise");
    for (auto p : o.core_components[c]) {
      if (labels[p] != label) return fail("core component split across labels");
    }
    if (label_to_comp.count(label)) return fail("two core components share a label");
    label_to_comp[label] = c;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (o.noise[i] != (labels[i] == -1)) return fail("noise mismatch at " + std::to_string(i));
    if (auto it = o.border_options.find(i); it != o.border_options.end()) {
      auto lc = label_to_comp.find(labels[i]);
      if (lc == label_to_comp.end() || !it->second.count(lc->second)) return fail("border point in a foreign cluster");
    }
  }
  if (label_to_comp.size() != o.core_components.size()) return fail("cluster count mismatch");
  return true;
}

// Labels from the oracle with the index-order tie rule: a border point joins
// the touching component whose lowest core index is smallest.
inline std::vector<int> oracle_labels(const OraclePartition& o) {
  std::vector<int> labels(o.core.size(), -1);
  std::vector<std::size_t> order(o.core_components.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return *o.core_components[a].begin() < *o.core_components[b].begin(); });
  std::vector<int> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
  for (std::size_t c = 0; c < o.core_components.size(); ++c) {
    for (auto p : o.core_components[c]) labels[p] = rank[c];
  }
  for (const auto& [p, comps] : o.border_options) {
    int best = -1;
    for (auto c : comps) best = best < 0 ? rank[c] : std::min(best, rank[c]);
    labels[p] = best;
  }
  return labels;
}

// Equal up to a bijective renaming of cluster labels; noise must match exactly.
inline bool same_up_to_relabeling(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [f, fnew] = fwd.emplace(a[i], b[i]);
    auto [g, gnew] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || g->second != a[i]) return false;
  }
  return true;
}

inline std::vector<std::vector<double>> distance_oracle(const std::vector<EmbeddingVector>& v) {
  std::vector<std::vector<double>> d(v.size(), std::vector<double>(v.size(), 0.0));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      d[i][j] = i == j ? 0.0 : static_cast<double>(1.0L - cosine_oracle(v[i].values, v[j].values));
    }
  }
  return d;
}

// --- Sessions --------------------------------------------------------------------

inline const char* kProblemText = "Elderly people struggle to stand up from chairs at home without help.";

inline SessionConfig small_config() {
  SessionConfig c = default_config();
  c.raw_idea_budget = 20;
  c.max_rounds = 3;
  c.mint_list_size = 5;
  c.scout_top_k = 6;
  return c;
}

struct SimRun {
  std::unique_ptr<ProviderHub> hub;
  std::unique_ptr<ArtifactStore> artifacts;
  std::unique_ptr<Professor> professor;
  Session session;
};

inline SimRun simulated_run(std::uint64_t seed, SessionConfig config = small_config(),
                            std::vector<std::string> human_ideas = {"A spring seat that pushes the user up"},
                            Transports transports = {}) {
  SimRun r;
  if (!transports.chat) transports = simulated_transports(seed);
  r.hub = std::make_unique<ProviderHub>(transports, config, seed, no_sleep());
  r.artifacts = std::make_unique<ArtifactStore>();
  r.professor = std::make_unique<Professor>(*r.hub, r.artifacts.get());
  r.session = new_session(kProblemText, config, seed);
  for (const auto& idea : human_ideas) Professor::submit_idea(r.session, idea);
  return r;
}

// --- PS1 fixture -----------------------------------------------------------------

struct Ps1Run {
  RuntimeConfig config;
  RuntimeTransports transports;
  std::unique_ptr<ProviderHub> hub;
  std::unique_ptr<ArtifactStore> artifacts;
  std::unique_ptr<Professor> professor;
  Session session;
};

inline std::unique_ptr<Ps1Run> ps1_setup(std::uint64_t seed = 0,
                                         const std::function<Transports(Transports)>& wrap = {}) {
  auto r = std::make_unique<Ps1Run>();
  r->config = load_runtime_config(fixture("ps1/config.json"));
  r->transports = build_transports(r->config, seed);
  Transports t = wrap ? wrap(r->transports.transports) : r->transports.transports;
  r->hub = std::make_unique<ProviderHub>(t, r->config.session, seed, no_sleep());
  r->artifacts = std::make_unique<ArtifactStore>();
  r->professor = std::make_unique<Professor>(*r->hub, r->artifacts.get());
  ProblemInput input = load_problem(fixture("ps1/problem.json"));
  r->session = new_session(input.problem_text, r->config.session, seed);
  for (const auto& idea : input.ideas) Professor::submit_idea(r->session, idea);
  return r;
}

inline std::unique_ptr<Ps1Run> ps1_run(std::uint64_t seed = 0) {
  auto r = ps1_setup(seed);
  r->professor->run_to_completion(r->session);
  return r;
}

// Ids of ideas whose status history records `status` set by `agent`.
inline std::set<std::string> decided(const Session& s, IdeaStatus status, const std::string& agent) {
  std::set<std::string> out;
  for (const auto& idea : s.vaults.idea_vault) {
    for (const auto& c : idea.status_history) {
      if (c.decision == status && c.by == agent) out.insert(idea.id);
    }
  }
  return out;
}

}  // namespace midas::testing
