#include "midas/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "midas/assets.hpp"
#include "midas/embedding.hpp"

namespace midas {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> dedupe_ci(const std::vector<std::string>& items) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& raw : items) {
    std::string item = trim(raw);
    if (item.empty()) continue;
    if (seen.insert(lower(item)).second) out.push_back(item);
  }
  return out;
}

std::string idea_line(const Idea& idea) {
  return idea.title + ": " + idea.action + " / " + idea.object + " / " + idea.context;
}

std::optional<std::string> exact_count(const json& v, const char* key, std::size_t n) {
  if (v.at(key).size() != n) {
    return std::string("expected exactly ") + std::to_string(n) + " entries in \"" + key + "\", got " +
           std::to_string(v.at(key).size());
  }
  return std::nullopt;
}

}  // namespace

// --- Structured output -------------------------------------------------------

json parse_reply(const std::string& text) {
  std::string body = trim(text);
  if (body.rfind("```", 0) == 0) {
    auto nl = body.find('\n');
    auto fence = body.rfind("```");
    if (nl != std::string::npos && fence != std::string::npos && fence > nl) body = trim(body.substr(nl + 1, fence - nl - 1));
  }
  json out = json::parse(body, nullptr, false);
  if (out.is_discarded()) {
    auto open = body.find('{');
    auto close = body.rfind('}');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      out = json::parse(body.substr(open, close - open + 1), nullptr, false);
    }
  }
  if (out.is_discarded()) throw DecodeError("$", "reply is not valid JSON");
  return out;
}

StructuredResult structured_call(ProviderHub& hub, ProviderRole role, std::string_view template_name,
                                 std::string_view schema_name, json vars, const SemanticCheck& check,
                                 bool accept_last_valid) {
  const json& schema = assets::schema(schema_name);
  vars["schema"] = schema.dump(2);
  const std::string prompt = assets::render(assets::prompt_template(template_name), vars);
  const int max_repairs = hub.config().max_repair_retries;

  std::string current = prompt;
  std::string error;
  std::string raw;
  std::optional<json> last_valid;
  for (int repair = 0; repair <= max_repairs; ++repair) {
    AgentRequest request;
    request.role = role;
    request.prompt = current;
    request.response_schema = std::string(schema_name);
    request.vars = vars;
    request.vars["repair"] = repair;
    raw = hub.chat(std::move(request)).text;

    std::optional<std::string> problem;
    json value;
    try {
      value = parse_reply(raw);
      problem = schema_violation(value, schema);
      if (!problem) {
        last_valid = value;
        if (check) problem = check(value);
      }
    } catch (const DecodeError& e) {
      problem = e.what();
    }
    if (!problem) return StructuredResult{std::move(value), raw, repair, std::nullopt};
    error = *problem;
    current = assets::render(assets::prompt_template("repair"),
                             json{{"original_prompt", prompt}, {"error", error}, {"previous_response", raw}});
  }
  if (accept_last_valid && last_valid) return StructuredResult{*last_valid, raw, max_repairs, error};
  throw StructuredOutputError(std::string(to_string(role)) + ": no valid reply after " + std::to_string(max_repairs) +
                                  " repair attempts: " + error,
                              raw);
}

json problem_vars(const ProblemStatement& p) {
  return json{{"activity", p.activity},
              {"item", p.item},
              {"contradiction", p.contradiction},
              {"criteria", p.criteria},
              {"constraints", p.constraints}};
}

IdeaDraft decode_draft(const Reader& r, Provenance provenance) {
  IdeaDraft d{trim(r.at("title").str()), trim(r.at("action").str()), trim(r.at("object").str()),
              trim(r.at("context").str()), provenance};
  validate_aoc(d.title, d.action, d.object, d.context);
  return d;
}

// --- Scribe / Muse / Forge -----------------------------------------------------

ProblemStatement scribe_structure(const std::string& raw_problem, ProviderHub& hub) {
  if (trim(raw_problem).empty()) throw InvalidInput("problem text must be non-empty");
  auto out = structured_call(hub, ProviderRole::Scribe, "scribe", "scribe", json{{"problem_text", raw_problem}});
  Reader r(out.value);
  ProblemStatement p;
  p.raw_text = raw_problem;
  p.activity = trim(r.at("activity").str());
  p.item = trim(r.at("item").str());
  p.contradiction = trim(r.at("contradiction").str());
  p.criteria = r.at("criteria").strings();
  p.constraints = r.at("constraints").strings();
  return p;
}

IdeaDraft muse_structure(const std::string& raw_idea, const ProblemStatement& problem, ProviderHub& hub) {
  if (trim(raw_idea).empty()) throw InvalidInput("idea text must be non-empty");
  json vars = problem_vars(problem);
  vars["idea_text"] = raw_idea;
  auto out = structured_call(hub, ProviderRole::Muse, "muse", "aoc_idea", vars, [](const json& v) -> std::optional<std::string> {
    try {
      decode_draft(Reader(v), Provenance::Human);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  });
  return decode_draft(Reader(out.value), Provenance::Human);
}

namespace {

SemanticCheck idea_list_check(std::size_t min, std::size_t max) {
  return [=](const json& v) -> std::optional<std::string> {
    const auto n = v.at("ideas").size();
    if (n < min || n > max) {
      if (min == max) return exact_count(v, "ideas", min);
      return "expected between " + std::to_string(min) + " and " + std::to_string(max) + " ideas, got " +
             std::to_string(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      try {
        decode_draft(Reader(v.at("ideas")[i], "$.ideas[" + std::to_string(i) + "]"), Provenance::Human);
      } catch (const Error& e) {
        return std::string(e.what());
      }
    }
    return std::nullopt;
  };
}

std::vector<IdeaDraft> drafts_of(const json& v, Provenance provenance) {
  std::vector<IdeaDraft> out;
  for (const auto& item : Reader(v).at("ideas").items()) out.push_back(decode_draft(item, provenance));
  return out;
}

}  // namespace

ForgeBatch forge_generate(const ProblemStatement& problem, ProviderHub& hub, const std::vector<Idea>& prior_survivors,
                          int round, int formulator_count, int explorer_count) {
  json vars = problem_vars(problem);
  json prior = json::array();
  for (const auto& idea : prior_survivors) prior.push_back(idea_line(idea));
  if (prior.empty()) prior.push_back("(none yet)");
  vars["prior_ideas"] = prior;
  vars["round"] = round;

  ForgeBatch batch;
  struct Job {
    ProviderRole role;
    const char* name;
    int count;
    Provenance provenance;
    std::vector<IdeaDraft>* out;
  };
  std::vector<Job> jobs;
  if (formulator_count > 0) {
    jobs.push_back({ProviderRole::ForgeFormulator, "forge_formulator", formulator_count, Provenance::AIFormulator, &batch.formulator});
  }
  if (explorer_count > 0) {
    jobs.push_back({ProviderRole::ForgeExplorer, "forge_explorer", explorer_count, Provenance::AIExplorer, &batch.explorer});
  }
  parallel_for(jobs.size(), 2, [&](std::size_t i) {
    const Job& job = jobs[i];
    json v = vars;
    v["count"] = job.count;
    auto n = static_cast<std::size_t>(job.count);
    auto out = structured_call(hub, job.role, job.name, "idea_list", v, idea_list_check(n, n));
    *job.out = drafts_of(out.value, job.provenance);
  });
  return batch;
}

// --- Gatekeeper ----------------------------------------------------------------

GatekeeperResult gatekeeper_filter(const std::vector<Idea>& pool, double eps, int min_pts) {
  GatekeeperResult out;
  for (const auto& idea : pool) {
    if (idea.status != IdeaStatus::Raw && idea.status != IdeaStatus::Shortlisted) {
      throw InvalidInput("gatekeeper pool holds idea '" + idea.id + "' in status " + std::string(to_string(idea.status)));
    }
    if (!idea.embedding) throw InvalidInput("idea '" + idea.id + "' is not embedded");
    out.inputs.push_back(idea.id);
  }
  out.assignment.eps = eps;
  out.assignment.min_pts = min_pts;

  auto promote = [&](const Idea& idea, const std::string& reason) {
    out.decisions.push_back({idea.id, IdeaStatus::Shortlisted, reason});
    out.shortlisted.push_back(idea.id);
  };

  if (pool.size() < 2) {
    out.warnings.push_back("fewer than 2 ideas in the pool; passing through");
    out.assignment.labels.assign(pool.size(), -1);
    for (const auto& idea : pool) {
      if (idea.status == IdeaStatus::Raw) promote(idea, "pass-through: pool too small to cluster");
    }
    return out;
  }

  std::vector<EmbeddingVector> vectors;
  for (const auto& idea : pool) vectors.push_back(*idea.embedding);
  SquareMatrix d = distance_matrix(vectors);
  out.assignment = dbscan(d, eps, min_pts);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(out.assignment.n_clusters));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    int label = out.assignment.labels[i];
    if (label < 0) {
      if (pool[i].status == IdeaStatus::Raw) promote(pool[i], "noise point: locally novel");
    } else {
      members[static_cast<std::size_t>(label)].push_back(i);
    }
  }
  std::vector<std::string> ids;
  for (const auto& idea : pool) ids.push_back(idea.id);

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& group = members[c];
    std::optional<std::size_t> anchor;
    for (std::size_t i : group) {
      if (pool[i].status == IdeaStatus::Shortlisted) {
        anchor = i;
        break;
      }
    }
    if (!anchor) {
      anchor = medoid_index(d, group, ids);
      promote(pool[*anchor], "medoid of cluster " + std::to_string(c));
    }
    for (std::size_t i : group) {
      if (i == *anchor || pool[i].status != IdeaStatus::Raw) continue;
      out.decisions.push_back({pool[i].id, IdeaStatus::Removed, "near-duplicate of " + pool[*anchor].id});
    }
  }
  // Commit order follows the pool order.
  std::stable_sort(out.decisions.begin(), out.decisions.end(), [&](const auto& a, const auto& b) {
    auto pos = [&](const std::string& id) { return std::find(ids.begin(), ids.end(), id) - ids.begin(); };
    return pos(a.idea_id) < pos(b.idea_id);
  });
  std::stable_sort(out.shortlisted.begin(), out.shortlisted.end(), [&](const auto& a, const auto& b) {
    return std::find(ids.begin(), ids.end(), a) < std::find(ids.begin(), ids.end(), b);
  });
  return out;
}

GatekeeperResult gatekeeper_filter(const Session& session) {
  std::vector<Idea> pool;
  for (const auto& idea : session.vaults.idea_vault) {
    if (idea.status == IdeaStatus::Raw || idea.status == IdeaStatus::Shortlisted) pool.push_back(idea);
  }
  return gatekeeper_filter(pool, session.config.gatekeeper_eps, session.config.gatekeeper_min_pts);
}

// --- Librarian / Challenger ----------------------------------------------------

std::string librarian_query(const ProblemStatement& problem) {
  return "Existing products, patents and research for: " + problem.activity + " (" + problem.item + ")";
}

LibrarianResult librarian_gather(const ProblemStatement& problem, ProviderHub& hub,
                                 const std::vector<LiteratureEntry>& manual_entries, bool search) {
  LibrarianResult out;
  for (auto entry : manual_entries) {
    entry.retrieval_mode = RetrievalMode::Manual;
    validate(entry);
    out.entries.push_back(std::move(entry));
  }
  if (!search) return out;

  std::vector<SearchResult> results;
  try {
    results = hub.search(librarian_query(problem));
    out.searched = true;
  } catch (const ProviderError& e) {
    out.warnings.push_back(std::string("search unavailable, manual entries only: ") + e.what());
    return out;
  }
  if (results.empty()) {
    out.warnings.push_back("search returned no results");
    return out;
  }

  json vars = problem_vars(problem);
  json lines = json::array();
  json items = json::array();
  for (const auto& r : results) {
    lines.push_back(r.title + " | " + r.url + " | " + r.snippet);
    items.push_back(json{{"title", r.title}, {"url", r.url}, {"snippet", r.snippet}});
  }
  vars["search_results"] = lines;
  vars["results"] = items;
  vars["limit"] = hub.config().search_limit;
  const auto limit = static_cast<std::size_t>(hub.config().search_limit);
  auto reply = structured_call(hub, ProviderRole::Librarian, "librarian", "literature_list", vars,
                               [&](const json& v) -> std::optional<std::string> {
                                 if (v.at("entries").size() > limit) {
                                   return "expected at most " + std::to_string(limit) + " entries";
                                 }
                                 return std::nullopt;
                               });
  for (const auto& item : Reader(reply.value).at("entries").items()) {
    LiteratureEntry e;
    e.title = trim(item.at("title").str());
    e.action = trim(item.at("action").str());
    e.object = trim(item.at("object").str());
    e.context = trim(item.at("context").str());
    e.source_url = trim(item.at("source_url").str());
    e.retrieval_mode = RetrievalMode::Search;
    validate(e);
    out.entries.push_back(std::move(e));
  }
  return out;
}

ChallengerResult challenger_filter(const std::vector<Idea>& shortlisted, const std::vector<LiteratureEntry>& literature,
                                   double threshold) {
  ChallengerResult out;
  for (const auto& idea : shortlisted) {
    if (!idea.embedding) throw InvalidInput("idea '" + idea.id + "' is not embedded");
    out.inputs.push_back(idea.id);
  }
  std::vector<const LiteratureEntry*> corpus;
  for (const auto& lit : literature) {
    if (lit.invalidated) continue;
    if (!lit.embedding) throw InvalidInput("literature '" + lit.id + "' is not embedded");
    corpus.push_back(&lit);
  }
  if (corpus.empty()) {
    out.warnings.push_back("literature vault is empty; passing through");
    out.survivors = out.inputs;
    return out;
  }
  for (const auto& idea : shortlisted) {
    double best = -2.0;
    const LiteratureEntry* nearest = nullptr;
    for (const auto* lit : corpus) {
      double s = cosine_similarity(*idea.embedding, *lit->embedding);
      if (s > best) {
        best = s;
        nearest = lit;
      }
    }
    if (best < threshold) {
      out.survivors.push_back(idea.id);
    } else {
      out.rejected.push_back({idea.id, nearest->id, best});
    }
  }
  return out;
}

ChallengerResult challenger_filter(const Session& session) {
  return challenger_filter(session.vaults.ideas_with_status(IdeaStatus::Shortlisted), session.vaults.live_literature(),
                           session.config.challenger_threshold);
}

// --- Mint / Scout --------------------------------------------------------------

MintResult mint_extract(const std::vector<Idea>& ideas, ProviderHub& hub, int list_size) {
  if (ideas.empty()) throw InvalidInput("mint needs at least one idea");
  if (list_size < 1) throw InvalidInput("mint list size must be positive");
  json lines = json::array();
  for (const auto& idea : ideas) lines.push_back(idea_line(idea));
  const auto n = static_cast<std::size_t>(list_size);
  auto check = [n](const json& v) -> std::optional<std::string> {
    auto a = dedupe_ci(v.at("actions").get<std::vector<std::string>>());
    auto o = dedupe_ci(v.at("objects").get<std::vector<std::string>>());
    if (a.size() < n || o.size() < n) {
      return "expected " + std::to_string(n) + " distinct actions and objects, got " + std::to_string(a.size()) +
             " and " + std::to_string(o.size());
    }
    return std::nullopt;
  };
  auto reply = structured_call(hub, ProviderRole::Mint, "mint", "mint", json{{"ideas", lines}, {"list_size", list_size}},
                               check, true);
  MintResult out;
  out.actions = dedupe_ci(reply.value.at("actions").get<std::vector<std::string>>());
  out.objects = dedupe_ci(reply.value.at("objects").get<std::vector<std::string>>());
  if (out.actions.size() > n) out.actions.resize(n);
  if (out.objects.size() > n) out.objects.resize(n);
  if (reply.accepted_with) out.warnings.push_back("short mint lists accepted: " + *reply.accepted_with);
  return out;
}

std::optional<int> parse_score(const json& value) {
  double v = 0.0;
  if (value.is_number_integer()) {
    v = static_cast<double>(value.get<std::int64_t>());
  } else if (value.is_number_float()) {
    v = value.get<double>();
  } else if (value.is_string()) {
    std::string s = trim(value.get<std::string>());
    if (auto slash = s.find('/'); slash != std::string::npos) {
      if (trim(s.substr(slash + 1)) != "10") return std::nullopt;
      s = trim(s.substr(0, slash));
    }
    if (s.empty() || s.size() > 2 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
      return std::nullopt;
    }
    v = std::stoi(s);
  } else {
    return std::nullopt;
  }
  if (v != std::floor(v) || v < 1 || v > 10) return std::nullopt;
  return static_cast<int>(v);
}

std::vector<ActionObjectPair> sort_pairs(std::vector<ActionObjectPair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ActionObjectPair& a, const ActionObjectPair& b) {
    if (a.feasibility_score != b.feasibility_score) return a.feasibility_score > b.feasibility_score;
    if (a.action_index != b.action_index) return a.action_index < b.action_index;
    return a.object_index < b.object_index;
  });
  return pairs;
}

namespace {

std::optional<std::string> row_problem(const json& v, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto& s : v.at("scores")) {
    auto idx = s.at("object_index").get<std::int64_t>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) return "object_index " + std::to_string(idx) + " out of range";
    if (seen[static_cast<std::size_t>(idx)]) return "object_index " + std::to_string(idx) + " scored twice";
    seen[static_cast<std::size_t>(idx)] = 1;
    if (!parse_score(s.at("score"))) return "unparseable score " + s.at("score").dump() + " at object_index " + std::to_string(idx);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) return "object_index " + std::to_string(i) + " missing";
  }
  return std::nullopt;
}

}  // namespace

ScoutResult scout_score(const std::vector<std::string>& actions, const std::vector<std::string>& objects,
                        const ProblemStatement& problem, ProviderHub& hub, bool batched) {
  if (actions.empty() || objects.empty()) throw InvalidInput("scout needs non-empty action and object lists");
  ScoutResult out;
  out.grid.actions = actions;
  out.grid.objects = objects;
  const std::size_t na = actions.size();
  const std::size_t no = objects.size();
  std::vector<ActionObjectPair> pairs(na * no);
  std::vector<std::vector<std::string>> warnings(batched ? na : na * no);
  const json base = problem_vars(problem);
  const int parallel = hub.config().binding(ProviderRole::Scout).max_in_flight;

  auto place = [&](std::size_t a, std::size_t o, std::optional<int> score, std::string rationale) {
    auto& p = pairs[a * no + o];
    p.action = actions[a];
    p.object = objects[o];
    p.action_index = a;
    p.object_index = o;
    p.defaulted = !score;
    p.feasibility_score = score.value_or(1);
    p.rationale = score ? std::move(rationale) : "score defaulted to 1: unparseable or missing";
  };

  if (batched) {
    json object_lines = json::array();
    for (std::size_t o = 0; o < no; ++o) object_lines.push_back(std::to_string(o) + ". " + objects[o]);
    parallel_for(na, parallel, [&](std::size_t a) {
      json vars = base;
      vars["action"] = actions[a];
      vars["objects"] = object_lines;
      vars["object_list"] = objects;
      vars["object_count"] = no;
      auto reply = structured_call(hub, ProviderRole::Scout, "scout_row", "scout_row", vars,
                                   [no](const json& v) { return row_problem(v, no); }, true);
      std::vector<char> done(no, 0);
      for (const auto& s : reply.value.at("scores")) {
        auto idx = s.at("object_index").get<std::int64_t>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= no || done[static_cast<std::size_t>(idx)]) continue;
        done[static_cast<std::size_t>(idx)] = 1;
        place(a, static_cast<std::size_t>(idx), parse_score(s.at("score")), s.at("rationale").get<std::string>());
      }
      for (std::size_t o = 0; o < no; ++o) {
        if (!done[o]) place(a, o, std::nullopt, {});
      }
      if (reply.accepted_with) warnings[a].push_back("scout row " + std::to_string(a) + ": " + *reply.accepted_with);
    });
  } else {
    parallel_for(na * no, parallel, [&](std::size_t k) {
      std::size_t a = k / no;
      std::size_t o = k % no;
      json vars = base;
      vars["action"] = actions[a];
      vars["object"] = objects[o];
      auto reply = structured_call(hub, ProviderRole::Scout, "scout_pair", "scout_pair", vars,
                                   [](const json& v) -> std::optional<std::string> {
                                     if (!parse_score(v.at("score"))) return "unparseable score " + v.at("score").dump();
                                     return std::nullopt;
                                   },
                                   true);
      place(a, o, parse_score(reply.value.at("score")), reply.value.at("rationale").get<std::string>());
      if (reply.accepted_with) warnings[k].push_back("scout pair " + std::to_string(k) + ": " + *reply.accepted_with);
    });
  }
  for (auto& w : warnings) out.warnings.insert(out.warnings.end(), w.begin(), w.end());
  out.grid.pairs = sort_pairs(std::move(pairs));
  return out;
}

// --- Navigator / Sentinel ----------------------------------------------------

NavigatorResult navigator_rehydrate(const std::vector<ActionObjectPair>& top_pairs, const ProblemStatement& problem,
                                    ProviderHub& hub, double eps, int min_pts) {
  NavigatorResult out;
  if (top_pairs.empty()) {
    out.warnings.push_back("no feasible pairs to re-hydrate");
    return out;
  }
  json vars = problem_vars(problem);
  json lines = json::array();
  json raw_pairs = json::array();
  for (std::size_t i = 0; i < top_pairs.size(); ++i) {
    const auto& p = top_pairs[i];
    lines.push_back(std::to_string(i + 1) + ". " + p.action + " + " + p.object + " (score " +
                    std::to_string(p.feasibility_score) + "/10)");
    raw_pairs.push_back(json{{"action", p.action}, {"object", p.object}, {"score", p.feasibility_score}});
  }
  vars["pairs"] = lines;
  vars["pair_list"] = raw_pairs;
  vars["pair_count"] = top_pairs.size();
  auto reply = structured_call(hub, ProviderRole::Navigator, "navigator", "idea_list", vars,
                               idea_list_check(1, top_pairs.size()));
  out.drafts = drafts_of(reply.value, Provenance::NavigatorSynthesized);

  std::vector<std::string> texts;
  for (const auto& d : out.drafts) texts.push_back(embedding_text(d.title, d.action, d.object, d.context));
  out.embeddings = hub.embed_batch(texts);

  std::vector<Idea> provisional;
  for (std::size_t i = 0; i < out.drafts.size(); ++i) {
    Idea idea;
    char id[32];
    std::snprintf(id, sizeof(id), "draft-%06zu", i);
    idea.id = id;
    idea.title = out.drafts[i].title;
    idea.action = out.drafts[i].action;
    idea.object = out.drafts[i].object;
    idea.context = out.drafts[i].context;
    idea.embedding = out.embeddings[i];
    provisional.push_back(std::move(idea));
  }
  out.assignment = dbscan(distance_matrix(out.embeddings), eps, min_pts);
  auto kept = shortlist_representatives(provisional, out.assignment);
  out.keep.assign(out.drafts.size(), false);
  for (const auto& k : kept) {
    for (std::size_t i = 0; i < provisional.size(); ++i) {
      if (provisional[i].id == k.id) out.keep[i] = true;
    }
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Keep: return "keep";
    case Verdict::Polish: return "polish";
    case Verdict::Remove: return "remove";
  }
  return "?";
}

SentinelResult sentinel_curate(const std::vector<Idea>& candidates, const ProblemStatement& problem, ProviderHub& hub) {
  SentinelResult out;
  if (candidates.empty()) {
    out.warnings.push_back("no candidates to curate");
    return out;
  }
  json vars = problem_vars(problem);
  json lines = json::array();
  json raw = json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    lines.push_back("[" + std::to_string(i) + "] " + c.title + " | " + c.action + " | " + c.object + " | " + c.context);
    raw.push_back(json{{"title", c.title}, {"action", c.action}, {"object", c.object}, {"context", c.context}});
  }
  vars["candidates"] = lines;
  vars["candidate_list"] = raw;
  vars["candidate_count"] = candidates.size();
  const std::size_t n = candidates.size();
  auto reply = structured_call(hub, ProviderRole::Sentinel, "sentinel", "sentinel", vars,
                               [n](const json& v) -> std::optional<std::string> {
                                 std::vector<char> seen(n, 0);
                                 for (const auto& item : v.at("verdicts")) {
                                   auto idx = item.at("index").get<std::int64_t>();
                                   if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
                                     return "verdict index " + std::to_string(idx) + " out of range";
                                   }
                                   if (seen[static_cast<std::size_t>(idx)]++) {
                                     return "verdict index " + std::to_string(idx) + " given twice";
                                   }
                                   if (item.at("verdict") == "polish" &&
                                       (!item.contains("context") || trim(item.at("context").get<std::string>()).empty())) {
                                     return "polish verdict at index " + std::to_string(idx) + " needs a context";
                                   }
                                 }
                                 for (std::size_t i = 0; i < n; ++i) {
                                   if (!seen[i]) return "verdict for index " + std::to_string(i) + " missing";
                                 }
                                 return std::nullopt;
                               });
  out.verdicts.resize(n);
  for (const auto& item : reply.value.at("verdicts")) {
    auto idx = static_cast<std::size_t>(item.at("index").get<std::int64_t>());
    auto& v = out.verdicts[idx];
    v.idea_id = candidates[idx].id;
    const auto word = item.at("verdict").get<std::string>();
    v.verdict = word == "keep" ? Verdict::Keep : word == "polish" ? Verdict::Polish : Verdict::Remove;
    v.rationale = item.at("rationale").get<std::string>();
    if (v.verdict == Verdict::Polish) v.context = trim(item.at("context").get<std::string>());
  }
  return out;
}

// --- Director / Leo ------------------------------------------------------------

Concept director_conceptualize(const Idea& idea, const ProblemStatement& problem, ProviderHub& hub) {
  if (idea.status != IdeaStatus::Curated) throw InvalidInput("director needs a Curated idea");
  json vars = problem_vars(problem);
  vars["title"] = idea.title;
  vars["action"] = idea.action;
  vars["object"] = idea.object;
  vars["context"] = idea.context;
  auto reply = structured_call(hub, ProviderRole::Director, "director", "pfic", vars);
  Reader r(reply.value);
  Concept c;
  c.idea_id = idea.id;
  c.principle = trim(r.at("principle").str());
  c.features = r.at("features").strings();
  c.implementation = r.at("implementation").strings();
  c.characteristics = r.at("characteristics").strings();
  return c;
}

std::string leo_render_prompt(const Concept& c) {
  if (c.features.empty() || c.characteristics.empty()) {
    throw InvalidInput("concept needs features and characteristics to render");
  }
  return assets::render(assets::prompt_template("leo"), json{{"principle", c.principle},
                                                             {"features", c.features},
                                                             {"characteristics", c.characteristics}});
}

}  // namespace midas
