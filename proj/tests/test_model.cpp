#include <gtest/gtest.h>

#include <random>

#include "midas/embedding.hpp"
#include "midas/model.hpp"

using namespace midas;

namespace {

ProblemStatement sample_problem() {
  ProblemStatement p;
  p.id = "problem-000001";
  p.raw_text = "Elderly people struggle to stand up";
  p.activity = "Standing up from a seated position";
  p.item = "Chair";
  p.contradiction = "Support without restricting independence";
  p.criteria = {"Safe", "Affordable"};
  p.constraints = {"Fits in a home"};
  p.created_at = 3;
  return p;
}

Idea sample_idea() {
  Idea i;
  i.id = "idea-000001";
  i.title = "Balloon Cloud Chair";
  i.action = "Inflates to lift";
  i.object = "Air cushion";
  i.context = "Living room";
  i.provenance = Provenance::AIExplorer;
  i.embedding = EmbeddingVector{{0.6, 0.8}, "tag"};
  i.status = IdeaStatus::Shortlisted;
  i.status_history = {{Phase::Generation, IdeaStatus::Raw, "generated", "forge"},
                      {Phase::Assessment, IdeaStatus::Shortlisted, "medoid", "gatekeeper"}};
  return i;
}

}  // namespace

TEST(Enums, NamesRoundTrip) {
  for (auto p : {Phase::Definition, Phase::Generation, Phase::Assessment, Phase::Divergence, Phase::Refinement,
                 Phase::Conceptualization, Phase::Done}) {
    EXPECT_EQ(parse_phase(to_string(p)), p);
  }
  for (auto r : kAllProviderRoles) EXPECT_EQ(parse_provider_role(to_string(r)), r);
  for (int a = 0; a <= static_cast<int>(AgentKind::Professor); ++a) {
    auto kind = static_cast<AgentKind>(a);
    EXPECT_EQ(parse_agent_kind(to_string(kind)), kind);
  }
  EXPECT_FALSE(parse_phase("nonsense").has_value());
}

TEST(Enums, PhaseOrder) {
  EXPECT_EQ(next_phase(Phase::Definition), Phase::Generation);
  EXPECT_EQ(next_phase(Phase::Generation), Phase::Assessment);
  EXPECT_EQ(next_phase(Phase::Assessment), Phase::Divergence);
  EXPECT_EQ(next_phase(Phase::Divergence), Phase::Refinement);
  EXPECT_EQ(next_phase(Phase::Refinement), Phase::Conceptualization);
  EXPECT_EQ(next_phase(Phase::Conceptualization), Phase::Done);
  EXPECT_EQ(next_phase(Phase::Done), Phase::Done);
  EXPECT_LT(phase_index(Phase::Definition), phase_index(Phase::Done));
}

TEST(Enums, UnknownValueNamesField) {
  json doc = {{"status", "Pending"}};
  try {
    decode_status(Reader(doc).at("status"));
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "$.status");
  }
}

TEST(Config, DefaultsFollowRoleTemperatures) {
  SessionConfig c = default_config();
  EXPECT_NO_THROW(validate(c));
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::ForgeExplorer), 1.0);
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::Scribe), 0.5);
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::ForgeFormulator), 0.5);
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::Director), 0.5);
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::Navigator), 0.6);
  EXPECT_LT(c.temperature(ProviderRole::ForgeFormulator), c.temperature(ProviderRole::ForgeExplorer));
  EXPECT_EQ(c.mint_list_size, 20);
  for (auto role : kAllProviderRoles) {
    double t = c.temperature(role);
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 2.0);
    EXPECT_NO_THROW(c.binding(role));
  }
}

TEST(Config, ValidationNamesField) {
  auto expect_bad = [](SessionConfig c, const std::string& needle) {
    try {
      validate(c);
      ADD_FAILURE() << "expected InvalidInput for " << needle;
    } catch (const InvalidInput& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  SessionConfig c = default_config();
  c.temperatures[ProviderRole::Muse] = 2.5;
  expect_bad(c, "temperatures.muse");
  c = default_config();
  c.challenger_threshold = 1.0;
  expect_bad(c, "challenger_threshold");
  c = default_config();
  c.gatekeeper_min_pts = 0;
  expect_bad(c, "gatekeeper_min_pts");
  c = default_config();
  c.gatekeeper_eps = 0.0;
  expect_bad(c, "gatekeeper_eps");
  c = default_config();
  c.mint_list_size = 0;
  expect_bad(c, "mint_list_size");
  c = default_config();
  c.bindings[ProviderRole::Scout].timeout_ms = 0;
  expect_bad(c, "timeout_ms");
}

TEST(Config, EncodeDecodeRoundTrip) {
  SessionConfig c = default_config();
  c.gatekeeper_eps = 0.25;
  c.raw_idea_budget = 75;
  c.gated_phases = {Phase::Assessment};
  c.bindings[ProviderRole::Scribe].endpoint = "http://localhost:1/v1";
  c.bindings[ProviderRole::Scribe].model = "m";
  json doc = encode(c);
  SessionConfig back = decode_config(Reader(doc));
  EXPECT_EQ(back, c);
  EXPECT_EQ(encode(back), doc);
}

TEST(Config, MissingFieldsTakeDefaults) {
  json doc = {{"mint_list_size", 7}};
  SessionConfig c = decode_config(Reader(doc));
  EXPECT_EQ(c.mint_list_size, 7);
  SessionConfig d = default_config();
  d.mint_list_size = 7;
  EXPECT_EQ(c, d);
}

TEST(Config, BindingTemperatureFoldsIntoRoleTemperature) {
  json doc = {{"bindings", {{"scout", {{"temperature", 0.9}}}}}};
  SessionConfig c = decode_config(Reader(doc));
  EXPECT_DOUBLE_EQ(c.temperature(ProviderRole::Scout), 0.9);
}

TEST(Invariants, ProblemNeedsAllFiveFields) {
  EXPECT_NO_THROW(validate(sample_problem()));
  auto p = sample_problem();
  p.criteria.clear();
  EXPECT_THROW(validate(p), InvalidInput);
  p = sample_problem();
  p.constraints.clear();
  EXPECT_THROW(validate(p), InvalidInput);
  p = sample_problem();
  p.contradiction = "  ";
  EXPECT_THROW(validate(p), InvalidInput);
  p = sample_problem();
  p.criteria.push_back("");
  EXPECT_THROW(validate(p), InvalidInput);
}

TEST(Invariants, AocFieldsNonEmpty) {
  EXPECT_NO_THROW(validate_aoc("t", "a", "o", "c"));
  EXPECT_THROW(validate_aoc("", "a", "o", "c"), InvalidInput);
  EXPECT_THROW(validate_aoc("t", "", "o", "c"), InvalidInput);
  EXPECT_THROW(validate_aoc("t", "a", " ", "c"), InvalidInput);
  EXPECT_THROW(validate_aoc("t", "a", "o", ""), InvalidInput);
}

TEST(Invariants, ConceptPfic) {
  Concept c;
  c.id = "concept-000001";
  c.idea_id = "idea-000001";
  c.principle = "Lever";
  c.features = {"Belt"};
  c.implementation = {"Steel frame"};
  c.characteristics = {"Safe"};
  EXPECT_NO_THROW(validate(c));
  for (auto field : {&Concept::features, &Concept::implementation, &Concept::characteristics}) {
    Concept bad = c;
    (bad.*field).clear();
    EXPECT_THROW(validate(bad), InvalidInput);
  }
  c.principle = "";
  EXPECT_THROW(validate(c), InvalidInput);
}

TEST(Invariants, LiteratureNeedsSource) {
  LiteratureEntry e;
  e.id = "lit-000001";
  e.title = "SitnStand";
  e.action = "Lifts";
  e.object = "Cushion";
  e.context = "Home";
  e.source_url = "https://example.org/sitnstand";
  EXPECT_NO_THROW(validate(e));
  e.source_url = "";
  EXPECT_THROW(validate(e), InvalidInput);
}

TEST(Invariants, UnitNorm) {
  EXPECT_NO_THROW(validate_unit_norm({{0.6, 0.8}, "t"}));
  EXPECT_THROW(validate_unit_norm({{0.6, 0.9}, "t"}), InvalidInput);
  EXPECT_THROW(validate_unit_norm({{}, "t"}), InvalidInput);
  EXPECT_THROW(validate_unit_norm({{std::nan(""), 1.0}, "t"}), InvalidInput);
}

TEST(Codec, ProblemRoundTrip) {
  auto p = sample_problem();
  EXPECT_EQ(decode_problem(Reader(encode(p))), p);
}

TEST(Codec, IdeaRoundTrip) {
  auto i = sample_idea();
  json doc = encode(i);
  EXPECT_EQ(decode_idea(Reader(doc)), i);
  i.embedding.reset();
  EXPECT_EQ(decode_idea(Reader(encode(i))), i);
}

TEST(Codec, IdeaRejectsUnknownProvenance) {
  json doc = encode(sample_idea());
  doc["provenance"] = "Robot";
  try {
    decode_idea(Reader(doc));
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "$.provenance");
  }
}

TEST(Codec, VaultsRoundTrip) {
  Vaults v;
  v.problem_vault.push_back(sample_problem());
  v.idea_vault.push_back(sample_idea());
  LiteratureEntry e;
  e.id = "lit-000001";
  e.title = "SitnStand";
  e.action = "Lifts";
  e.object = "Cushion";
  e.context = "Home";
  e.source_url = "https://example.org";
  e.retrieval_mode = RetrievalMode::Manual;
  v.literature_vault.push_back(e);
  Concept c;
  c.id = "concept-000001";
  c.idea_id = "idea-000001";
  c.principle = "Lever";
  c.features = {"Belt"};
  c.implementation = {"Frame"};
  c.characteristics = {"Safe"};
  c.rendering_ref = "img-0000000000000001";
  v.concept_vault.push_back(c);
  EXPECT_EQ(decode_vaults(Reader(encode(v))), v);
}

TEST(Codec, FeasibilityGridRoundTrip) {
  FeasibilityGrid g;
  g.actions = {"Lifts"};
  g.objects = {"Belt", "Seat"};
  g.pairs = {{"Lifts", "Belt", 10, "fits", 0, 0, false}, {"Lifts", "Seat", 1, "", 0, 1, true}};
  EXPECT_EQ(decode_grid(Reader(encode(g))), g);
}

TEST(Codec, RandomIdeasRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    Idea i = sample_idea();
    i.id = "idea-" + std::to_string(trial);
    i.status = static_cast<IdeaStatus>(pick(rng));
    i.provenance = static_cast<Provenance>(pick(rng) % 4);
    i.title = std::string(1 + trial % 9, static_cast<char>('a' + trial % 26)) + " \"quoted\" é";
    if (trial % 3 == 0) {
      std::normal_distribution<double> g;
      std::vector<double> v(8);
      for (auto& x : v) x = g(rng);
      i.embedding = EmbeddingVector{normalize(v), "tag"};
    } else {
      i.embedding.reset();
    }
    ASSERT_EQ(decode_idea(Reader(encode(i))), i);
  }
}

TEST(Vaults, Lookups) {
  Vaults v;
  v.problem_vault.push_back(sample_problem());
  auto p2 = sample_problem();
  p2.id = "problem-000002";
  v.problem_vault.push_back(p2);
  v.problem_vault[0].invalidated = true;
  ASSERT_NE(v.current_problem(), nullptr);
  EXPECT_EQ(v.current_problem()->id, "problem-000002");

  Idea a = sample_idea();
  Idea b = sample_idea();
  b.id = "idea-000002";
  b.status = IdeaStatus::Removed;
  v.idea_vault = {a, b};
  EXPECT_NE(v.find_idea("idea-000002"), nullptr);
  EXPECT_EQ(v.find_idea("idea-999999"), nullptr);
  EXPECT_EQ(v.ideas_with_status(IdeaStatus::Removed).size(), 1u);
  EXPECT_EQ(v.ideas_with_status(IdeaStatus::Shortlisted).size(), 1u);
}

TEST(Reader, PathsNameNestedFields) {
  json doc = {{"a", {{"b", json::array({1, "x"})}}}};
  Reader r(doc);
  try {
    r.at("a").at("b").items()[1].integer();
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "$.a.b[1]");
  }
  try {
    r.at("a").at("missing");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "$.a.missing");
  }
  EXPECT_FALSE(r.at("a").maybe("nothing").has_value());
}
