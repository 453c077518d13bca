#include "midas/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "midas/hash.hpp"

namespace midas {

std::string embedding_text(std::string_view title, std::string_view action, std::string_view object,
                           std::string_view context) {
  std::string out;
  out.reserve(title.size() + action.size() + object.size() + context.size() + 40);
  out.append("Idea: ").append(title);
  out.append(". Action: ").append(action);
  out.append(". Object: ").append(object);
  out.append(". Context: ").append(context);
  return out;
}

std::string embedding_text(const Idea& idea) {
  return embedding_text(idea.title, idea.action, idea.object, idea.context);
}

std::string embedding_text(const LiteratureEntry& entry) {
  return embedding_text(entry.title, entry.action, entry.object, entry.context);
}

std::vector<double> normalize(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("embedding contains a non-finite entry");
    sq += v * v;
  }
  if (values.empty() || sq == 0.0) throw InvalidInput("cannot normalize a zero vector");
  double inv = 1.0 / std::sqrt(sq);
  for (double& v : values) v *= inv;
  return values;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw InvalidInput("embedding length mismatch: " + std::to_string(a.values.size()) + " vs " +
                       std::to_string(b.values.size()));
  }
  if (a.model_tag != b.model_tag) throw InvalidInput("embedding model_tag mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

SquareMatrix similarity_matrix(const std::vector<EmbeddingVector>& vectors) {
  const std::size_t n = vectors.size();
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = cosine_similarity(vectors[i], vectors[j]);
      m(i, j) = s;
      m(j, i) = s;
    }
  }
  return m;
}

SquareMatrix similarity_matrix(const std::vector<Idea>& ideas) {
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(ideas.size());
  for (const auto& idea : ideas) {
    if (!idea.embedding) throw InvalidInput("idea '" + idea.id + "' is not embedded");
    vectors.push_back(*idea.embedding);
  }
  return similarity_matrix(vectors);
}

SquareMatrix distance_matrix(const std::vector<EmbeddingVector>& vectors) {
  SquareMatrix m = similarity_matrix(vectors);
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : 1.0 - m(i, j);
  }
  return m;
}

EmbeddingVector embed_idea(const Idea& idea, EmbeddingProvider& provider, const std::optional<std::string>& model_tag,
                           std::optional<std::size_t> dimension) {
  validate_aoc(idea.title, idea.action, idea.object, idea.context);
  auto out = provider.embed_batch({embedding_text(idea)});
  if (out.size() != 1) throw ProviderError("embedding provider returned " + std::to_string(out.size()) + " vectors", true);
  EmbeddingVector v = std::move(out.front());
  v.values = normalize(std::move(v.values));
  if ((model_tag && *model_tag != v.model_tag) || (dimension && *dimension != v.values.size())) {
    throw ConfigError("embedding model mismatch for idea '" + idea.id + "'");
  }
  return v;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed), tag_("hash-" + std::to_string(dimension)) {
  if (dimension == 0) throw ConfigError("hashing embedder dimension must be positive");
  if (seed != 0) tag_ += "-s" + std::to_string(seed);
}

EmbeddingVector HashingEmbedder::embed(const std::string& text) const {
  std::vector<double> values(dim_, 0.0);
  const std::uint64_t basis = fnv1a64(seed_);
  std::string padded = "  " + text + "  ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t h = mix64(fnv1a64(std::string_view(padded).substr(i, 3), basis));
    values[h % dim_] += (h >> 63) ? -1.0 : 1.0;
  }
  bool zero = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  if (zero) values[fnv1a64(text, basis) % dim_] = 1.0;
  return EmbeddingVector{normalize(std::move(values)), tag_};
}

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

}  // namespace midas
