#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "midas/matrix.hpp"
#include "midas/model.hpp"

namespace midas {

// Anything that turns texts into vectors, order-preserving.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// "Idea: {title}. Action: {action}. Object: {object}. Context: {context}"
std::string embedding_text(std::string_view title, std::string_view action, std::string_view object,
                           std::string_view context);
std::string embedding_text(const Idea& idea);
std::string embedding_text(const LiteratureEntry& entry);

// Scales to unit length. Throws InvalidInput on non-finite or zero vectors.
std::vector<double> normalize(std::vector<double> values);

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);
inline double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  return 1.0 - cosine_similarity(a, b);
}

// Throws InvalidInput when any idea lacks an embedding.
SquareMatrix similarity_matrix(const std::vector<Idea>& ideas);
SquareMatrix similarity_matrix(const std::vector<EmbeddingVector>& vectors);
SquareMatrix distance_matrix(const std::vector<EmbeddingVector>& vectors);

// Embeds the idea's AOC text. When the session already fixed a model tag and
// dimension, a mismatching vector is a ConfigError.
EmbeddingVector embed_idea(const Idea& idea, EmbeddingProvider& provider,
                           const std::optional<std::string>& model_tag = std::nullopt,
                           std::optional<std::size_t> dimension = std::nullopt);

// Offline embedder: seeded FNV-1a hashing of character trigrams into signed
// buckets. Pure function of (seed, dimension, text).
class HashingEmbedder : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0);

  EmbeddingVector embed(const std::string& text) const;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

  const std::string& model_tag() const { return tag_; }
  std::size_t dimension() const { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::string tag_;
};

}  // namespace midas
