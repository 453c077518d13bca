#include "midas/clustering.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <deque>

#include "midas/embedding.hpp"

namespace midas {

namespace {

constexpr double kMatrixTol = 1e-9;

void check_distances(const SquareMatrix& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > kMatrixTol) throw InvalidInput("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!std::isfinite(d(i, j)) || std::abs(d(i, j) - d(j, i)) > kMatrixTol) {
        throw InvalidInput("distance matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

std::vector<std::size_t> neighbors(const SquareMatrix& d, std::size_t p, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < d.size(); ++q) {
    if (d(p, q) <= eps) out.push_back(q);
  }
  return out;
}

const EmbeddingVector& vector_of(const Idea& idea) {
  if (!idea.embedding) throw InvalidInput("idea '" + idea.id + "' is not embedded");
  return *idea.embedding;
}

std::vector<EmbeddingVector> vectors_of(const std::vector<Idea>& ideas) {
  std::vector<EmbeddingVector> out;
  out.reserve(ideas.size());
  for (const auto& idea : ideas) out.push_back(vector_of(idea));
  return out;
}

}  // namespace

ClusterAssignment dbscan(const SquareMatrix& d, double eps, int min_pts) {
  if (!(eps > 0.0)) throw InvalidInput("dbscan eps must be positive");
  if (min_pts < 1) throw InvalidInput("dbscan min_pts must be at least 1");
  check_distances(d);

  constexpr int kUnvisited = -2;
  const std::size_t n = d.size();
  ClusterAssignment out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.labels.assign(n, kUnvisited);

  const auto need = static_cast<std::size_t>(min_pts);
  int cluster = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (out.labels[p] != kUnvisited) continue;
    auto seeds = neighbors(d, p, eps);
    if (seeds.size() < need) {
      out.labels[p] = -1;
      continue;
    }
    out.labels[p] = cluster;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      std::size_t q = queue.front();
      queue.pop_front();
      if (out.labels[q] == -1) out.labels[q] = cluster;  // border point
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = cluster;
      auto more = neighbors(d, q, eps);
      if (more.size() >= need) queue.insert(queue.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  out.n_clusters = cluster;
  return out;
}

ClusterAssignment dbscan(const std::vector<std::vector<double>>& rows, double eps, int min_pts) {
  SquareMatrix d(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw InvalidInput("distance matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) d(i, j) = rows[i][j];
  }
  return dbscan(d, eps, min_pts);
}

std::vector<Point2> project_2d(const std::vector<EmbeddingVector>& embeddings, std::uint64_t /*seed*/) {
  if (embeddings.empty()) throw InvalidInput("project_2d needs at least one vector");
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  const auto dim = static_cast<Eigen::Index>(embeddings.front().values.size());
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = embeddings[static_cast<std::size_t>(i)].values;
    if (static_cast<Eigen::Index>(v.size()) != dim) throw InvalidInput("embedding length mismatch");
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = v[static_cast<std::size_t>(j)];
  }
  x.rowwise() -= x.colwise().mean();

  Eigen::MatrixXd cov = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // Eigenvalues ascend; take the last two columns.
  Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(dim, 2);
  for (int k = 0; k < 2 && k < dim; ++k) {
    Eigen::VectorXd axis = solver.eigenvectors().col(dim - 1 - k);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < dim; ++j) {
      if (std::abs(axis(j)) > std::abs(axis(arg)) + 1e-12) arg = j;
    }
    if (axis(arg) < 0) axis = -axis;
    axes.col(k) = axis;
  }
  Eigen::MatrixXd proj = x * axes;

  std::vector<Point2> out(embeddings.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double px = proj(i, 0);
    double py = proj(i, 1);
    // Round away floating noise so degenerate inputs land exactly on 0.
    out[static_cast<std::size_t>(i)] = {std::abs(px) < 1e-12 ? 0.0 : px, std::abs(py) < 1e-12 ? 0.0 : py};
  }
  return out;
}

std::size_t medoid_index(const SquareMatrix& d, const std::vector<std::size_t>& members,
                         const std::vector<std::string>& ids) {
  std::size_t best = members.front();
  double best_sum = 0.0;
  bool first = true;
  for (std::size_t m : members) {
    double sum = 0.0;
    for (std::size_t o : members) sum += d(m, o);
    if (first || sum < best_sum - 1e-12 || (std::abs(sum - best_sum) <= 1e-12 && ids[m] < ids[best])) {
      best = m;
      best_sum = sum;
      first = false;
    }
  }
  return best;
}

std::vector<Idea> shortlist_representatives(const std::vector<Idea>& ideas, const ClusterAssignment& a) {
  if (a.labels.size() != ideas.size()) throw InvalidInput("cluster labels do not match the idea list");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(a.n_clusters));
  for (std::size_t i = 0; i < ideas.size(); ++i) {
    int l = a.labels[i];
    if (l < -1 || l >= a.n_clusters) throw InvalidInput("cluster label out of range");
    if (l >= 0) members[static_cast<std::size_t>(l)].push_back(i);
  }
  std::vector<char> keep(ideas.size(), 0);
  for (std::size_t i = 0; i < ideas.size(); ++i) keep[i] = a.labels[i] == -1;

  if (a.n_clusters > 0) {
    SquareMatrix d = distance_matrix(vectors_of(ideas));
    std::vector<std::string> ids;
    for (const auto& idea : ideas) ids.push_back(idea.id);
    for (const auto& group : members) {
      if (!group.empty()) keep[medoid_index(d, group, ids)] = 1;
    }
  }
  std::vector<Idea> out;
  for (std::size_t i = 0; i < ideas.size(); ++i) {
    if (keep[i]) out.push_back(ideas[i]);
  }
  return out;
}

DiversityReport diversity_report(const std::vector<EmbeddingVector>& vectors, const ClusterAssignment& a) {
  if (vectors.empty()) throw InvalidInput("diversity report needs at least one idea");
  if (a.labels.size() != vectors.size()) throw InvalidInput("cluster labels do not match the idea list");
  const std::size_t n = vectors.size();
  DiversityReport r;

  if (n > 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) total += cosine_distance(vectors[i], vectors[j]);
    }
    r.idea_sparsity = total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
  }

  std::size_t noise = 0;
  std::vector<std::vector<double>> centroids(static_cast<std::size_t>(a.n_clusters),
                                             std::vector<double>(vectors.front().values.size(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a.labels[i] < 0) {
      ++noise;
      continue;
    }
    auto& c = centroids[static_cast<std::size_t>(a.labels[i])];
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += vectors[i].values[k];
  }
  r.noise_fraction = static_cast<double>(noise) / static_cast<double>(n);

  if (a.n_clusters >= 2) {
    auto norm = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    };
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      for (std::size_t j = i + 1; j < centroids.size(); ++j) {
        double ni = norm(centroids[i]);
        double nj = norm(centroids[j]);
        double sim = 0.0;
        if (ni > 0.0 && nj > 0.0) {
          for (std::size_t k = 0; k < centroids[i].size(); ++k) sim += centroids[i][k] * centroids[j][k];
          sim = std::clamp(sim / (ni * nj), -1.0, 1.0);
        }
        total += 1.0 - sim;
        ++pairs;
      }
    }
    r.cluster_sparsity = total / static_cast<double>(pairs);
  }
  return r;
}

DiversityReport diversity_report(const std::vector<Idea>& ideas, const ClusterAssignment& a) {
  return diversity_report(vectors_of(ideas), a);
}

json encode(const ClusterAssignment& a) {
  return json{{"labels", a.labels}, {"n_clusters", a.n_clusters}, {"eps", a.eps}, {"min_pts", a.min_pts}};
}

json encode(const DiversityReport& r) {
  return json{{"idea_sparsity", r.idea_sparsity},
              {"cluster_sparsity", r.cluster_sparsity},
              {"noise_fraction", r.noise_fraction}};
}

json plot_data(const std::vector<Idea>& ideas, double eps, int min_pts, std::uint64_t seed) {
  json points = json::array();
  json doc{{"eps", eps}, {"min_pts", min_pts}};
  if (ideas.empty()) {
    doc["points"] = points;
    doc["n_clusters"] = 0;
    doc["report"] = encode(DiversityReport{});
    return doc;
  }
  auto vectors = vectors_of(ideas);
  auto assignment = dbscan(distance_matrix(vectors), eps, min_pts);
  auto xy = project_2d(vectors, seed);
  for (std::size_t i = 0; i < ideas.size(); ++i) {
    points.push_back(json{{"id", ideas[i].id},
                          {"x", xy[i].x},
                          {"y", xy[i].y},
                          {"label", assignment.labels[i]},
                          {"provenance", to_string(ideas[i].provenance)},
                          {"title", ideas[i].title},
                          {"action", ideas[i].action},
                          {"object", ideas[i].object},
                          {"context", ideas[i].context}});
  }
  doc["points"] = points;
  doc["n_clusters"] = assignment.n_clusters;
  doc["report"] = encode(diversity_report(vectors, assignment));
  return doc;
}

}  // namespace midas
