#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "midas/matrix.hpp"
#include "midas/model.hpp"

namespace midas {

struct ClusterAssignment {
  std::vector<int> labels;  // -1 = noise, clusters numbered in discovery order
  int n_clusters = 0;
  double eps = 0.0;
  int min_pts = 1;

  bool operator==(const ClusterAssignment&) const = default;
};

struct DiversityReport {
  double idea_sparsity = 0.0;     // mean pairwise cosine distance
  double cluster_sparsity = 0.0;  // mean pairwise centroid distance, 0 with < 2 clusters
  double noise_fraction = 0.0;

  bool operator==(const DiversityReport&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Requires a symmetric matrix with zero diagonal. A point is core when at
// least min_pts points (itself included) lie within eps. Points are scanned in
// index order; a border point joins the first cluster that reaches it.
ClusterAssignment dbscan(const SquareMatrix& distances, double eps, int min_pts);
ClusterAssignment dbscan(const std::vector<std::vector<double>>& distances, double eps, int min_pts);

// Centered projection onto the top two principal axes. Each axis is signed so
// its largest-magnitude loading is positive. The seed is accepted for API
// stability; the projection itself is deterministic.
std::vector<Point2> project_2d(const std::vector<EmbeddingVector>& embeddings, std::uint64_t seed = 0);

// One medoid per cluster (ties: lowest id) plus every noise point, in input
// order.
std::vector<Idea> shortlist_representatives(const std::vector<Idea>& ideas, const ClusterAssignment& assignment);

// Index of the medoid among `members` given a full distance matrix.
std::size_t medoid_index(const SquareMatrix& distances, const std::vector<std::size_t>& members,
                         const std::vector<std::string>& ids);

DiversityReport diversity_report(const std::vector<Idea>& ideas, const ClusterAssignment& assignment);
DiversityReport diversity_report(const std::vector<EmbeddingVector>& vectors, const ClusterAssignment& assignment);

json encode(const ClusterAssignment& a);
json encode(const DiversityReport& r);

// Plot export: {points: [{id, x, y, label, provenance}], eps, min_pts, report}.
json plot_data(const std::vector<Idea>& ideas, double eps, int min_pts, std::uint64_t seed = 0);

}  // namespace midas
