#pragma once
// OPTICS density ordering over 2-D points, threshold cluster extraction, and
// the grid boundary of the largest cluster among selected patches.
//
// Neighborhoods are closed balls (distance <= eps) and include the point
// itself, as in the original formulation: the core distance of p is the
// distance to its min_pts-th nearest member of N_eps(p), counting p at 0.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "roidet/detection.hpp"
#include "roidet/geometry.hpp"

namespace roidet {

struct OpticsParams {
  double eps = 2.0;
  int min_pts = 5;
};

inline constexpr double kDefaultClusterThreshold = 1.5;

// nullopt stands for UNDEFINED.
using Distance = std::optional<double>;

struct ReachabilityOrdering {
  std::vector<std::size_t> order;
  std::vector<Distance> reachability;   // indexed by point
  std::vector<Distance> core_distance;  // indexed by point
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // indexed by point; kNoise or cluster id
  std::map<int, std::size_t> cluster_sizes;
};

// Grid-cell edge between lattice corners, in patch-index units (x = col, y = row).
struct GridEdge {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  auto operator<=>(const GridEdge&) const = default;
};

struct ClusterBoundary {
  std::vector<PatchRef> members;  // row-major
  std::vector<GridEdge> edges;
  int cluster_id = 0;
};

Distance core_distance(std::span<const Point> points, std::size_t i, const OpticsParams& params);

ReachabilityOrdering optics_order(std::span<const Point> points, const OpticsParams& params);

ClusterAssignment extract_clusters(const ReachabilityOrdering& ordering, double threshold);

// Unit edges of member cells that border a non-member cell or the slide edge.
// Ordered by cell (row-major), then top, right, bottom, left.
std::vector<GridEdge> cell_boundary(std::span<const PatchRef> members, const PatchGrid& grid);

// Throws EmptySelection for an empty selection and NoCluster when every point is noise.
ClusterBoundary largest_cluster_boundary(const RoiSelection& selection, const PatchGrid& grid,
                                         const OpticsParams& params = {},
                                         double threshold = kDefaultClusterThreshold);

}  // namespace roidet
