#include "roidet/optics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "roidet/errors.hpp"

namespace roidet {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void validate(const OpticsParams& params) {
  if (!(params.eps > 0.0) || params.min_pts < 2) {
    throw Error(ErrorCode::Validation, "OPTICS needs eps > 0 and min_pts >= 2");
  }
}

// Sorted (distance, index) pairs of the eps-neighborhood, self included.
std::vector<std::pair<double, std::size_t>> neighborhood(std::span<const Point> points,
                                                         std::size_t i, double eps) {
  std::vector<std::pair<double, std::size_t>> out;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double d = dist(points[i], points[j]);
    if (d <= eps) out.emplace_back(d, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Distance core_distance(std::span<const Point> points, std::size_t i, const OpticsParams& params) {
  validate(params);
  if (i >= points.size()) throw Error(ErrorCode::InvalidInput, "point index out of range");
  const auto nb = neighborhood(points, i, params.eps);
  if (nb.size() < static_cast<std::size_t>(params.min_pts)) return std::nullopt;
  return nb[static_cast<std::size_t>(params.min_pts) - 1].first;
}

ReachabilityOrdering optics_order(std::span<const Point> points, const OpticsParams& params) {
  validate(params);
  const std::size_t n = points.size();
  ReachabilityOrdering out;
  out.reachability.assign(n, std::nullopt);
  out.core_distance.assign(n, std::nullopt);
  out.order.reserve(n);
  std::vector<bool> processed(n, false);

  // Seeds keyed by (reachability, index) give the deterministic tie order.
  std::set<std::pair<double, std::size_t>> seeds;

  auto expand = [&](std::size_t p) {
    processed[p] = true;
    out.order.push_back(p);
    const auto nb = neighborhood(points, p, params.eps);
    if (nb.size() < static_cast<std::size_t>(params.min_pts)) return;
    const double core = nb[static_cast<std::size_t>(params.min_pts) - 1].first;
    out.core_distance[p] = core;
    for (const auto& [d, o] : nb) {
      if (processed[o]) continue;
      const double r = std::max(core, d);
      auto& cur = out.reachability[o];
      if (!cur) {
        cur = r;
        seeds.emplace(r, o);
      } else if (r < *cur) {
        seeds.erase({*cur, o});
        cur = r;
        seeds.emplace(r, o);
      }
    }
  };

  for (std::size_t start = 0; start < n; ++start) {
    if (processed[start]) continue;
    expand(start);
    while (!seeds.empty()) {
      const auto [r, q] = *seeds.begin();
      seeds.erase(seeds.begin());
      expand(q);
    }
  }
  return out;
}

ClusterAssignment extract_clusters(const ReachabilityOrdering& ordering, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::Validation, "cluster threshold must be > 0");
  ClusterAssignment out;
  out.labels.assign(ordering.reachability.size(), kNoise);
  int current = kNoise;
  int next_id = 0;
  for (std::size_t p : ordering.order) {
    const Distance& r = ordering.reachability[p];
    if (r && *r <= threshold) {
      if (current != kNoise) {
        out.labels[p] = current;
        ++out.cluster_sizes[current];
      }
      continue;
    }
    const Distance& c = ordering.core_distance[p];
    if (c && *c <= threshold) {
      current = next_id++;
      out.labels[p] = current;
      ++out.cluster_sizes[current];
    }
  }
  return out;
}

std::vector<GridEdge> cell_boundary(std::span<const PatchRef> members, const PatchGrid& grid) {
  std::set<PatchRef> cells(members.begin(), members.end());
  auto member = [&](int row, int col) {
    return grid.contains({row, col}) && cells.count({row, col}) > 0;
  };
  std::vector<GridEdge> edges;
  for (const PatchRef& c : cells) {
    const int x = c.col;
    const int y = c.row;
    if (!member(y - 1, x)) edges.push_back({x, y, x + 1, y});
    if (!member(y, x + 1)) edges.push_back({x + 1, y, x + 1, y + 1});
    if (!member(y + 1, x)) edges.push_back({x + 1, y + 1, x, y + 1});
    if (!member(y, x - 1)) edges.push_back({x, y + 1, x, y});
  }
  return edges;
}

ClusterBoundary largest_cluster_boundary(const RoiSelection& selection, const PatchGrid& grid,
                                         const OpticsParams& params, double threshold) {
  if (selection.selected.empty()) {
    throw Error(ErrorCode::EmptySelection, "no selected patches to cluster");
  }
  // std::set iteration is row-major, which fixes the point indices.
  std::vector<PatchRef> cells(selection.selected.begin(), selection.selected.end());
  std::vector<Point> points;
  points.reserve(cells.size());
  for (const auto& c : cells) points.push_back({static_cast<double>(c.col), static_cast<double>(c.row)});

  const auto ordering = optics_order(points, params);
  const auto clusters = extract_clusters(ordering, threshold);
  if (clusters.cluster_sizes.empty()) {
    throw Error(ErrorCode::NoCluster, "no cluster among " + std::to_string(cells.size()) +
                                          " selected patches");
  }
  int best = clusters.cluster_sizes.begin()->first;
  for (const auto& [id, size] : clusters.cluster_sizes) {
    if (size > clusters.cluster_sizes.at(best)) best = id;
  }
  ClusterBoundary out;
  out.cluster_id = best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (clusters.labels[i] == best) out.members.push_back(cells[i]);
  }
  out.edges = cell_boundary(out.members, grid);
  return out;
}

}  // namespace roidet
