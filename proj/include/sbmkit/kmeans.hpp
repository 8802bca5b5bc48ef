#pragma once

#include <cstdint>

#include "sbmkit/types.hpp"

namespace sbmkit {

struct KmeansResult {
  Labeling labels;
  double inertia = 0.0;  // within-cluster sum of squared distances
  int iterations = 0;
};

// Lloyd iterations with distance-weighted (D^2) seeding. Assignment ties go
// to the lowest cluster index; a cluster that empties is re-seeded at the
// point farthest from its centroid. Runs `restarts` independent seedings and
// keeps the lowest-inertia run. Deterministic for a given seed.
KmeansResult kmeans(const RowMatrix& points, int k, int restarts, std::uint64_t seed);

}  // namespace sbmkit
