#pragma once

// Straightforward serial implementations of the parallel kernels. They share
// no code with the optimized paths beyond the pixel/camera primitives and
// serve as oracles in tests and as baselines in the benchmark.

#include <vector>

#include "mvskit/geometry.hpp"
#include "mvskit/gpm.hpp"
#include "mvskit/mmd.hpp"
#include "mvskit/point_cloud.hpp"
#include "mvskit/sweep.hpp"

namespace mvskit::reference {

// O(N * M) scan.
std::vector<double> nn_distances(const PointCloud& query, const PointCloud& target);

WarpResult warp_image(const View& src, const View& ref, const DepthMap& depth);

// Per pixel, per slice, per source; windows evaluated directly.
CostVolume build_cost_volume(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                             CostKind kind, int window);

// One direction at a time, pixel by pixel.
Image propagate(const Image& distorted, const AffinityField& affinity);

// Plain double loops, sigma given explicitly.
double mmd_squared(const EmbeddingSet& x, const EmbeddingSet& y, double bandwidth);

}  // namespace mvskit::reference
