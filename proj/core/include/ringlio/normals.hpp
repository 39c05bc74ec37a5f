#pragma once

#include <cstddef>

#include "ringlio/scan.hpp"

namespace ringlio {

struct NormalOptions {
  /// Neighbors taken from the point's own ring and from each adjacent ring.
  std::size_t k = 5;
  /// Minimum neighbor count (excluding the point itself) to attempt a fit.
  std::size_t min_neighbors = 4;
  /// Neighbor gate: max(max_neighbor_distance_abs, max_neighbor_distance_rel * range).
  double max_neighbor_distance_abs = 0.5;
  double max_neighbor_distance_rel = 0.3;
  /// Line test: the neighborhood needs this many points from adjacent rings
  /// and lambda_mid / lambda_max above min_planarity.
  std::size_t min_off_ring_neighbors = 2;
  double min_planarity = 0.002;
  /// Out-of-plane RMS limit (sqrt of the smallest eigenvalue), m. Rejects
  /// neighborhoods straddling two surfaces.
  double max_plane_rms = 0.05;
};

struct NormalStats {
  std::size_t with_normal = 0;
  std::size_t too_few_neighbors = 0;
  std::size_t line_degenerate = 0;
};

/// Surface normals from ring-structured neighborhoods: k nearest points in the
/// same ring plus k nearest in each adjacent ring, smallest-eigenvalue
/// eigenvector of their covariance, oriented toward the sensor origin.
RingedScan compute_normals(const RingedScan& scan, const NormalOptions& options = {},
                           NormalStats* stats = nullptr);

}  // namespace ringlio
