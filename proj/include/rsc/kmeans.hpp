#pragma once

#include <rsc/partition.hpp>
#include <rsc/types.hpp>

#include <cstdint>
#include <vector>

namespace rsc {

struct KMeansOptions {
	int restarts = 10;
	int max_iter = 100;
	double tol = 1e-6;
};

struct KMeansResult {
	Partition partition;
	RowMatrix centroids;
	double objective = 0.0;              ///< sum of squared distances to assigned centroids
	int iterations = 0;
	int reseeds = 0;                     ///< empty clusters refilled during the run
	std::vector<double> objective_trace; ///< objective after every centroid update
};

/// D^2-weighted sequential seeding (k-means++). Duplicate points that exhaust the
/// distinct candidates produce duplicated centroids with a warning.
RowMatrix kmeanspp_seed(const RowMatrix& points, int c, std::uint64_t seed);

/// Lloyd iterations from `init`. Stops when the largest centroid shift drops below
/// `tol` or after `max_iter` sweeps. Nearest-centroid ties go to the lowest index;
/// an emptied cluster is refilled with the point farthest from its centroid.
KMeansResult lloyd(const RowMatrix& points, const RowMatrix& init, int max_iter, double tol);

/// Best of `restarts` seeded runs by objective. Restart k uses seed + k.
KMeansResult kmeans(const RowMatrix& points, int c, const KMeansOptions& opts, std::uint64_t seed);

double kmeans_objective(const RowMatrix& points, const Partition& p, const RowMatrix& centroids);

} // namespace rsc
