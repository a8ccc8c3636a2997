#pragma once

#include <rsc/types.hpp>

#include <cstdint>
#include <vector>

namespace rsc {

/// Hard assignment of n samples to c clusters. Equivalent to a one-hot n×c indicator.
struct Partition {
	std::vector<int> assign;
	int c = 0;

	Partition() = default;
	Partition(std::vector<int> a, int clusters);

	Index n() const noexcept { return static_cast<Index>(assign.size()); }
	int operator[](Index i) const { return assign[static_cast<std::size_t>(i)]; }

	std::vector<Index> counts() const;
	int empty_clusters() const;
	/// Global row indices per cluster, ascending.
	std::vector<IndexList> members() const;

	Matrix indicator() const;
	static Partition from_indicator(const Matrix& y);

	bool operator==(const Partition&) const = default;
};

/// Uniform random assignment of n samples to c clusters (before any repair).
Partition random_partition(Index n, int c, std::uint64_t seed);

/// Fills every empty cluster by moving, from a cluster with at least two members,
/// the point farthest (in `points` space) from its current cluster centroid.
/// Ties resolve to the lowest row index. Returns the number of moves made.
int repair_empty_clusters(Partition& p, const RowMatrix& points);

} // namespace rsc
