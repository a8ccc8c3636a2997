#include <rsc/kmeans.hpp>

#include <spdlog/spdlog.h>

#include <cassert>
#include <limits>
#include <random>

namespace rsc {

namespace {

int nearest(const RowMatrix& centroids, const Eigen::Ref<const Eigen::RowVectorXd>& x, double& best) {
	int arg = 0;
	best = std::numeric_limits<double>::infinity();
	for (Index k = 0; k < centroids.rows(); ++k) {
		const double d = (centroids.row(k) - x).squaredNorm();
		if (d < best) {
			best = d;
			arg = static_cast<int>(k);
		}
	}
	return arg;
}

} // namespace

RowMatrix kmeanspp_seed(const RowMatrix& points, int c, std::uint64_t seed) {
	const Index n = points.rows();
	if (c < 1) throw std::invalid_argument("kmeanspp_seed: c must be >= 1");
	if (n < c) throw std::invalid_argument("kmeanspp_seed: need n >= c");

	std::mt19937_64 rng(seed);
	RowMatrix centroids(c, points.cols());
	std::uniform_int_distribution<Index> first(0, n - 1);
	centroids.row(0) = points.row(first(rng));

	Vector d2(n);
	for (Index i = 0; i < n; ++i) d2(i) = (points.row(i) - centroids.row(0)).squaredNorm();

	for (int k = 1; k < c; ++k) {
		const double total = d2.sum();
		Index pick = 0;
		if (!(total > 0.0)) {
			spdlog::warn("k-means++: distinct seeds exhausted at centroid {}; duplicating", k);
			pick = first(rng);
		} else {
			std::uniform_real_distribution<double> u(0.0, total);
			const double target = u(rng);
			double acc = 0.0;
			pick = -1;
			for (Index i = 0; i < n; ++i) {
				acc += d2(i);
				if (acc > target && d2(i) > 0.0) {
					pick = i;
					break;
				}
			}
			// Roundoff can leave target above the running sum; take the last admissible point.
			for (Index i = n - 1; pick < 0; --i)
				if (d2(i) > 0.0) pick = i;
		}
		centroids.row(k) = points.row(pick);
		for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (points.row(i) - centroids.row(k)).squaredNorm());
	}
	return centroids;
}

double kmeans_objective(const RowMatrix& points, const Partition& p, const RowMatrix& centroids) {
	double obj = 0.0;
	for (Index i = 0; i < points.rows(); ++i) obj += (points.row(i) - centroids.row(p[i])).squaredNorm();
	return obj;
}

KMeansResult lloyd(const RowMatrix& points, const RowMatrix& init, int max_iter, double tol) {
	if (max_iter < 1) throw std::invalid_argument("lloyd: max_iter must be >= 1");
	if (init.cols() != points.cols()) throw std::invalid_argument("lloyd: centroid dimension mismatch");
	const Index n = points.rows();
	const int c = static_cast<int>(init.rows());

	KMeansResult res;
	res.centroids = init;
	res.partition = Partition(std::vector<int>(static_cast<std::size_t>(n), 0), c);
	Vector dist(n);

	for (int it = 0; it < max_iter; ++it) {
		for (Index i = 0; i < n; ++i) res.partition.assign[static_cast<std::size_t>(i)] = nearest(res.centroids, points.row(i), dist(i));

		// Refill empty clusters with the point farthest from its current centroid.
		auto counts = res.partition.counts();
		for (int k = 0; k < c; ++k) {
			if (counts[static_cast<std::size_t>(k)] > 0) continue;
			Index far = -1;
			double far_d = -1.0;
			for (Index i = 0; i < n; ++i)
				if (counts[static_cast<std::size_t>(res.partition[i])] > 1 && dist(i) > far_d) {
					far_d = dist(i);
					far = i;
				}
			if (far < 0) break;
			--counts[static_cast<std::size_t>(res.partition[far])];
			res.partition.assign[static_cast<std::size_t>(far)] = k;
			++counts[static_cast<std::size_t>(k)];
			res.centroids.row(k) = points.row(far);
			dist(far) = 0.0;
			++res.reseeds;
		}

		RowMatrix next = RowMatrix::Zero(c, points.cols());
		for (Index i = 0; i < n; ++i) next.row(res.partition[i]) += points.row(i);
		double shift = 0.0;
		for (int k = 0; k < c; ++k) {
			const auto cnt = counts[static_cast<std::size_t>(k)];
			if (cnt > 0)
				next.row(k) /= static_cast<double>(cnt);
			else
				next.row(k) = res.centroids.row(k);
			shift = std::max(shift, (next.row(k) - res.centroids.row(k)).norm());
		}
		res.centroids = std::move(next);
		res.objective = kmeans_objective(points, res.partition, res.centroids);
		assert(res.objective_trace.empty() ||
		       res.objective <= res.objective_trace.back() + 1e-9 * (1.0 + res.objective_trace.back()));
		res.objective_trace.push_back(res.objective);
		res.iterations = it + 1;
		if (shift < tol) break;
	}
	return res;
}

KMeansResult kmeans(const RowMatrix& points, int c, const KMeansOptions& opts, std::uint64_t seed) {
	if (opts.restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
	KMeansResult best;
	bool have = false;
	for (int r = 0; r < opts.restarts; ++r) {
		const auto init = kmeanspp_seed(points, c, seed + static_cast<std::uint64_t>(r));
		auto res = lloyd(points, init, opts.max_iter, opts.tol);
		if (!have || res.objective < best.objective) {
			best = std::move(res);
			have = true;
		}
	}
	return best;
}

} // namespace rsc
