#include <rsc/partition.hpp>

#include <spdlog/spdlog.h>

#include <random>

namespace rsc {

Partition::Partition(std::vector<int> a, int clusters) : assign(std::move(a)), c(clusters) {
	if (c < 1) throw std::invalid_argument("Partition: cluster count must be >= 1");
	for (std::size_t i = 0; i < assign.size(); ++i)
		if (assign[i] < 0 || assign[i] >= c)
			throw std::invalid_argument("Partition: id " + std::to_string(assign[i]) + " at row " + std::to_string(i) +
			                            " outside [0," + std::to_string(c) + ")");
}

std::vector<Index> Partition::counts() const {
	std::vector<Index> out(static_cast<std::size_t>(c), 0);
	for (int a : assign) ++out[static_cast<std::size_t>(a)];
	return out;
}

int Partition::empty_clusters() const {
	int e = 0;
	for (Index k : counts()) e += (k == 0);
	return e;
}

std::vector<IndexList> Partition::members() const {
	std::vector<IndexList> out(static_cast<std::size_t>(c));
	for (std::size_t i = 0; i < assign.size(); ++i) out[static_cast<std::size_t>(assign[i])].push_back(static_cast<Index>(i));
	return out;
}

Matrix Partition::indicator() const {
	Matrix y = Matrix::Zero(n(), c);
	for (Index i = 0; i < n(); ++i) y(i, (*this)[i]) = 1.0;
	return y;
}

Partition Partition::from_indicator(const Matrix& y) {
	std::vector<int> a(static_cast<std::size_t>(y.rows()));
	for (Index i = 0; i < y.rows(); ++i) {
		int hot = -1;
		for (Index j = 0; j < y.cols(); ++j) {
			if (y(i, j) == 1.0) {
				if (hot >= 0) throw std::invalid_argument("indicator row " + std::to_string(i) + " has several ones");
				hot = static_cast<int>(j);
			} else if (y(i, j) != 0.0) {
				throw std::invalid_argument("indicator row " + std::to_string(i) + " is not binary");
			}
		}
		if (hot < 0) throw std::invalid_argument("indicator row " + std::to_string(i) + " has no one");
		a[static_cast<std::size_t>(i)] = hot;
	}
	return Partition(std::move(a), static_cast<int>(y.cols()));
}

Partition random_partition(Index n, int c, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<int> pick(0, c - 1);
	std::vector<int> a(static_cast<std::size_t>(n));
	for (auto& x : a) x = pick(rng);
	return Partition(std::move(a), c);
}

int repair_empty_clusters(Partition& p, const RowMatrix& points) {
	if (points.rows() != p.n()) throw std::invalid_argument("repair_empty_clusters: points/partition size mismatch");
	int moves = 0;
	auto counts = p.counts();
	for (int k = 0; k < p.c; ++k) {
		if (counts[static_cast<std::size_t>(k)] > 0) continue;

		RowMatrix centroids = RowMatrix::Zero(p.c, points.cols());
		for (Index i = 0; i < p.n(); ++i) centroids.row(p[i]) += points.row(i);
		for (int j = 0; j < p.c; ++j)
			if (counts[static_cast<std::size_t>(j)] > 0) centroids.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);

		Index best = -1;
		double best_dist = -1.0;
		for (Index i = 0; i < p.n(); ++i) {
			if (counts[static_cast<std::size_t>(p[i])] < 2) continue;
			const double dist = (points.row(i) - centroids.row(p[i])).squaredNorm();
			if (dist > best_dist) {
				best_dist = dist;
				best = i;
			}
		}
		if (best < 0) break; // n < c: nothing left to donate
		--counts[static_cast<std::size_t>(p[best])];
		p.assign[static_cast<std::size_t>(best)] = k;
		++counts[static_cast<std::size_t>(k)];
		++moves;
	}
	if (moves > 0) spdlog::debug("repaired {} empty cluster(s)", moves);
	return moves;
}

} // namespace rsc
