#include "oracles.hpp"

#include <rsc/dataset.hpp>
#include <rsc/restart_kmeans.hpp>

#include <gtest/gtest.h>

using namespace rsc;

namespace {

Dataset unit_blobs(int c, int per, double sep, std::uint64_t seed) {
	return normalize_rows(make_blobs(c, per, 3, sep, seed));
}

RestartParams exact_sampling() {
	RestartParams p;
	p.tau = 1.0;
	p.landmarks = SizePolicy::fraction(1.0);
	p.rank = SizePolicy::fraction(1.0);
	return p;
}

} // namespace

TEST(AssembleEmbedding, BlockPattern) {
	const RowMatrix x = oracle::random_unit_rows(5, 3, 1);
	const Partition p({0, 1, 0, 1, 1}, 2);
	KernelParams kp;
	const auto blocks = build_blocks(x, p, kp, 0, 3);
	std::vector<BlockEigpair> pairs;
	for (const auto& b : blocks) pairs.push_back(block_top_eigpair(b.Delta, b.Qhat));
	const Matrix m = assemble_embedding(blocks, pairs, 5);
	for (Index i = 0; i < 5; ++i)
		for (int j = 0; j < 2; ++j)
			if (p[i] != j) EXPECT_EQ(m(i, j), 0.0);
	EXPECT_LE(orthogonality_error(m), 1e-12);
	EXPECT_NEAR(m.col(0).norm(), 1.0, 1e-12);
}

TEST(AssembleEmbedding, OverlapAndGapsAreLogicErrors) {
	const RowMatrix x = oracle::random_unit_rows(4, 3, 2);
	KernelParams kp;
	auto blocks = build_blocks(x, Partition({0, 0, 1, 1}, 2), kp, 0, 0);
	std::vector<BlockEigpair> pairs;
	for (const auto& b : blocks) pairs.push_back(block_top_eigpair(b.Delta, b.Qhat));
	blocks[1].member_rows = {1, 3};
	EXPECT_THROW(assemble_embedding(blocks, pairs, 4), std::logic_error);
	blocks[1].member_rows = {2, 3};
	EXPECT_THROW(assemble_embedding(blocks, pairs, 5), std::logic_error);
}

TEST(SubspaceDistance, Extremes) {
	std::mt19937_64 rng(3);
	Matrix m = Matrix::Zero(6, 2);
	m(0, 0) = m(1, 0) = m(2, 1) = m(3, 1) = std::sqrt(0.5);
	EXPECT_NEAR(subspace_distance(m, m), 0.0, 1e-14);
	EXPECT_NEAR(subspace_distance(m, m * oracle::random_orthogonal(2, rng)), 0.0, 1e-12);

	Matrix a = Matrix::Zero(3, 1), b = Matrix::Zero(3, 1);
	a(0, 0) = 1.0;
	b(1, 0) = 1.0;
	EXPECT_NEAR(subspace_distance(a, b), 1.0, 1e-15);
}

TEST(Reclassify, PassesThroughAndRepairs) {
	RowMatrix pts(4, 1);
	pts << 0, 1, 2, 50;
	const Partition prev({0, 0, 1, 1}, 2);
	const auto same = reclassify(prev, Partition({1, 1, 0, 0}, 2), pts);
	EXPECT_EQ(same.partition, Partition({1, 1, 0, 0}, 2));
	EXPECT_EQ(same.repaired, 0);

	const auto fixed = reclassify(prev, Partition({0, 0, 0, 0}, 2), pts);
	EXPECT_EQ(fixed.repaired, 1);
	EXPECT_EQ(fixed.partition.empty_clusters(), 0);
	EXPECT_EQ(fixed.partition[3], 1);
	const auto again = reclassify(fixed.partition, fixed.partition, pts);
	EXPECT_EQ(again.partition, fixed.partition);

	EXPECT_THROW(reclassify(prev, Partition({0, 1, 0}, 2), pts), std::invalid_argument);
}

TEST(BuildBlocks, KernelErrorCarriesCycle) {
	const RowMatrix x = oracle::random_unit_rows(3, 2, 4);
	try {
		build_blocks(x, Partition({0, 0, 0}, 2), KernelParams{}, 5, 0);
		FAIL() << "expected KernelError";
	} catch (const KernelError& e) {
		ASSERT_TRUE(e.cycle());
		EXPECT_EQ(*e.cycle(), 5);
		EXPECT_EQ(e.block(), 1);
	}
}

TEST(Algorithm1, ZeroCyclesReturnInit) {
	const Dataset ds = unit_blobs(3, 20, 10.0, 1);
	RestartParams p;
	p.itermax = 0;
	const Partition init = random_partition(ds.n(), 3, 9);
	const auto r = run_algorithm1(ds, 3, init, p);
	EXPECT_TRUE(r.history.empty());
	EXPECT_EQ(r.partition, init);
	EXPECT_FALSE(r.converged);
}

TEST(Algorithm1, TruthInitIsAFixedPoint) {
	const Dataset ds = unit_blobs(3, 40, 10.0, 2);
	const Partition truth = truth_partition(*ds.labels);
	const auto r = run_algorithm1(ds, 3, truth, exact_sampling());
	EXPECT_TRUE(r.converged);
	EXPECT_EQ(r.history.size(), 2u);
	EXPECT_DOUBLE_EQ(accuracy(r.partition, truth), 1.0);
	ASSERT_TRUE(r.history[1].metrics);
	EXPECT_DOUBLE_EQ(r.history[1].metrics->acc, 1.0);
}

TEST(Algorithm1, FullRankTopEigenvalueIsOne) {
	const Dataset ds = unit_blobs(3, 30, 10.0, 3);
	RestartParams p = exact_sampling();
	p.itermax = 1;
	const auto r = run_algorithm1(ds, 3, truth_partition(*ds.labels), p);
	ASSERT_EQ(r.history.size(), 1u);
	for (double l : r.history[0].block_lambdas) EXPECT_NEAR(l, 1.0, 1e-6);
}

TEST(Algorithm1, ObserverSeesOrthonormalEmbeddingAndFullPartitions) {
	const Dataset ds = unit_blobs(4, 30, 3.0, 4);
	RestartParams p;
	p.itermax = 5;
	p.seed = 11;
	int calls = 0;
	const auto r = run_algorithm1(ds, 4, random_initial_partition(ds, 4, 5), p,
	                              [&](int t, const Matrix& m, const Partition& y) {
		                              EXPECT_EQ(t, calls);
		                              ++calls;
		                              EXPECT_LE(orthogonality_error(m), 1e-10);
		                              EXPECT_EQ(y.empty_clusters(), 0);
		                              EXPECT_TRUE((y.indicator().rowwise().sum().array() == 1.0).all());
	                              });
	EXPECT_EQ(calls, static_cast<int>(r.history.size()));
	EXPECT_FALSE(r.history[0].subspace_distance);
	for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_TRUE(r.history[k].subspace_distance);
	EXPECT_TRUE(to_json(r.history.back()).contains("metrics"));
}

TEST(Algorithm1, DeterministicForSeed) {
	const Dataset ds = unit_blobs(3, 30, 4.0, 5);
	RestartParams p;
	p.seed = 7;
	const Partition init = random_initial_partition(ds, 3, 1);
	const auto a = run_algorithm1(ds, 3, init, p), b = run_algorithm1(ds, 3, init, p);
	EXPECT_EQ(a.partition, b.partition);
	EXPECT_EQ(a.history.size(), b.history.size());
	EXPECT_EQ(a.tau, b.tau);
}

TEST(Algorithm1, RejectsBadInputs) {
	const Dataset ds = unit_blobs(3, 5, 4.0, 6);
	EXPECT_THROW(run_algorithm1(ds, 1, Partition(std::vector<int>(15, 0), 1), {}), std::invalid_argument);
	EXPECT_THROW(run_algorithm1(ds, 3, Partition({0, 1, 2}, 3), {}), std::invalid_argument);
}
