#include "oracles.hpp"

#include <rsc/dataset.hpp>
#include <rsc/rotation.hpp>

#include <gtest/gtest.h>

using namespace rsc;

namespace {

struct Fixture {
	RowMatrix x;
	Partition p;
	std::vector<BlockFactors> blocks;
	Vector deg;
	Matrix l;
};

Fixture small_instance(Index n, int c, std::uint64_t seed) {
	Fixture f;
	f.x = oracle::random_unit_rows(n, 4, seed);
	f.p = random_partition(n, c, seed + 1);
	repair_empty_clusters(f.p, f.x);
	KernelParams kp;
	kp.tau = 0.9;
	kp.landmarks = SizePolicy::fraction(0.7);
	kp.rank = SizePolicy::absolute(6);
	f.blocks = build_blocks(f.x, f.p, kp, 0, seed);
	f.deg = global_degrees(f.blocks, n);
	f.l = oracle::dense_normalized(f.blocks, n);
	return f;
}

Matrix random_stiefel(Index n, Index c, std::mt19937_64& rng) {
	std::normal_distribution<double> g;
	Matrix a(n, c);
	for (Index i = 0; i < n; ++i)
		for (Index j = 0; j < c; ++j) a(i, j) = g(rng);
	Eigen::HouseholderQR<Matrix> qr(a);
	return qr.householderQ() * Matrix::Identity(n, c);
}

} // namespace

TEST(TargetS, HandExampleAndUnitColumns) {
	Vector deg(3);
	deg << 1, 3, 2;
	const Partition p({0, 0, 1}, 2);
	const Matrix s = target_matrix_S(deg, p, Matrix::Identity(2, 2));
	EXPECT_NEAR(s(0, 0), 0.5, 1e-15);
	EXPECT_NEAR(s(1, 0), std::sqrt(0.75), 1e-15);
	EXPECT_NEAR(s(2, 1), 1.0, 1e-15);
	EXPECT_EQ(s(2, 0), 0.0);
	EXPECT_NEAR(s.squaredNorm(), 2.0, 1e-14);
}

TEST(TargetS, EqualsExplicitProductWithQTranspose) {
	std::mt19937_64 rng(1);
	const Fixture f = small_instance(40, 3, 2);
	const Matrix q = oracle::random_orthogonal(3, rng);
	const Matrix y = f.p.indicator();
	const Vector inv = (y.transpose() * f.deg.asDiagonal() * y).diagonal().cwiseSqrt().cwiseInverse();
	const Matrix explicit_s = f.deg.cwiseSqrt().asDiagonal() * y * inv.asDiagonal() * q.transpose();
	const Matrix s = target_matrix_S(f.deg, f.p, q);
	EXPECT_LE((s - explicit_s).cwiseAbs().maxCoeff(), 1e-13);
	EXPECT_NEAR(s.squaredNorm(), 3.0, 1e-12);
}

TEST(TargetS, EmptyClusterThrows) {
	EXPECT_THROW(target_matrix_S(Vector::Ones(2), Partition({0, 0}, 2), Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST(PolarFactor, OrthonormalAndSymmetricCross) {
	std::mt19937_64 rng(2);
	const Matrix k = random_stiefel(12, 3, rng) * Vector(Eigen::Vector3d(3, 2, 0.5)).asDiagonal() +
	                 0.1 * Matrix::Random(12, 3);
	const auto pf = polar_factor(k);
	EXPECT_FALSE(pf.rank_deficient);
	EXPECT_LE(orthogonality_error(pf.factor), 1e-12);
	const Matrix h = pf.factor.transpose() * k;
	EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
	EXPECT_GE(oracle::sym_eigenvalues_desc(0.5 * (h + h.transpose())).minCoeff(), -1e-12);
}

TEST(PolarFactor, RankDeficientStillOrthonormal) {
	Matrix k = Matrix::Zero(5, 2);
	k(0, 0) = 2.0;
	const auto pf = polar_factor(k);
	EXPECT_TRUE(pf.rank_deficient);
	EXPECT_LE(orthogonality_error(pf.factor), 1e-12);
	EXPECT_NEAR(std::abs(pf.factor(0, 0)), 1.0, 1e-12);
}

TEST(ApplyLaplacian, MatchesDense) {
	std::mt19937_64 rng(3);
	const Fixture f = small_instance(50, 3, 4);
	const Matrix m = random_stiefel(50, 3, rng);
	EXPECT_LE((apply_laplacian(f.blocks, m) - f.l * m).cwiseAbs().maxCoeff(), 1e-12);
	for (const auto& b : f.blocks)
		for (Index k = 0; k < b.size(); ++k) EXPECT_EQ(f.deg(b.member_rows[static_cast<std::size_t>(k)]), b.deg(k));
}

TEST(Gpi, LargeLambdaApproachesPolarOfS) {
	std::mt19937_64 rng(4);
	const Fixture f = small_instance(60, 3, 5);
	const Matrix s = target_matrix_S(f.deg, f.p, oracle::random_orthogonal(3, rng));
	const auto r = gpi_update_M(f.blocks, s, 1e6, random_stiefel(60, 3, rng), 100, 1e-12);
	EXPECT_LE((r.M - polar_factor(s).factor).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Gpi, ObjectiveNonDecreasingAndFixedPoint) {
	std::mt19937_64 rng(5);
	const Fixture f = small_instance(60, 4, 6);
	const Matrix s = target_matrix_S(f.deg, f.p, Matrix::Identity(4, 4));
	const auto r = gpi_update_M(f.blocks, s, 1.0, random_stiefel(60, 4, rng), 500, 1e-14);
	ASSERT_GE(r.objective.size(), 2u);
	for (std::size_t k = 1; k < r.objective.size(); ++k) EXPECT_GE(r.objective[k], r.objective[k - 1] - 1e-12);
	EXPECT_LE(orthogonality_error(r.M), 1e-12);

	const auto again = gpi_update_M(f.blocks, s, 1.0, r.M, 5, 1e-9);
	EXPECT_EQ(again.iterations, 1);
	EXPECT_NEAR(again.objective.back(), r.objective.back(), 1e-9);
}

TEST(UpdateQ, SignedDiagonal) {
	Matrix m(2, 2);
	m << 2, 0, 0, -3;
	const Matrix q = update_Q(m, Vector::Ones(2), Partition({0, 1}, 2));
	EXPECT_NEAR(q(0, 0), 1.0, 1e-15);
	EXPECT_NEAR(q(1, 1), -1.0, 1e-15);
	EXPECT_NEAR(q(0, 1), 0.0, 1e-15);
}

TEST(UpdateQ, BeatsRandomRotations) {
	std::mt19937_64 rng(6);
	const Fixture f = small_instance(40, 3, 7);
	const Matrix m = random_stiefel(40, 3, rng);
	const Matrix q = update_Q(m, f.deg, f.p);
	EXPECT_LE(orthogonality_error(q), 1e-12);
	const double best = objective_f(f.blocks, m, q, f.p, 1.0, f.deg).term2;
	for (int k = 0; k < 500; ++k) {
		const Matrix r = oracle::random_orthogonal(3, rng);
		EXPECT_GE(objective_f(f.blocks, m, r, f.p, 1.0, f.deg).term2, best - 1e-12);
	}
}

TEST(UpdateY, AbsoluteValueTiesAndScaling) {
	Matrix m(4, 2);
	m << 0.1, -0.9, 0.5, 0.5, 0.8, 0.2, -0.7, 0.3;
	const auto y = update_Y(m, Matrix::Identity(2, 2));
	EXPECT_EQ(y.partition.assign, (std::vector<int>{1, 0, 0, 0}));
	EXPECT_EQ(y.repaired, 0);

	Matrix scaled = m;
	scaled.row(2) *= 7.5;
	scaled.row(0) *= 0.01;
	EXPECT_EQ(update_Y(scaled, Matrix::Identity(2, 2)).partition, y.partition);
}

TEST(UpdateY, RefillsEmptyClusters) {
	Matrix m(3, 2);
	m << 1, 0, 0.9, 0.1, 0.6, 0.4;
	const auto y = update_Y(m, Matrix::Identity(2, 2));
	EXPECT_EQ(y.repaired, 1);
	EXPECT_EQ(y.partition.empty_clusters(), 0);
}

TEST(Objective, FactoredMatchesDense) {
	std::mt19937_64 rng(7);
	for (std::uint64_t seed = 0; seed < 5; ++seed) {
		const Fixture f = small_instance(50 + 10 * static_cast<Index>(seed), 3, 10 + seed);
		const Matrix m = random_stiefel(f.x.rows(), 3, rng);
		const Matrix q = oracle::random_orthogonal(3, rng);
		for (double lambda : {0.1, 1.0, 10.0}) {
			const auto t = objective_f(f.blocks, m, q, f.p, lambda, f.deg);
			EXPECT_NEAR(t.f, oracle::dense_objective(f.l, m, q, f.p, f.deg, lambda), 1e-8);
			EXPECT_NEAR(t.term1, (f.l - m * m.transpose()).squaredNorm(), 1e-8);
		}
	}
}

TEST(Algorithm2, ZeroCyclesReturnInit) {
	const Dataset ds = normalize_rows(make_blobs(3, 20, 3, 5.0, 1));
	RotationParams p;
	p.itermax = 0;
	const Partition init = random_partition(ds.n(), 3, 2);
	const auto r = run_algorithm2(ds, 3, init, p);
	EXPECT_TRUE(r.history.empty());
	EXPECT_EQ(r.partition, init);
}

TEST(Algorithm2, SweepInvariants) {
	for (std::uint64_t seed = 0; seed < 3; ++seed) {
		const Dataset ds = normalize_rows(make_blobs(3, 40, 3, 2.0, seed));
		RotationParams p;
		p.itermax = 6;
		p.seed = seed;
		p.lambda = 0.5 + static_cast<double>(seed);
		const auto r = run_algorithm2(ds, 3, random_initial_partition(ds, 3, seed + 100), p,
		                              [](int, const Matrix& m, const Partition& y) {
			                              EXPECT_LE(orthogonality_error(m), 1e-10);
			                              EXPECT_EQ(y.empty_clusters(), 0);
		                              });
		for (const auto& h : r.history) {
			const double scale = 1.0 + std::abs(h.f_before);
			EXPECT_LE(h.f_after_M, h.f_before + 1e-9 * scale) << "cycle " << h.cycle;
			EXPECT_LE(h.f_after_Q, h.f_after_M + 1e-9 * scale) << "cycle " << h.cycle;
			EXPECT_LE(h.orthogonality_M, 1e-10);
			EXPECT_LE(h.orthogonality_Q, 1e-10);
			for (std::size_t k = 1; k < h.gpi_objective.size(); ++k)
				EXPECT_GE(h.gpi_objective[k], h.gpi_objective[k - 1] - 1e-9);
			EXPECT_NEAR(h.terms.f, h.terms.term1 + p.lambda * h.terms.term2, 1e-9 * scale);
		}
		EXPECT_LE(orthogonality_error(r.Q), 1e-10);
		EXPECT_TRUE(to_json(r.history.front()).contains("f_after_Q"));
	}
}

TEST(Algorithm2, RejectsBadLambda) {
	const Dataset ds = normalize_rows(make_blobs(2, 10, 2, 5.0, 1));
	RotationParams p;
	p.lambda = 0.0;
	EXPECT_THROW(run_algorithm2(ds, 2, truth_partition(*ds.labels), p), std::invalid_argument);
}
