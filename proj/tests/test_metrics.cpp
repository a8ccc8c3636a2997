#include "oracles.hpp"

#include <rsc/metrics.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace rsc;

namespace {

const Partition kTruth({0, 0, 1, 1}, 2);
const Partition kPred({0, 1, 1, 1}, 2);

Partition random_labels(std::mt19937_64& rng, Index n, int c) {
	std::uniform_int_distribution<int> u(0, c - 1);
	std::vector<int> a(static_cast<std::size_t>(n));
	for (auto& v : a) v = u(rng);
	return Partition(std::move(a), c);
}

Partition relabel(const Partition& p, const std::vector<int>& perm) {
	std::vector<int> a = p.assign;
	for (auto& v : a) v = perm[static_cast<std::size_t>(v)];
	return Partition(std::move(a), p.c);
}

} // namespace

TEST(Accuracy, HandExample) { EXPECT_DOUBLE_EQ(accuracy(kPred, kTruth), 0.75); }

TEST(Accuracy, PermutationInvariant) {
	const Partition t({0, 1, 2, 0, 1, 2}, 3);
	EXPECT_DOUBLE_EQ(accuracy(t, t), 1.0);
	EXPECT_DOUBLE_EQ(accuracy(relabel(t, {1, 2, 0}), t), 1.0);
}

TEST(Accuracy, RectangularContingency) {
	const Partition truth({0, 0, 1, 1, 2, 2}, 3);
	const Partition pred({0, 0, 0, 0, 1, 1}, 2);
	EXPECT_DOUBLE_EQ(accuracy(pred, truth), oracle::brute_accuracy(pred.assign, 2, truth.assign, 3));
	EXPECT_DOUBLE_EQ(accuracy(truth, pred), oracle::brute_accuracy(truth.assign, 3, pred.assign, 2));
}

TEST(Accuracy, MatchesBruteForceOverBijections) {
	std::mt19937_64 rng(42);
	for (int trial = 0; trial < 200; ++trial) {
		const int cp = 1 + trial % 6, ct = 1 + (trial / 6) % 6;
		const Index n = 5 + trial % 40;
		const Partition pred = random_labels(rng, n, cp), truth = random_labels(rng, n, ct);
		EXPECT_NEAR(accuracy(pred, truth), oracle::brute_accuracy(pred.assign, cp, truth.assign, ct), 1e-12) << trial;
	}
}

TEST(Nmi, HandExamples) {
	const Partition t({0, 0, 1, 1, 2, 2}, 3);
	EXPECT_NEAR(nmi(t, t), 1.0, 1e-12);
	EXPECT_NEAR(nmi(Partition({0, 0, 0, 0, 0, 0}, 1), t), 0.0, 1e-12);
	EXPECT_NEAR(nmi(Partition({0, 1, 0, 1}, 2), kTruth), 0.0, 1e-12);
}

TEST(Nmi, MatchesEntropyOracle) {
	std::mt19937_64 rng(7);
	for (int trial = 0; trial < 100; ++trial) {
		const Partition a = random_labels(rng, 30, 2 + trial % 4), b = random_labels(rng, 30, 2 + trial % 3);
		EXPECT_NEAR(nmi(a, b), oracle::brute_nmi(a.assign, b.assign), 1e-12);
	}
}

TEST(Nmi, AlternativeNormalizationsBracketSqrt) {
	std::mt19937_64 rng(3);
	const Partition a = random_labels(rng, 60, 3), b = random_labels(rng, 60, 4);
	EXPECT_LE(nmi(a, b, NmiNorm::Max), nmi(a, b, NmiNorm::Sqrt) + 1e-15);
	EXPECT_LE(nmi(a, b, NmiNorm::Sqrt), nmi(a, b, NmiNorm::Min) + 1e-15);
	EXPECT_LE(nmi(a, b, NmiNorm::Mean), nmi(a, b, NmiNorm::Sqrt) + 1e-15);
}

TEST(Purity, HandExamples) {
	EXPECT_DOUBLE_EQ(purity(kPred, kTruth), 0.75);
	EXPECT_DOUBLE_EQ(purity(Partition({0, 0, 0, 0}, 1), kTruth), 0.5);
	EXPECT_DOUBLE_EQ(purity(kTruth, kTruth), 1.0);
}

TEST(PairCounts, HandExample) {
	const auto pc = pair_counts(kPred, kTruth);
	EXPECT_EQ(pc.tp, 1u);
	EXPECT_EQ(pc.fp, 2u);
	EXPECT_EQ(pc.fn, 1u);
	EXPECT_EQ(pc.tn, 2u);
}

TEST(PairCounts, Extremes) {
	const Partition singletons({0, 1, 2}, 3), one({0, 0, 0}, 1);
	auto pc = pair_counts(one, singletons);
	EXPECT_EQ(pc.tp, 0u);
	EXPECT_EQ(pc.fp, 3u);
	pc = pair_counts(singletons, one);
	EXPECT_EQ(pc.fn, 3u);
	pc = pair_counts(kTruth, kTruth);
	EXPECT_EQ(pc.fp, 0u);
	EXPECT_EQ(pc.fn, 0u);
}

TEST(PairCounts, MatchesEnumeration) {
	std::mt19937_64 rng(11);
	for (int trial = 0; trial < 50; ++trial) {
		const Partition a = random_labels(rng, 25, 3), b = random_labels(rng, 25, 4);
		const auto pc = pair_counts(a, b);
		const auto ref = oracle::brute_pairs(a.assign, b.assign);
		EXPECT_EQ(static_cast<double>(pc.tp), ref.tp);
		EXPECT_EQ(static_cast<double>(pc.fp), ref.fp);
		EXPECT_EQ(static_cast<double>(pc.fn), ref.fn);
		EXPECT_EQ(static_cast<double>(pc.tn), ref.tn);
	}
}

TEST(PairMetrics, HandExample) {
	EXPECT_NEAR(precision(kPred, kTruth), 1.0 / 3.0, 1e-15);
	EXPECT_NEAR(recall(kPred, kTruth), 0.5, 1e-15);
	EXPECT_NEAR(f_score(kPred, kTruth), 0.4, 1e-15);
}

TEST(Ari, IdenticalAndDegenerate) {
	EXPECT_DOUBLE_EQ(ari(kTruth, kTruth), 1.0);
	const Partition one({0, 0, 0}, 1), singletons({0, 1, 2}, 3);
	EXPECT_DOUBLE_EQ(ari(one, one), 1.0);
	EXPECT_DOUBLE_EQ(ari(singletons, singletons), 1.0);
	EXPECT_DOUBLE_EQ(ari(one, singletons), 0.0);
}

TEST(Ari, ContingencyEqualsPairRoute) {
	std::mt19937_64 rng(5);
	for (int trial = 0; trial < 200; ++trial) {
		const Partition a = random_labels(rng, 10 + trial % 30, 1 + trial % 6);
		const Partition b = random_labels(rng, a.n(), 1 + (trial / 6) % 6);
		EXPECT_NEAR(ari(a, b), oracle::ari_from_pairs(oracle::brute_pairs(a.assign, b.assign)), 1e-10) << trial;
	}
}

TEST(Ari, NullMeanNearZero) {
	std::mt19937_64 rng(99);
	double sum = 0.0;
	for (int trial = 0; trial < 200; ++trial) sum += ari(random_labels(rng, 50, 4), random_labels(rng, 50, 4));
	const double mean = sum / 200.0;
	EXPECT_GT(mean, -0.05);
	EXPECT_LT(mean, 0.05);
}

TEST(Evaluate, AllOnesOnPermutedTruthAndInvariant) {
	std::mt19937_64 rng(1);
	const Partition t = random_labels(rng, 40, 4);
	const MetricsReport m = evaluate(relabel(t, {3, 1, 0, 2}), t);
	for (double v : {m.acc, m.nmi, m.purity, m.ari, m.precision, m.recall, m.f_score, m.average}) EXPECT_NEAR(v, 1.0, 1e-12);

	const Partition p = random_labels(rng, 40, 3);
	const MetricsReport a = evaluate(p, t), b = evaluate(relabel(p, {2, 0, 1}), relabel(t, {1, 2, 3, 0}));
	EXPECT_NEAR(a.average, b.average, 1e-12);
	EXPECT_NEAR(a.average, (a.acc + a.nmi + a.purity + a.ari + a.precision + a.recall + a.f_score) / 7.0, 1e-15);
}

TEST(Evaluate, SizeMismatchThrows) {
	EXPECT_THROW(accuracy(Partition({0, 1}, 2), kTruth), std::invalid_argument);
}

TEST(Evaluate, JsonRoundsToFourDecimals) {
	const auto j = to_json(evaluate(kPred, kTruth));
	EXPECT_DOUBLE_EQ(j["precision"].get<double>(), 0.3333);
	EXPECT_DOUBLE_EQ(j["acc"].get<double>(), 0.75);
}

TEST(Assignment, SolvesSmallMaximisation) {
	Matrix w(3, 3);
	w << 1, 2, 3, 2, 4, 6, 3, 6, 9;
	const auto m = max_weight_assignment(w);
	double total = 0.0;
	for (int i = 0; i < 3; ++i) total += w(i, m[static_cast<std::size_t>(i)]);
	EXPECT_DOUBLE_EQ(total, 14.0); // rearrangement: sorted pairing of 1,2,3 with itself
}
