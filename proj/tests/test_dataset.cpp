#include "oracles.hpp"

#include <rsc/dataset.hpp>
#include <rsc/partition.hpp>

#include <gtest/gtest.h>

using namespace rsc;

TEST(LoadCsv, ParsesFeaturesAndReindexesLabels) {
	oracle::TempDir dir("csv");
	const auto p = dir.write("a.csv", "1,0,a\n0,1,a\n5,5,b\n");
	const Dataset ds = load_csv(p, 2);
	EXPECT_EQ(ds.n(), 3);
	EXPECT_EQ(ds.d(), 2);
	ASSERT_TRUE(ds.labels);
	EXPECT_EQ(*ds.labels, (std::vector<int>{0, 0, 1}));
	EXPECT_DOUBLE_EQ(ds.samples(2, 1), 5.0);
}

TEST(LoadCsv, DetectsHeaderRow) {
	oracle::TempDir dir("csv");
	const auto p = dir.write("h.csv", "x,y,label\n1,2,7\n3,4,3\n");
	const Dataset ds = load_csv(p, 2);
	EXPECT_EQ(ds.n(), 2);
	EXPECT_EQ(*ds.labels, (std::vector<int>{0, 1}));
}

TEST(LoadCsv, NonNumericCellNamesTheLine) {
	oracle::TempDir dir("csv");
	const auto p = dir.write("bad.csv", "1,x,0\n");
	try {
		load_csv(p);
		FAIL() << "expected DatasetError";
	} catch (const DatasetError& e) {
		EXPECT_EQ(e.line(), 1u);
	}
}

TEST(LoadCsv, ArityMismatchIsAnError) {
	oracle::TempDir dir("csv");
	const auto p = dir.write("arity.csv", "1,2\n3,4,5\n");
	try {
		load_csv(p);
		FAIL() << "expected DatasetError";
	} catch (const DatasetError& e) {
		EXPECT_EQ(e.line(), 2u);
		EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
	}
}

TEST(LoadCsv, EmptyFileIsAnError) {
	oracle::TempDir dir("csv");
	EXPECT_THROW(load_csv(dir.write("empty.csv", "")), DatasetError);
}

TEST(LoadCsv, WineHasPublishedShape) {
	const Dataset ds = load_csv(std::string(RSC_DATA_DIR) + "/wine.csv", 13);
	EXPECT_EQ(ds.n(), 178);
	EXPECT_EQ(ds.d(), 13);
	EXPECT_EQ(ds.num_classes(), 3);
}

TEST(LoadLibsvm, DenseFromSparse) {
	oracle::TempDir dir("svm");
	const auto r = load_libsvm(dir.write("a.svm", "1 1:0.5 3:0.5\n"));
	EXPECT_EQ(r.dataset.n(), 1);
	EXPECT_EQ(r.dataset.d(), 3);
	EXPECT_DOUBLE_EQ(r.dataset.samples(0, 0), 0.5);
	EXPECT_DOUBLE_EQ(r.dataset.samples(0, 1), 0.0);
	EXPECT_DOUBLE_EQ(r.dataset.samples(0, 2), 0.5);
	EXPECT_EQ(*r.dataset.labels, std::vector<int>{0});
}

TEST(LoadLibsvm, ReindexesLabelsAndCountsSkippedLines) {
	oracle::TempDir dir("svm");
	const auto r = load_libsvm(dir.write("b.svm", "3 1:1\n\n# note\n7 2:1\n"));
	EXPECT_EQ(*r.dataset.labels, (std::vector<int>{0, 1}));
	EXPECT_EQ(r.skipped_lines, 2u);
}

TEST(LoadLibsvm, RejectsNonIncreasingIndices) {
	oracle::TempDir dir("svm");
	EXPECT_THROW(load_libsvm(dir.write("c.svm", "1 2:1 2:3\n")), DatasetError);
	EXPECT_THROW(load_libsvm(dir.write("d.svm", "1 3:1 1:3\n")), DatasetError);
}

TEST(LoadLibsvm, RejectsMissingLabel) {
	oracle::TempDir dir("svm");
	EXPECT_THROW(load_libsvm(dir.write("e.svm", "1:0.5 2:0.5\n")), DatasetError);
}

TEST(WriteCsv, RoundTrip) {
	oracle::TempDir dir("rt");
	const Dataset ds = make_blobs(3, 20, 4, 5.0, 11);
	write_csv(ds, dir.path / "rt.csv");
	const Dataset back = load_csv(dir.path / "rt.csv", 4);
	ASSERT_EQ(back.n(), ds.n());
	EXPECT_LE((back.samples - ds.samples).cwiseAbs().maxCoeff(), 1e-12);
	EXPECT_EQ(*back.labels, *ds.labels);
}

TEST(NormalizeRows, ThreeFourFive) {
	Dataset ds;
	ds.samples = RowMatrix{{3.0, 4.0}, {1.0, 0.0}};
	const Dataset out = normalize_rows(ds);
	EXPECT_NEAR(out.samples(0, 0), 0.6, 1e-15);
	EXPECT_NEAR(out.samples(0, 1), 0.8, 1e-15);
	EXPECT_EQ(out.samples(1, 0), 1.0);
	EXPECT_EQ(out.samples(1, 1), 0.0);
}

TEST(NormalizeRows, ZeroRowNamesIndex) {
	Dataset ds;
	ds.samples = RowMatrix{{1.0, 1.0}, {0.0, 0.0}};
	try {
		normalize_rows(ds);
		FAIL() << "expected DatasetError";
	} catch (const DatasetError& e) {
		ASSERT_TRUE(e.row());
		EXPECT_EQ(*e.row(), 1);
	}
}

TEST(NormalizeRows, UnitAndIdempotent) {
	Dataset ds;
	ds.samples = oracle::random_unit_rows(50, 7, 3) * 3.7;
	const Dataset once = normalize_rows(ds);
	const Dataset twice = normalize_rows(once);
	for (Index i = 0; i < once.n(); ++i) EXPECT_NEAR(once.samples.row(i).norm(), 1.0, 1e-12);
	EXPECT_LE((once.samples - twice.samples).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StandardizeColumns, ZeroMeanUnitVariance) {
	Dataset ds;
	ds.samples = oracle::random_unit_rows(40, 3, 9) * 5.0;
	ds.samples.col(1).array() += 10.0;
	const Dataset z = standardize_columns(ds);
	for (Index k = 0; k < 3; ++k) {
		const double mean = z.samples.col(k).mean();
		const double var = (z.samples.col(k).array() - mean).square().sum() / static_cast<double>(z.n());
		EXPECT_NEAR(mean, 0.0, 1e-12);
		EXPECT_NEAR(var, 1.0, 1e-9);
	}
}

TEST(Blobs, BalancedAndDeterministic) {
	const Dataset a = make_blobs(3, 100, 2, 10.0, 7);
	const Dataset b = make_blobs(3, 100, 2, 10.0, 7);
	EXPECT_EQ(a.n(), 300);
	std::vector<int> counts(3, 0);
	for (int l : *a.labels) ++counts[static_cast<std::size_t>(l)];
	EXPECT_EQ(counts, (std::vector<int>{100, 100, 100}));
	EXPECT_TRUE(a.samples == b.samples);
	EXPECT_EQ(*a.labels, *b.labels);
}

TEST(Blobs, CentresRespectSeparation) {
	const Blobs b = generate_blobs(5, 10, 3, 8.0, 2);
	for (Index i = 0; i < 5; ++i)
		for (Index j = i + 1; j < 5; ++j) EXPECT_GE((b.centers.row(i) - b.centers.row(j)).norm(), 8.0);
}

TEST(Blobs, WideSeparationIsNearestCentreConsistent) {
	for (std::uint64_t seed = 0; seed < 5; ++seed) {
		const Blobs b = generate_blobs(3, 100, 2, 50.0, seed);
		for (Index i = 0; i < b.dataset.n(); ++i) {
			Index best = 0;
			(b.centers.rowwise() - b.dataset.samples.row(i)).rowwise().squaredNorm().minCoeff(&best);
			EXPECT_EQ(best, (*b.dataset.labels)[static_cast<std::size_t>(i)]);
		}
	}
}

TEST(Blobs, RejectsBadArguments) {
	EXPECT_THROW(generate_blobs(1, 10, 2, 1.0, 0), std::invalid_argument);
	EXPECT_THROW(generate_blobs(3, 0, 2, 1.0, 0), std::invalid_argument);
	EXPECT_THROW(generate_blobs(3, 10, 2, 0.0, 0), std::invalid_argument);
}

TEST(Partition, IndicatorRoundTrip) {
	const Partition p = random_partition(30, 4, 5);
	const Matrix y = p.indicator();
	EXPECT_TRUE((y.rowwise().sum().array() == 1.0).all());
	EXPECT_EQ(Partition::from_indicator(y), p);
}

TEST(Partition, RejectsNonOneHot) {
	Matrix y = Matrix::Zero(2, 2);
	y(0, 0) = 1.0;
	y(1, 0) = 1.0;
	y(1, 1) = 1.0;
	EXPECT_THROW(Partition::from_indicator(y), std::invalid_argument);
	EXPECT_THROW(Partition({0, 3}, 2), std::invalid_argument);
}

TEST(Partition, MembersAscending) {
	const Partition p({1, 0, 1, 0, 2}, 3);
	const auto m = p.members();
	EXPECT_EQ(m[0], (IndexList{1, 3}));
	EXPECT_EQ(m[1], (IndexList{0, 2}));
	EXPECT_EQ(m[2], (IndexList{4}));
}

TEST(Partition, RepairFillsEveryEmptyCluster) {
	RowMatrix pts(6, 1);
	pts << 0, 1, 2, 3, 4, 100;
	Partition p({0, 0, 0, 0, 0, 0}, 3);
	const int moves = repair_empty_clusters(p, pts);
	EXPECT_EQ(moves, 2);
	EXPECT_EQ(p.empty_clusters(), 0);
	EXPECT_EQ(p[5], 1); // farthest from the mean goes first
}
