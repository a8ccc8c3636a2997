#pragma once

#include <rsc/partition.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace rsc {

/// External clustering criteria against ground truth. `average` is the mean of the seven.
struct MetricsReport {
	double acc = 0.0;
	double nmi = 0.0;
	double purity = 0.0;
	double ari = 0.0;
	double precision = 0.0;
	double recall = 0.0;
	double f_score = 0.0;
	double average = 0.0;
};

struct PairCounts {
	std::uint64_t tp = 0; ///< same cluster in both
	std::uint64_t fp = 0; ///< same in pred only
	std::uint64_t fn = 0; ///< same in truth only
	std::uint64_t tn = 0; ///< different in both
};

enum class NmiNorm { Sqrt, Min, Max, Mean };

/// rows: pred clusters, cols: truth classes.
Matrix contingency(const Partition& pred, const Partition& truth);

/// Optimal one-to-one matching (maximisation) on a rectangular weight matrix,
/// padded square internally. Returns, for each row, its matched column or -1.
std::vector<int> max_weight_assignment(const Matrix& weights);

double accuracy(const Partition& pred, const Partition& truth);
double nmi(const Partition& pred, const Partition& truth, NmiNorm norm = NmiNorm::Sqrt);
double purity(const Partition& pred, const Partition& truth);
PairCounts pair_counts(const Partition& pred, const Partition& truth);
double ari(const Partition& pred, const Partition& truth);
double precision(const Partition& pred, const Partition& truth);
double recall(const Partition& pred, const Partition& truth);
double f_score(const Partition& pred, const Partition& truth);

MetricsReport evaluate(const Partition& pred, const Partition& truth);

/// Ground-truth partition from dense labels.
Partition truth_partition(const std::vector<int>& labels);

/// Four-decimal rendering for reports.
nlohmann::json to_json(const MetricsReport& m);

} // namespace rsc
