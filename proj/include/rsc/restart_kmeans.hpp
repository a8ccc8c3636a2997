#pragma once

// Restarted self-guiding spectral clustering, K-means variant. Each cycle builds
// one Nystrom-factored kernel block per current cluster, takes the top eigenvector
// of every normalized block, stacks them block-diagonally into M, clusters the rows
// of M with K-means and regroups the samples by the result.

#include <rsc/block_kernel.hpp>
#include <rsc/dataset.hpp>
#include <rsc/kmeans.hpp>
#include <rsc/metrics.hpp>
#include <rsc/partition.hpp>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace rsc {

/// Settings shared by both restarted engines.
struct RestartParams {
	std::optional<double> tau; ///< Gaussian bandwidth; median heuristic when empty
	SizePolicy landmarks;
	SizePolicy rank;
	double pinv_tol = 1e-10;
	double deg_clamp = 1e-12;
	int itermax = 30;
	double tol = 1e-3;
	KMeansOptions kmeans;
	std::uint64_t seed = 0;

	KernelParams kernel_params(double bandwidth) const;
};

/// Called once per cycle with the cycle index, the assembled embedding and the
/// partition produced in that cycle (before the stopping test).
using CycleObserver = std::function<void(int cycle, const Matrix& embedding, const Partition& produced)>;

struct KMeansCycle {
	int cycle = 0;
	std::optional<double> subspace_distance; ///< absent on the first cycle
	std::vector<double> block_lambdas;
	std::vector<Index> block_ranks;
	double kmeans_objective = 0.0;
	int empty_clusters_repaired = 0;
	double orthogonality_error = 0.0; ///< max |M^T M - I|
	std::optional<MetricsReport> metrics;
	double seconds = 0.0;
};

struct KMeansRunResult {
	Partition partition;
	std::vector<KMeansCycle> history;
	double tau = 0.0;
	bool converged = false;
};

struct ReclassifyResult {
	Partition partition;
	int repaired = 0;
};

/// Bandwidth from the parameters or, when unset, the median heuristic.
double resolve_bandwidth(const Dataset& ds, const std::optional<double>& tau, std::uint64_t seed);

/// Factors for every block of `p`. Block j's landmarks use derive_seed(seed, cycle, j).
/// KernelErrors are rethrown with the cycle attached.
std::vector<BlockFactors> build_blocks(const RowMatrix& samples, const Partition& p, const KernelParams& kp, int cycle,
                                       std::uint64_t seed);

/// Column j carries block j's vector on block j's rows, zeros elsewhere. Overlapping
/// or uncovered rows are an internal invariant violation (std::logic_error).
Matrix assemble_embedding(std::span<const BlockFactors> blocks, std::span<const BlockEigpair> pairs, Index n);

/// ||M_prev - M (M^T M_prev)||_F, the Frobenius sin-theta distance of the two ranges.
double subspace_distance(const Matrix& previous, const Matrix& current);

/// max |M^T M - I|.
double orthogonality_error(const Matrix& m);

/// The next self-guide: `produced` with empty clusters refilled (farthest point in
/// `points` space). `previous` only fixes n and c; the dataset is never touched.
ReclassifyResult reclassify(const Partition& previous, const Partition& produced, const RowMatrix& points);

/// Uniform random initial partition followed by empty-cluster repair in sample space.
Partition random_initial_partition(const Dataset& ds, int c, std::uint64_t seed);

KMeansRunResult run_algorithm1(const Dataset& ds, int c, const Partition& init, const RestartParams& params,
                               const CycleObserver& observer = {});

nlohmann::json to_json(const KMeansCycle& rec);

} // namespace rsc
