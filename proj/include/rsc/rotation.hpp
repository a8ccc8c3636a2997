#pragma once

// Restarted self-guiding spectral clustering, spectral-rotation variant. Each cycle
// rebuilds the block factors, then sweeps M (generalized power iteration), Q
// (orthogonal Procrustes) and Y (row-wise argmax of |MQ|).

#include <rsc/restart_kmeans.hpp>

namespace rsc {

struct RotationParams : RestartParams {
	double lambda = 1.0;
	int gpi_iter = 100;
	double gpi_tol = 1e-8;
};

/// Global degree vector assembled from the per-block degrees.
Vector global_degrees(std::span<const BlockFactors> blocks, Index n);

/// L M computed blockwise as Lhalf_j (Lhalf_j^T M_j).
Matrix apply_laplacian(std::span<const BlockFactors> blocks, const Matrix& m);

/// S = D^{1/2} Y (Y^T D Y)^{-1/2} Q^T, so S_i = sqrt(deg_i / s_a(i)) (Q^T)_a(i),. with s_k the
/// degree sum of cluster k.
/// Throws std::invalid_argument when a cluster is empty.
Matrix target_matrix_S(const Vector& deg, const Partition& p, const Matrix& q);

struct PolarFactor {
	Matrix factor;
	bool rank_deficient = false;
};

/// Orthonormal polar factor of a tall K via thin QR and the SVD of R. When K loses
/// rank the missing directions come from the Householder basis of K's columns.
PolarFactor polar_factor(const Matrix& k);

struct GpiResult {
	Matrix M;
	std::vector<double> objective; ///< tr(M^T L M) + lambda tr(M^T S), starting value first
	int iterations = 0;
	int rank_deficient_steps = 0;
};

/// Maximizes tr(M^T L M) + lambda tr(M^T S) over orthonormal M.
GpiResult gpi_update_M(std::span<const BlockFactors> blocks, const Matrix& s, double lambda, const Matrix& m_init,
                       int inner_iter, double inner_tol);

/// N = M^T D^{1/2} Y (Y^T D Y)^{-1/2}.
Matrix procrustes_target(const Matrix& m, const Vector& deg, const Partition& p);

/// Q = U V^T from the SVD of N.
Matrix update_Q(const Matrix& m, const Vector& deg, const Partition& p);

struct YUpdate {
	Partition partition;
	int repaired = 0;
};

/// argmax_j |(MQ)_ij|, lowest j on ties, empty clusters refilled in the rows of MQ.
YUpdate update_Y(const Matrix& m, const Matrix& q);

struct ObjectiveTerms {
	double f = 0.0;
	double term1 = 0.0; ///< |L - M M^T|_F^2
	double term2 = 0.0; ///< |MQ - D^{1/2} Y (Y^T D Y)^{-1/2}|_F^2, unweighted
};

ObjectiveTerms objective_f(std::span<const BlockFactors> blocks, const Matrix& m, const Matrix& q, const Partition& p,
                           double lambda, const Vector& deg);

struct RotationCycle {
	int cycle = 0;
	ObjectiveTerms terms;     ///< at the end of the sweep
	double f_before = 0.0;    ///< previous (M, Q, Y) under this cycle's factors
	double f_after_M = 0.0;
	double f_after_Q = 0.0;
	std::optional<double> subspace_distance;
	std::vector<double> gpi_objective;
	int gpi_iterations = 0;
	int rank_deficient_steps = 0;
	int empty_clusters_repaired = 0;
	double orthogonality_M = 0.0;
	double orthogonality_Q = 0.0;
	std::optional<MetricsReport> metrics;
	double seconds = 0.0;
};

struct RotationRunResult {
	Partition partition;
	Matrix M;
	Matrix Q;
	std::vector<RotationCycle> history;
	double tau = 0.0;
	bool converged = false;
};

RotationRunResult run_algorithm2(const Dataset& ds, int c, const Partition& init, const RotationParams& params,
                                 const CycleObserver& observer = {});

nlohmann::json to_json(const RotationCycle& rec);

} // namespace rsc
