#pragma once

// Dense brute-force verification of the perturbation bounds on the normalized
// block kernel: Nystrom error vs. the bound on |L~ - L^|_2, and the sin-theta
// bound on the top-c invariant subspace. Desk scale only (blocks of <= 500 rows).

#include <rsc/block_kernel.hpp>
#include <rsc/partition.hpp>

#include <nlohmann/json.hpp>

#include <vector>

namespace rsc {

inline constexpr Index kOracleBlockLimit = 500;

struct DenseBlock {
	Matrix A;   ///< exact kernel
	Vector deg; ///< exact row sums
	Matrix L;   ///< D^{-1/2} A D^{-1/2}
};

/// Throws OracleError above kOracleBlockLimit rows.
DenseBlock dense_block_oracle(const RowMatrix& samples, std::span<const Index> rows, double tau);

struct ErrorMeasure {
	double eps_A = 0.0;
	double eps_D = 0.0;
	std::vector<double> block_error; ///< |A_j - U Sigma U^T|_2
	std::vector<double> rho;         ///< sqrt(n_j) * block_error
};

ErrorMeasure measure_errors(const RowMatrix& samples, std::span<const BlockFactors> blocks, double tau);

/// Exact and approximate block-diagonal kernels and normalized kernels, in global row order.
struct DenseAssembly {
	Matrix A_exact;
	Matrix A_approx;
	Vector deg_exact;
	Vector deg_approx;
	Matrix L_exact;
	Matrix L_approx;
};

DenseAssembly assemble_dense(const RowMatrix& samples, std::span<const BlockFactors> blocks, double tau);

struct Theorem41Check {
	double lhs = 0.0;
	double rhs = 0.0;
	Index rho_block = 0;      ///< block holding the smallest approximate degree
	bool rho_tie = false;     ///< several blocks share that degree; the lowest index is used
	double rho_value = 0.0;
	bool applicable = false;  ///< rho_i < 1 + exp(-2/tau^2) and every block has >= 2 rows
	bool holds = true;
};

Theorem41Check check_theorem41(const DenseAssembly& dense, const ErrorMeasure& err,
                               std::span<const BlockFactors> blocks, double tau);

struct SinThetaCheck {
	double sin_theta = 0.0;          ///< from the singular values of M^T M*
	double sin_theta_residual = 0.0; ///< |M* - M (M^T M*)|_2
	double bound = 0.0;
	bool applicable = false;         ///< gap > |L^ - L~|_2
	bool holds = true;
};

/// `gap` is lambda*_c - lambda*_{c+1} of the exact normalized kernel.
SinThetaCheck check_sintheta(const Matrix& m, const Matrix& mstar, double gap, double lhs);

/// Top-c eigenvectors of the approximate normalized kernel, taken from the compressed
/// factors of all blocks (no n×n matrix).
Matrix top_eigvecs_from_factors(std::span<const BlockFactors> blocks, Index n, int c);

struct DenseEigs {
	Matrix vectors; ///< top-c, descending
	Vector values;  ///< all eigenvalues, descending
};

DenseEigs dense_top_eigvecs(const Matrix& l, int c);

struct TheoryInstanceOptions {
	int min_clusters = 2;
	int max_clusters = 4;
	Index max_n = 300;
	Index min_block = 20;
	int dim = 3;
	double spread = 0.25;   ///< within-cluster noise before row normalization
	double tau_min = 0.7;
	double tau_max = 1.3;
	double landmark_fraction = 0.6;
	Index rank_min = 6;
	Index rank_max = 14;
	bool exact = false;     ///< full sampling and full rank
};

struct TheoryInstance {
	RowMatrix samples; ///< unit rows
	Partition blocks;
	KernelParams kernel;
	std::uint64_t seed = 0;
};

TheoryInstance random_theory_instance(std::uint64_t seed, const TheoryInstanceOptions& opts = {});

struct PerturbationReport {
	int instance = 0;
	std::uint64_t seed = 0;
	Index n = 0;
	int c = 0;
	double tau = 0.0;
	ErrorMeasure errors;
	Theorem41Check theorem41;
	double gap = 0.0;
	SinThetaCheck sintheta;
};

PerturbationReport analyze_instance(const TheoryInstance& inst, int index = 0);

/// Runs `count` random instances with seeds derive_seed(seed, k).
std::vector<PerturbationReport> run_theory_suite(int count, std::uint64_t seed, const TheoryInstanceOptions& opts = {});

/// True when no applicable check is violated.
bool suite_passes(const std::vector<PerturbationReport>& reports);

nlohmann::json to_json(const PerturbationReport& r);

} // namespace rsc
