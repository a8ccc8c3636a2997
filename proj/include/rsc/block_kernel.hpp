#pragma once

// Per-block Gaussian kernel machinery: landmark sampling, Nystrom low-rank
// factors, approximate degrees and the compressed normalized factors shared by
// both restarted engines. No n_j×n_j kernel is formed on the Nystrom path.

#include <rsc/types.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>

namespace rsc {

/// Landmark-count or rank rule. `Auto` applies the built-in defaults.
struct SizePolicy {
	enum class Kind { Auto, Absolute, Fraction };
	Kind kind = Kind::Auto;
	double value = 0.0;

	static SizePolicy automatic() { return {}; }
	static SizePolicy absolute(double v) { return {Kind::Absolute, v}; }
	static SizePolicy fraction(double v) { return {Kind::Fraction, v}; }
};

struct KernelParams {
	double tau = 1.0;                 ///< Gaussian bandwidth, > 0
	SizePolicy landmarks;             ///< m_j rule
	SizePolicy rank;                  ///< r_j rule, never above m_j
	double pinv_tol = 1e-10;          ///< relative cutoff for W^+ and for the kept spectrum
	double deg_clamp = 1e-12;         ///< degrees below this are replaced by 1
	std::uint64_t seed = 0;

	void validate() const;
};

/// m_j = min(n_j, max(c+2, ceil(0.1 n_j))) under Auto.
Index landmark_count(const SizePolicy& policy, Index block_size, int clusters);
/// r_j = min(m_j, ceil(m_j / 2)) under Auto.
Index rank_count(const SizePolicy& policy, Index landmarks);

/// exp(-|x_p - x_q|^2 / (2 tau^2)).
double gaussian_entry(const Eigen::Ref<const Vector>& xp, const Eigen::Ref<const Vector>& xq, double tau);

/// Kernel block between `rows` and `cols` (global sample indices).
Matrix kernel_matrix(const RowMatrix& samples, std::span<const Index> rows, std::span<const Index> cols, double tau);

/// Median pairwise distance over min(n, max_rows) uniformly sampled rows.
double median_bandwidth(const RowMatrix& samples, std::uint64_t seed, Index max_rows = 1000);

/// m_j distinct entries of `block_rows`, uniform without replacement. m_j > n_j is
/// clamped to n_j with a warning.
IndexList sample_landmarks(std::span<const Index> block_rows, Index count, std::uint64_t seed);

struct NystromFactors {
	Matrix U;       ///< n_j×r_j, orthonormal columns
	Vector sigma;   ///< r_j values, descending, >= 0
	Vector spectrum; ///< full clamped spectrum of R W^+ R^T, descending (for error reporting)
};

/// Nystrom factors of the block kernel from landmark columns C_j and the landmark
/// kernel W_j: C = QR, R W^+ R^T = P Lambda P^T, U = Q P(:, :r), Sigma = Lambda(:r).
NystromFactors nystrom_factorize(const RowMatrix& samples, std::span<const Index> block_rows,
                                 std::span<const Index> landmarks, Index rank, const KernelParams& params,
                                 Index block_index = 0);

/// Rank-r truncated eigendecomposition of the exact dense block kernel.
NystromFactors dense_factorize(const RowMatrix& samples, std::span<const Index> block_rows, Index rank,
                               const KernelParams& params);

/// |U Sigma (U^T 1)| with entries below `clamp` replaced by 1.
Vector degrees_from_factors(const Matrix& U, const Vector& sigma, double clamp = 1e-12);

struct CompressedFactors {
	Matrix Qhat;  ///< n_j×r_j orthonormal factor of Uhat = D^{-1/2} U
	Matrix Rhat;  ///< r_j×r_j upper triangular, positive diagonal
	Matrix Delta; ///< Rhat Sigma Rhat^T
	Matrix Lhalf; ///< Uhat Sigma^{1/2}
};

/// Throws KernelError if Uhat loses rank (|Rhat_ii| < 1e-12).
CompressedFactors compress_normalized(const Matrix& U, const Vector& sigma, const Vector& deg, Index block_index = 0);

struct BlockEigpair {
	double lambda = 0.0;
	Vector vec; ///< unit n_j-vector, sign fixed so its entries sum to >= 0
};

/// Top eigenpair of Delta lifted through Qhat. Exact ties keep the lowest index.
BlockEigpair block_top_eigpair(const Matrix& delta, const Matrix& qhat);

/// |Lhat v - lambda v| evaluated as Lhalf (Lhalf^T v).
double eigpair_residual(const Matrix& lhalf, const BlockEigpair& pair);

struct BlockFactors {
	Index block_index = 0;
	IndexList member_rows;
	IndexList landmarks;
	bool dense_path = false;
	Matrix U;
	Vector sigma;
	Vector spectrum;
	Vector deg;
	Matrix Qhat;
	Matrix Rhat;
	Matrix Delta;
	Matrix Lhalf;

	Index size() const noexcept { return static_cast<Index>(member_rows.size()); }
	Index rank() const noexcept { return sigma.size(); }
};

/// Full per-block pipeline: landmarks, Nystrom (or the exact dense path when the
/// block is no larger than its target rank), degrees, compression.
BlockFactors build_block_factors(const RowMatrix& samples, IndexList member_rows, Index block_index, int clusters,
                                 const KernelParams& params, std::uint64_t seed);

/// Debug dump (U, Sigma, deg, rows). Not a stable format.
nlohmann::json to_json(const BlockFactors& b);

} // namespace rsc
