#include <rsc/block_kernel.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rsc {

namespace {

struct SortedEigen {
	Vector values; // descending
	Matrix vectors;
};

SortedEigen descending_eigen(const Matrix& sym) {
	Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
	if (es.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
	const Index k = sym.rows();
	SortedEigen out{Vector(k), Matrix(k, k)};
	for (Index i = 0; i < k; ++i) {
		out.values(i) = es.eigenvalues()(k - 1 - i);
		out.vectors.col(i) = es.eigenvectors().col(k - 1 - i);
	}
	return out;
}

// Number of leading (descending, clamped) values to keep under the relative cutoff.
Index kept_rank(const Vector& spectrum, Index target, double rel_tol) {
	const double top = spectrum.size() ? spectrum(0) : 0.0;
	Index r = 0;
	while (r < std::min(target, spectrum.size()) && spectrum(r) >= rel_tol * top && spectrum(r) > 0.0) ++r;
	return r;
}

Index ceil_index(double v) { return static_cast<Index>(std::ceil(v - 1e-12)); }

} // namespace

void KernelParams::validate() const {
	if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("kernel: tau must be > 0");
	if (!(pinv_tol > 0.0 && pinv_tol < 1.0)) throw std::invalid_argument("kernel: pinv_tol must lie in (0,1)");
	if (!(deg_clamp >= 0.0)) throw std::invalid_argument("kernel: deg_clamp must be >= 0");
	auto check = [](const SizePolicy& p, const char* what) {
		if (p.kind == SizePolicy::Kind::Absolute && p.value < 1.0)
			throw std::invalid_argument(std::string("kernel: absolute ") + what + " must be >= 1");
		if (p.kind == SizePolicy::Kind::Fraction && !(p.value > 0.0 && p.value <= 1.0))
			throw std::invalid_argument(std::string("kernel: ") + what + " fraction must lie in (0,1]");
	};
	check(landmarks, "landmark count");
	check(rank, "rank");
}

Index landmark_count(const SizePolicy& policy, Index block_size, int clusters) {
	switch (policy.kind) {
	case SizePolicy::Kind::Absolute: return static_cast<Index>(policy.value);
	case SizePolicy::Kind::Fraction: return std::max<Index>(1, ceil_index(policy.value * static_cast<double>(block_size)));
	case SizePolicy::Kind::Auto: break;
	}
	const Index tenth = ceil_index(0.1 * static_cast<double>(block_size));
	return std::min(block_size, std::max<Index>(clusters + 2, tenth));
}

Index rank_count(const SizePolicy& policy, Index landmarks) {
	switch (policy.kind) {
	case SizePolicy::Kind::Absolute: return std::min(landmarks, static_cast<Index>(policy.value));
	case SizePolicy::Kind::Fraction:
		return std::min(landmarks, std::max<Index>(1, ceil_index(policy.value * static_cast<double>(landmarks))));
	case SizePolicy::Kind::Auto: break;
	}
	return std::min(landmarks, std::max<Index>(1, ceil_index(0.5 * static_cast<double>(landmarks))));
}

double gaussian_entry(const Eigen::Ref<const Vector>& xp, const Eigen::Ref<const Vector>& xq, double tau) {
	return std::exp(-(xp - xq).squaredNorm() / (2.0 * tau * tau));
}

Matrix kernel_matrix(const RowMatrix& samples, std::span<const Index> rows, std::span<const Index> cols, double tau) {
	const double scale = -1.0 / (2.0 * tau * tau);
	Matrix k(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
	for (Index q = 0; q < k.cols(); ++q) {
		const auto xq = samples.row(cols[static_cast<std::size_t>(q)]);
		for (Index p = 0; p < k.rows(); ++p)
			k(p, q) = std::exp(scale * (samples.row(rows[static_cast<std::size_t>(p)]) - xq).squaredNorm());
	}
	return k;
}

double median_bandwidth(const RowMatrix& samples, std::uint64_t seed, Index max_rows) {
	const Index n = samples.rows();
	IndexList all(static_cast<std::size_t>(n));
	std::iota(all.begin(), all.end(), Index{0});
	const IndexList pick = n > max_rows ? sample_landmarks(all, max_rows, seed) : all;

	std::vector<double> dist;
	dist.reserve(pick.size() * (pick.size() - 1) / 2);
	for (std::size_t a = 0; a < pick.size(); ++a)
		for (std::size_t b = a + 1; b < pick.size(); ++b)
			dist.push_back((samples.row(pick[a]) - samples.row(pick[b])).norm());
	if (dist.empty()) return 1.0;

	const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
	std::nth_element(dist.begin(), mid, dist.end());
	double med = *mid;
	if (dist.size() % 2 == 0) med = 0.5 * (med + *std::max_element(dist.begin(), mid));
	if (!(med > 0.0)) {
		spdlog::warn("median pairwise distance is zero; falling back to tau = 1");
		return 1.0;
	}
	return med;
}

IndexList sample_landmarks(std::span<const Index> block_rows, Index count, std::uint64_t seed) {
	const Index n = static_cast<Index>(block_rows.size());
	if (count < 1) throw std::invalid_argument("sample_landmarks: count must be >= 1");
	if (count > n) {
		spdlog::warn("landmark count {} exceeds block size {}; clamping", count, n);
		count = n;
	}
	IndexList pool(block_rows.begin(), block_rows.end());
	std::mt19937_64 rng(seed);
	// Partial Fisher-Yates: the first `count` slots are a uniform sample.
	for (Index i = 0; i < count; ++i) {
		std::uniform_int_distribution<Index> pick(i, n - 1);
		std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
	}
	pool.resize(static_cast<std::size_t>(count));
	return pool;
}

NystromFactors nystrom_factorize(const RowMatrix& samples, std::span<const Index> block_rows,
                                 std::span<const Index> landmarks, Index rank, const KernelParams& params,
                                 Index block_index) {
	const Index nj = static_cast<Index>(block_rows.size());
	const Index mj = static_cast<Index>(landmarks.size());
	if (mj < 1 || mj > nj) throw KernelError("invalid landmark count " + std::to_string(mj), block_index);

	const Matrix C = kernel_matrix(samples, block_rows, landmarks, params.tau);
	const Matrix W = kernel_matrix(samples, landmarks, landmarks, params.tau);

	// W^+ through its eigendecomposition, dropping |w_i| < pinv_tol * max|w|.
	Eigen::SelfAdjointEigenSolver<Matrix> wes(W);
	const double wmax = wes.eigenvalues().cwiseAbs().maxCoeff();
	if (!(wmax > 0.0) || !std::isfinite(wmax)) throw KernelError("degenerate landmark kernel W", block_index);
	std::vector<Index> keep;
	for (Index i = 0; i < mj; ++i)
		if (std::abs(wes.eigenvalues()(i)) > params.pinv_tol * wmax) keep.push_back(i);

	Eigen::HouseholderQR<Matrix> qr(C);
	const Matrix Q = qr.householderQ() * Matrix::Identity(nj, mj);
	const Matrix R = qr.matrixQR().topRows(mj).triangularView<Eigen::Upper>();

	const Matrix RV = R * wes.eigenvectors()(Eigen::all, keep);
	Vector inv(static_cast<Index>(keep.size()));
	for (std::size_t i = 0; i < keep.size(); ++i) inv(static_cast<Index>(i)) = 1.0 / wes.eigenvalues()(keep[i]);
	Matrix core = RV * inv.asDiagonal() * RV.transpose();
	core = 0.5 * (core + core.transpose()).eval();

	SortedEigen ce = descending_eigen(core);
	NystromFactors out;
	out.spectrum = ce.values.cwiseMax(0.0);
	if (!(out.spectrum(0) > 0.0)) throw KernelError("Nystrom core has no positive spectrum", block_index);
	const Index r = std::max<Index>(1, kept_rank(out.spectrum, rank, params.pinv_tol));
	out.U = Q * ce.vectors.leftCols(r);
	out.sigma = out.spectrum.head(r);
	return out;
}

NystromFactors dense_factorize(const RowMatrix& samples, std::span<const Index> block_rows, Index rank,
                               const KernelParams& params) {
	const Matrix A = kernel_matrix(samples, block_rows, block_rows, params.tau);
	SortedEigen es = descending_eigen(A);
	NystromFactors out;
	out.spectrum = es.values.cwiseMax(0.0);
	const Index r = std::max<Index>(1, kept_rank(out.spectrum, rank, params.pinv_tol));
	out.U = es.vectors.leftCols(r);
	out.sigma = out.spectrum.head(r);
	return out;
}

Vector degrees_from_factors(const Matrix& U, const Vector& sigma, double clamp) {
	const Vector ut1 = U.transpose() * Vector::Ones(U.rows());
	Vector deg = (U * sigma.cwiseProduct(ut1)).cwiseAbs();
	for (Index i = 0; i < deg.size(); ++i)
		if (deg(i) < clamp) deg(i) = 1.0;
	return deg;
}

CompressedFactors compress_normalized(const Matrix& U, const Vector& sigma, const Vector& deg, Index block_index) {
	if (deg.size() != U.rows()) throw std::invalid_argument("compress_normalized: degree/factor size mismatch");
	if ((deg.array() <= 0.0).any()) throw KernelError("non-positive degree", block_index);

	const Index nj = U.rows();
	const Index r = U.cols();
	const Matrix Uhat = deg.cwiseSqrt().cwiseInverse().asDiagonal() * U;

	Eigen::HouseholderQR<Matrix> qr(Uhat);
	CompressedFactors out;
	out.Qhat = qr.householderQ() * Matrix::Identity(nj, r);
	out.Rhat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
	for (Index i = 0; i < r; ++i) {
		if (std::abs(out.Rhat(i, i)) < 1e-12)
			throw KernelError("rank deficiency in D^{-1/2} U at column " + std::to_string(i), block_index);
		if (out.Rhat(i, i) < 0.0) {
			out.Rhat.row(i) *= -1.0;
			out.Qhat.col(i) *= -1.0;
		}
	}
	out.Delta = out.Rhat * sigma.asDiagonal() * out.Rhat.transpose();
	out.Delta = 0.5 * (out.Delta + out.Delta.transpose()).eval();
	out.Lhalf = Uhat * sigma.cwiseSqrt().asDiagonal();
	return out;
}

BlockEigpair block_top_eigpair(const Matrix& delta, const Matrix& qhat) {
	Eigen::SelfAdjointEigenSolver<Matrix> es(delta);
	if (es.info() != Eigen::Success) throw Error("block_top_eigpair: eigensolver failed");
	const auto& vals = es.eigenvalues();
	const double top = vals.maxCoeff();
	Index k = 0;
	while (vals(k) != top) ++k;

	BlockEigpair out;
	out.lambda = top;
	out.vec = qhat * es.eigenvectors().col(k);
	out.vec.normalize();
	if (out.vec.sum() < 0.0) out.vec = -out.vec;
	return out;
}

double eigpair_residual(const Matrix& lhalf, const BlockEigpair& pair) {
	return (lhalf * (lhalf.transpose() * pair.vec) - pair.lambda * pair.vec).norm();
}

BlockFactors build_block_factors(const RowMatrix& samples, IndexList member_rows, Index block_index, int clusters,
                                 const KernelParams& params, std::uint64_t seed) {
	BlockFactors b;
	b.block_index = block_index;
	b.member_rows = std::move(member_rows);
	const Index nj = b.size();
	if (nj == 0) throw KernelError("empty block", block_index);

	const Index m = landmark_count(params.landmarks, nj, clusters);
	const Index r = rank_count(params.rank, std::min(m, nj));

	NystromFactors nf;
	if (nj <= r) {
		b.dense_path = true;
		b.landmarks = b.member_rows;
		nf = dense_factorize(samples, b.member_rows, r, params);
	} else {
		b.landmarks = sample_landmarks(b.member_rows, m, seed);
		nf = nystrom_factorize(samples, b.member_rows, b.landmarks, r, params, block_index);
	}
	b.U = std::move(nf.U);
	b.sigma = std::move(nf.sigma);
	b.spectrum = std::move(nf.spectrum);
	b.deg = degrees_from_factors(b.U, b.sigma, params.deg_clamp);

	CompressedFactors cf = compress_normalized(b.U, b.sigma, b.deg, block_index);
	b.Qhat = std::move(cf.Qhat);
	b.Rhat = std::move(cf.Rhat);
	b.Delta = std::move(cf.Delta);
	b.Lhalf = std::move(cf.Lhalf);
	return b;
}

nlohmann::json to_json(const BlockFactors& b) {
	auto mat = [](const Matrix& m) {
		nlohmann::json rows = nlohmann::json::array();
		for (Index i = 0; i < m.rows(); ++i) {
			std::vector<double> r(static_cast<std::size_t>(m.cols()));
			for (Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
			rows.push_back(std::move(r));
		}
		return rows;
	};
	auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
	return nlohmann::json{{"block", b.block_index},
	                      {"rows", b.member_rows},
	                      {"landmarks", b.landmarks},
	                      {"dense_path", b.dense_path},
	                      {"U", mat(b.U)},
	                      {"sigma", vec(b.sigma)},
	                      {"deg", vec(b.deg)}};
}

} // namespace rsc
