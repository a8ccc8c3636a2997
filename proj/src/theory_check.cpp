#include <rsc/theory_check.hpp>

#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rsc {

namespace {

double spectral_norm_sym(const Matrix& s) {
	if (s.size() == 0) return 0.0;
	Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
	return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
	if (m.size() == 0) return 0.0;
	Eigen::JacobiSVD<Matrix> svd(m);
	return svd.singularValues()(0);
}

Matrix approx_block(const BlockFactors& b) { return b.U * b.sigma.asDiagonal() * b.U.transpose(); }

} // namespace

DenseBlock dense_block_oracle(const RowMatrix& samples, std::span<const Index> rows, double tau) {
	if (static_cast<Index>(rows.size()) > kOracleBlockLimit)
		throw OracleError("dense oracle: block of " + std::to_string(rows.size()) + " rows exceeds the limit of " +
		                  std::to_string(kOracleBlockLimit));
	DenseBlock out;
	out.A = kernel_matrix(samples, rows, rows, tau);
	out.deg = out.A.rowwise().sum();
	const Vector s = out.deg.cwiseSqrt().cwiseInverse();
	out.L = s.asDiagonal() * out.A * s.asDiagonal();
	return out;
}

ErrorMeasure measure_errors(const RowMatrix& samples, std::span<const BlockFactors> blocks, double tau) {
	ErrorMeasure e;
	for (const auto& b : blocks) {
		const DenseBlock d = dense_block_oracle(samples, b.member_rows, tau);
		const double err = spectral_norm_sym(d.A - approx_block(b));
		e.block_error.push_back(err);
		e.rho.push_back(std::sqrt(static_cast<double>(b.size())) * err);
		e.eps_A = std::max(e.eps_A, err);
		e.eps_D = std::max(e.eps_D, (d.deg - b.deg).cwiseAbs().maxCoeff());
	}
	return e;
}

DenseAssembly assemble_dense(const RowMatrix& samples, std::span<const BlockFactors> blocks, double tau) {
	Index n = 0;
	for (const auto& b : blocks) n += b.size();
	DenseAssembly out;
	out.A_exact = Matrix::Zero(n, n);
	out.A_approx = Matrix::Zero(n, n);
	out.deg_exact = Vector::Zero(n);
	out.deg_approx = Vector::Zero(n);
	for (const auto& b : blocks) {
		const DenseBlock d = dense_block_oracle(samples, b.member_rows, tau);
		const Matrix t = approx_block(b);
		for (Index p = 0; p < b.size(); ++p) {
			const Index gp = b.member_rows[static_cast<std::size_t>(p)];
			out.deg_exact(gp) = d.deg(p);
			out.deg_approx(gp) = b.deg(p);
			for (Index q = 0; q < b.size(); ++q) {
				const Index gq = b.member_rows[static_cast<std::size_t>(q)];
				out.A_exact(gp, gq) = d.A(p, q);
				out.A_approx(gp, gq) = t(p, q);
			}
		}
	}
	const Vector se = out.deg_exact.cwiseSqrt().cwiseInverse();
	const Vector sa = out.deg_approx.cwiseSqrt().cwiseInverse();
	out.L_exact = se.asDiagonal() * out.A_exact * se.asDiagonal();
	out.L_approx = sa.asDiagonal() * out.A_approx * sa.asDiagonal();
	return out;
}

Theorem41Check check_theorem41(const DenseAssembly& dense, const ErrorMeasure& err,
                               std::span<const BlockFactors> blocks, double tau) {
	Theorem41Check chk;
	chk.lhs = spectral_norm_sym(dense.L_exact - dense.L_approx);

	double smallest = std::numeric_limits<double>::infinity();
	bool singleton = false;
	for (std::size_t j = 0; j < blocks.size(); ++j) {
		if (blocks[j].size() < 2) singleton = true;
		const double lo = blocks[j].deg.minCoeff();
		if (lo < smallest) {
			smallest = lo;
			chk.rho_block = static_cast<Index>(j);
			chk.rho_tie = false;
		} else if (lo == smallest) {
			chk.rho_tie = true;
		}
	}
	if (chk.rho_tie) spdlog::debug("theorem check: smallest degree shared by several blocks, using block {}", chk.rho_block);
	chk.rho_value = err.rho[static_cast<std::size_t>(chk.rho_block)];

	const double a = 1.0 + std::exp(-2.0 / (tau * tau));
	chk.applicable = !singleton && chk.rho_value < a;
	if (!chk.applicable) return chk;
	const double a_norm = spectral_norm_sym(dense.A_approx);
	chk.rhs = err.eps_A / a + err.eps_D * a_norm / (std::sqrt(a) * std::sqrt(a - chk.rho_value));
	chk.holds = chk.lhs <= chk.rhs + 1e-10;
	return chk;
}

SinThetaCheck check_sintheta(const Matrix& m, const Matrix& mstar, double gap, double lhs) {
	if (m.rows() != mstar.rows() || m.cols() != mstar.cols()) throw OracleError("sin-theta: shape mismatch");
	SinThetaCheck chk;
	Eigen::JacobiSVD<Matrix> svd(m.transpose() * mstar);
	const double smin = std::min(1.0, svd.singularValues().minCoeff());
	chk.sin_theta = std::sqrt(std::max(0.0, 1.0 - smin * smin));
	chk.sin_theta_residual = spectral_norm(mstar - m * (m.transpose() * mstar));
	// sqrt(1 - s^2) loses all digits below ~1e-8; the residual form is accurate there.
	if (chk.sin_theta < 1e-4) chk.sin_theta = chk.sin_theta_residual;
	chk.applicable = gap > lhs;
	if (chk.applicable) {
		chk.bound = 2.0 * lhs / (gap - lhs);
		chk.holds = chk.sin_theta <= chk.bound + 1e-10;
	}
	return chk;
}

Matrix top_eigvecs_from_factors(std::span<const BlockFactors> blocks, Index n, int c) {
	struct Candidate {
		double value;
		std::size_t block;
		Index column;
	};
	std::vector<Candidate> all;
	std::vector<Matrix> vecs;
	for (std::size_t j = 0; j < blocks.size(); ++j) {
		Eigen::SelfAdjointEigenSolver<Matrix> es(blocks[j].Delta);
		vecs.push_back(blocks[j].Qhat * es.eigenvectors());
		for (Index k = 0; k < es.eigenvalues().size(); ++k) all.push_back({es.eigenvalues()(k), j, k});
	}
	if (static_cast<Index>(all.size()) < c) throw OracleError("fewer nonzero eigenpairs than clusters");
	std::stable_sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) { return x.value > y.value; });

	Matrix m = Matrix::Zero(n, c);
	for (int k = 0; k < c; ++k) {
		const auto& cand = all[static_cast<std::size_t>(k)];
		const auto& rows = blocks[cand.block].member_rows;
		for (std::size_t p = 0; p < rows.size(); ++p)
			m(rows[p], k) = vecs[cand.block](static_cast<Index>(p), cand.column);
	}
	return m;
}

DenseEigs dense_top_eigvecs(const Matrix& l, int c) {
	Eigen::SelfAdjointEigenSolver<Matrix> es(l);
	DenseEigs out;
	out.values = es.eigenvalues().reverse();
	out.vectors = es.eigenvectors().rightCols(c).rowwise().reverse();
	return out;
}

TheoryInstance random_theory_instance(std::uint64_t seed, const TheoryInstanceOptions& opts) {
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<int> pick_c(opts.min_clusters, opts.max_clusters);
	const int c = pick_c(rng);
	const Index per_max = opts.max_n / c;
	if (per_max < opts.min_block) throw std::invalid_argument("theory instance: max_n too small for min_block");
	std::uniform_int_distribution<Index> pick_size(opts.min_block, per_max);
	std::normal_distribution<double> normal(0.0, 1.0);

	std::vector<Index> sizes(static_cast<std::size_t>(c));
	for (auto& s : sizes) s = pick_size(rng);
	const Index n = std::accumulate(sizes.begin(), sizes.end(), Index{0});

	TheoryInstance inst;
	inst.seed = seed;
	inst.samples.resize(n, opts.dim);
	std::vector<int> assign;
	assign.reserve(static_cast<std::size_t>(n));
	Index row = 0;
	for (int k = 0; k < c; ++k) {
		Eigen::RowVectorXd center(opts.dim);
		for (int t = 0; t < opts.dim; ++t) center(t) = normal(rng);
		center.normalize();
		for (Index p = 0; p < sizes[static_cast<std::size_t>(k)]; ++p, ++row) {
			Eigen::RowVectorXd x = center;
			for (int t = 0; t < opts.dim; ++t) x(t) += opts.spread * normal(rng);
			inst.samples.row(row) = x.normalized();
			assign.push_back(k);
		}
	}
	inst.blocks = Partition(std::move(assign), c);

	std::uniform_real_distribution<double> pick_tau(opts.tau_min, opts.tau_max);
	inst.kernel.tau = pick_tau(rng);
	inst.kernel.seed = seed;
	if (opts.exact) {
		inst.kernel.landmarks = SizePolicy::fraction(1.0);
		inst.kernel.rank = SizePolicy::fraction(1.0);
	} else {
		std::uniform_int_distribution<Index> pick_rank(opts.rank_min, opts.rank_max);
		inst.kernel.landmarks = SizePolicy::fraction(opts.landmark_fraction);
		inst.kernel.rank = SizePolicy::absolute(static_cast<double>(pick_rank(rng)));
	}
	inst.kernel.validate();
	return inst;
}

PerturbationReport analyze_instance(const TheoryInstance& inst, int index) {
	PerturbationReport r;
	r.instance = index;
	r.seed = inst.seed;
	r.n = inst.samples.rows();
	r.c = inst.blocks.c;
	r.tau = inst.kernel.tau;

	auto members = inst.blocks.members();
	std::vector<BlockFactors> blocks;
	for (int j = 0; j < r.c; ++j)
		blocks.push_back(build_block_factors(inst.samples, std::move(members[static_cast<std::size_t>(j)]), j, r.c,
		                                     inst.kernel, derive_seed(inst.seed, static_cast<std::uint64_t>(j), 0x7468)));

	r.errors = measure_errors(inst.samples, blocks, r.tau);
	const DenseAssembly dense = assemble_dense(inst.samples, blocks, r.tau);
	r.theorem41 = check_theorem41(dense, r.errors, blocks, r.tau);

	const DenseEigs eigs = dense_top_eigvecs(dense.L_exact, r.c);
	r.gap = eigs.values(r.c - 1) - eigs.values(r.c);
	const Matrix m = top_eigvecs_from_factors(blocks, r.n, r.c);
	r.sintheta = check_sintheta(m, eigs.vectors, r.gap, r.theorem41.lhs);
	return r;
}

std::vector<PerturbationReport> run_theory_suite(int count, std::uint64_t seed, const TheoryInstanceOptions& opts) {
	std::vector<PerturbationReport> out;
	out.reserve(static_cast<std::size_t>(count));
	for (int k = 0; k < count; ++k)
		out.push_back(analyze_instance(random_theory_instance(derive_seed(seed, static_cast<std::uint64_t>(k)), opts), k));
	return out;
}

bool suite_passes(const std::vector<PerturbationReport>& reports) {
	return std::all_of(reports.begin(), reports.end(), [](const PerturbationReport& r) {
		return (!r.theorem41.applicable || r.theorem41.holds) && (!r.sintheta.applicable || r.sintheta.holds);
	});
}

nlohmann::json to_json(const PerturbationReport& r) {
	return nlohmann::json{
	    {"instance", r.instance},
	    {"seed", r.seed},
	    {"n", r.n},
	    {"c", r.c},
	    {"tau", r.tau},
	    {"eps_A", r.errors.eps_A},
	    {"eps_D", r.errors.eps_D},
	    {"rho", r.errors.rho},
	    {"rho_block", r.theorem41.rho_block},
	    {"rho_tie", r.theorem41.rho_tie},
	    {"lhs_L", r.theorem41.lhs},
	    {"rhs_L", r.theorem41.applicable ? nlohmann::json(r.theorem41.rhs) : nlohmann::json()},
	    {"hypothesis_met", r.theorem41.applicable},
	    {"bound_holds", r.theorem41.holds},
	    {"gap", r.gap},
	    {"sin_theta", r.sintheta.sin_theta},
	    {"sin_theta_residual", r.sintheta.sin_theta_residual},
	    {"sin_bound", r.sintheta.applicable ? nlohmann::json(r.sintheta.bound) : nlohmann::json()},
	    {"gap_condition_met", r.sintheta.applicable},
	    {"sin_bound_holds", r.sintheta.holds}};
}

} // namespace rsc
