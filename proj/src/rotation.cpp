#include <rsc/rotation.hpp>

#include <spdlog/spdlog.h>

#include <Eigen/SVD>

#include <cassert>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rsc {

namespace {

std::vector<double> cluster_degree_sums(const Vector& deg, const Partition& p) {
	if (deg.size() != p.n()) throw std::invalid_argument("degree vector does not match partition size");
	std::vector<double> s(static_cast<std::size_t>(p.c), 0.0);
	for (Index i = 0; i < p.n(); ++i) s[static_cast<std::size_t>(p[i])] += deg(i);
	const auto counts = p.counts();
	for (int k = 0; k < p.c; ++k)
		if (counts[static_cast<std::size_t>(k)] == 0)
			throw std::invalid_argument("cluster " + std::to_string(k) + " is empty");
	return s;
}

double gpi_value(std::span<const BlockFactors> blocks, const Matrix& m, const Matrix& s, double lambda) {
	double quad = 0.0;
	for (const auto& b : blocks) {
		Matrix mj(b.size(), m.cols());
		for (Index k = 0; k < b.size(); ++k) mj.row(k) = m.row(b.member_rows[static_cast<std::size_t>(k)]);
		quad += (b.Lhalf.transpose() * mj).squaredNorm();
	}
	return quad + lambda * (m.cwiseProduct(s)).sum();
}

} // namespace

Vector global_degrees(std::span<const BlockFactors> blocks, Index n) {
	Vector deg = Vector::Zero(n);
	for (const auto& b : blocks)
		for (Index k = 0; k < b.size(); ++k) deg(b.member_rows[static_cast<std::size_t>(k)]) = b.deg(k);
	return deg;
}

Matrix apply_laplacian(std::span<const BlockFactors> blocks, const Matrix& m) {
	Matrix out = Matrix::Zero(m.rows(), m.cols());
	for (const auto& b : blocks) {
		Matrix mj(b.size(), m.cols());
		for (Index k = 0; k < b.size(); ++k) mj.row(k) = m.row(b.member_rows[static_cast<std::size_t>(k)]);
		const Matrix lj = b.Lhalf * (b.Lhalf.transpose() * mj);
		for (Index k = 0; k < b.size(); ++k) out.row(b.member_rows[static_cast<std::size_t>(k)]) = lj.row(k);
	}
	return out;
}

Matrix target_matrix_S(const Vector& deg, const Partition& p, const Matrix& q) {
	const auto s = cluster_degree_sums(deg, p);
	Matrix out(p.n(), q.cols());
	for (Index i = 0; i < p.n(); ++i) {
		const int a = p[i];
		out.row(i) = std::sqrt(deg(i) / s[static_cast<std::size_t>(a)]) * q.col(a).transpose();
	}
	return out;
}

PolarFactor polar_factor(const Matrix& k) {
	const Index c = k.cols();
	Eigen::HouseholderQR<Matrix> qr(k);
	const Matrix q1 = qr.householderQ() * Matrix::Identity(k.rows(), c);
	const Matrix r = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
	Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
	PolarFactor out;
	out.factor = q1 * (svd.matrixU() * svd.matrixV().transpose());
	const auto& sv = svd.singularValues();
	out.rank_deficient = sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1e-300);
	return out;
}

GpiResult gpi_update_M(std::span<const BlockFactors> blocks, const Matrix& s, double lambda, const Matrix& m_init,
                       int inner_iter, double inner_tol) {
	GpiResult res;
	res.M = m_init;
	double value = gpi_value(blocks, res.M, s, lambda);
	res.objective.push_back(value);
	for (int it = 0; it < inner_iter; ++it) {
		const Matrix k = 2.0 * apply_laplacian(blocks, res.M) + lambda * s;
		auto polar = polar_factor(k);
		if (polar.rank_deficient) {
			++res.rank_deficient_steps;
			spdlog::debug("GPI step {}: rank-deficient K, completing basis", it);
		}
		const double next = gpi_value(blocks, polar.factor, s, lambda);
		assert(next >= value - 1e-9 * (1.0 + std::abs(value)));
		res.M = std::move(polar.factor);
		res.objective.push_back(next);
		res.iterations = it + 1;
		const double gain = next - value;
		value = next;
		if (gain < inner_tol) break;
	}
	return res;
}

Matrix procrustes_target(const Matrix& m, const Vector& deg, const Partition& p) {
	const auto s = cluster_degree_sums(deg, p);
	Matrix n = Matrix::Zero(m.cols(), p.c);
	for (Index i = 0; i < p.n(); ++i) {
		const int a = p[i];
		n.col(a) += std::sqrt(deg(i) / s[static_cast<std::size_t>(a)]) * m.row(i).transpose();
	}
	return n;
}

Matrix update_Q(const Matrix& m, const Vector& deg, const Partition& p) {
	const Matrix n = procrustes_target(m, deg, p);
	Eigen::JacobiSVD<Matrix> svd(n, Eigen::ComputeFullU | Eigen::ComputeFullV);
	return svd.matrixU() * svd.matrixV().transpose();
}

YUpdate update_Y(const Matrix& m, const Matrix& q) {
	const RowMatrix g = m * q;
	std::vector<int> assign(static_cast<std::size_t>(g.rows()));
	for (Index i = 0; i < g.rows(); ++i) {
		Index arg = 0;
		g.row(i).cwiseAbs().maxCoeff(&arg); // first maximal index
		assign[static_cast<std::size_t>(i)] = static_cast<int>(arg);
	}
	YUpdate out{Partition(std::move(assign), static_cast<int>(g.cols())), 0};
	out.repaired = repair_empty_clusters(out.partition, g);
	if (out.repaired) spdlog::debug("Y-update: {} empty cluster(s) repaired", out.repaired);
	return out;
}

ObjectiveTerms objective_f(std::span<const BlockFactors> blocks, const Matrix& m, const Matrix& q, const Partition& p,
                           double lambda, const Vector& deg) {
	double l_norm = 0.0, trace = 0.0;
	for (const auto& b : blocks) {
		l_norm += (b.Lhalf.transpose() * b.Lhalf).squaredNorm();
		Matrix mj(b.size(), m.cols());
		for (Index k = 0; k < b.size(); ++k) mj.row(k) = m.row(b.member_rows[static_cast<std::size_t>(k)]);
		trace += (b.Lhalf.transpose() * mj).squaredNorm();
	}
	ObjectiveTerms t;
	t.term1 = l_norm - 2.0 * trace + static_cast<double>(m.cols());

	const auto s = cluster_degree_sums(deg, p);
	Matrix g = m * q;
	for (Index i = 0; i < p.n(); ++i) {
		const int a = p[i];
		g(i, a) -= std::sqrt(deg(i) / s[static_cast<std::size_t>(a)]);
	}
	t.term2 = g.squaredNorm();
	t.f = t.term1 + lambda * t.term2;
	return t;
}

RotationRunResult run_algorithm2(const Dataset& ds, int c, const Partition& init, const RotationParams& params,
                                 const CycleObserver& observer) {
	if (c < 2) throw std::invalid_argument("need c >= 2");
	if (ds.n() < c) throw std::invalid_argument("need n >= c");
	if (init.n() != ds.n()) throw std::invalid_argument("initial partition size does not match dataset");
	if (init.c != c) throw std::invalid_argument("initial partition has a different cluster count");
	if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
	if (params.gpi_iter < 1) throw std::invalid_argument("gpi_iter must be >= 1");
	using clock = std::chrono::steady_clock;

	RotationRunResult res;
	res.tau = resolve_bandwidth(ds, params.tau, params.seed);
	const KernelParams kp = params.kernel_params(res.tau);
	const std::optional<Partition> truth = ds.labels ? std::optional(truth_partition(*ds.labels)) : std::nullopt;

	res.partition = init;
	if (const int fixed = repair_empty_clusters(res.partition, ds.samples))
		spdlog::warn("initial partition had {} empty cluster(s); repaired", fixed);
	res.M = Matrix::Identity(ds.n(), c);
	res.Q = Matrix::Identity(c, c);

	for (int t = 0; t < params.itermax; ++t) {
		const auto start = clock::now();
		RotationCycle rec;
		rec.cycle = t;

		const auto blocks = build_blocks(ds.samples, res.partition, kp, t, params.seed);
		const Vector deg = global_degrees(blocks, ds.n());
		rec.f_before = objective_f(blocks, res.M, res.Q, res.partition, params.lambda, deg).f;

		const Matrix s = target_matrix_S(deg, res.partition, res.Q);
		auto gpi = gpi_update_M(blocks, s, params.lambda, res.M, params.gpi_iter, params.gpi_tol);
		rec.gpi_objective = std::move(gpi.objective);
		rec.gpi_iterations = gpi.iterations;
		rec.rank_deficient_steps = gpi.rank_deficient_steps;
		rec.f_after_M = objective_f(blocks, gpi.M, res.Q, res.partition, params.lambda, deg).f;

		const Matrix q = update_Q(gpi.M, deg, res.partition);
		rec.f_after_Q = objective_f(blocks, gpi.M, q, res.partition, params.lambda, deg).f;

		auto y = update_Y(gpi.M, q);
		rec.empty_clusters_repaired = y.repaired;
		rec.terms = objective_f(blocks, gpi.M, q, y.partition, params.lambda, deg);
		rec.orthogonality_M = orthogonality_error(gpi.M);
		rec.orthogonality_Q = orthogonality_error(q);
		if (observer) observer(t, gpi.M, y.partition);

		if (t > 0) rec.subspace_distance = subspace_distance(res.M, gpi.M);
		if (truth) rec.metrics = evaluate(y.partition, *truth);
		res.M = std::move(gpi.M);
		res.Q = q;
		res.partition = std::move(y.partition);
		rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
		res.history.push_back(std::move(rec));

		if (res.history.back().subspace_distance && *res.history.back().subspace_distance < params.tol) {
			res.converged = true;
			break;
		}
	}
	return res;
}

nlohmann::json to_json(const RotationCycle& rec) {
	nlohmann::json j{{"cycle", rec.cycle},
	                 {"f", rec.terms.f},
	                 {"term1", rec.terms.term1},
	                 {"term2", rec.terms.term2},
	                 {"f_before", rec.f_before},
	                 {"f_after_M", rec.f_after_M},
	                 {"f_after_Q", rec.f_after_Q},
	                 {"subspace_distance", rec.subspace_distance ? nlohmann::json(*rec.subspace_distance) : nlohmann::json()},
	                 {"gpi_iterations", rec.gpi_iterations},
	                 {"rank_deficient_steps", rec.rank_deficient_steps},
	                 {"empty_clusters_repaired", rec.empty_clusters_repaired},
	                 {"orthogonality_M", rec.orthogonality_M},
	                 {"orthogonality_Q", rec.orthogonality_Q},
	                 {"seconds", rec.seconds}};
	if (rec.metrics) j["metrics"] = to_json(*rec.metrics);
	return j;
}

} // namespace rsc
