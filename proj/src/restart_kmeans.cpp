#include <rsc/restart_kmeans.hpp>

#include <spdlog/spdlog.h>

#include <chrono>
#include <stdexcept>

namespace rsc {

KernelParams RestartParams::kernel_params(double bandwidth) const {
	KernelParams kp;
	kp.tau = bandwidth;
	kp.landmarks = landmarks;
	kp.rank = rank;
	kp.pinv_tol = pinv_tol;
	kp.deg_clamp = deg_clamp;
	kp.seed = seed;
	kp.validate();
	return kp;
}

double resolve_bandwidth(const Dataset& ds, const std::optional<double>& tau, std::uint64_t seed) {
	if (tau) return *tau;
	const double t = median_bandwidth(ds.samples, derive_seed(seed, 0x7a75));
	spdlog::debug("median-heuristic bandwidth {:.6g}", t);
	return t;
}

std::vector<BlockFactors> build_blocks(const RowMatrix& samples, const Partition& p, const KernelParams& kp, int cycle,
                                       std::uint64_t seed) {
	auto members = p.members();
	std::vector<BlockFactors> blocks;
	blocks.reserve(members.size());
	for (int j = 0; j < p.c; ++j) {
		try {
			blocks.push_back(build_block_factors(samples, std::move(members[static_cast<std::size_t>(j)]), j, p.c, kp,
			                                     derive_seed(seed, static_cast<std::uint64_t>(cycle), static_cast<std::uint64_t>(j))));
		} catch (const KernelError& e) {
			throw e.at_cycle(cycle);
		}
	}
	return blocks;
}

Matrix assemble_embedding(std::span<const BlockFactors> blocks, std::span<const BlockEigpair> pairs, Index n) {
	if (blocks.size() != pairs.size()) throw std::logic_error("assemble_embedding: blocks/eigenpairs mismatch");
	Matrix m = Matrix::Zero(n, static_cast<Index>(blocks.size()));
	std::vector<char> seen(static_cast<std::size_t>(n), 0);
	for (std::size_t j = 0; j < blocks.size(); ++j) {
		const auto& rows = blocks[j].member_rows;
		if (pairs[j].vec.size() != static_cast<Index>(rows.size()))
			throw std::logic_error("assemble_embedding: eigenvector length mismatch in block " + std::to_string(j));
		for (std::size_t k = 0; k < rows.size(); ++k) {
			const Index i = rows[k];
			if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
				throw std::logic_error("assemble_embedding: row " + std::to_string(i) + " overlaps or is out of range");
			seen[static_cast<std::size_t>(i)] = 1;
			m(i, static_cast<Index>(j)) = pairs[j].vec(static_cast<Index>(k));
		}
	}
	for (Index i = 0; i < n; ++i)
		if (!seen[static_cast<std::size_t>(i)]) throw std::logic_error("assemble_embedding: row " + std::to_string(i) + " uncovered");
	return m;
}

double subspace_distance(const Matrix& previous, const Matrix& current) {
	if (previous.rows() != current.rows() || previous.cols() != current.cols())
		throw std::invalid_argument("subspace_distance: shape mismatch");
	return (previous - current * (current.transpose() * previous)).norm();
}

double orthogonality_error(const Matrix& m) {
	return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

ReclassifyResult reclassify(const Partition& previous, const Partition& produced, const RowMatrix& points) {
	if (previous.n() != produced.n()) throw std::invalid_argument("reclassify: partitions differ in size");
	ReclassifyResult out{produced, 0};
	out.partition.c = std::max(previous.c, produced.c);
	out.repaired = repair_empty_clusters(out.partition, points);
	return out;
}

Partition random_initial_partition(const Dataset& ds, int c, std::uint64_t seed) {
	Partition p = random_partition(ds.n(), c, seed);
	repair_empty_clusters(p, ds.samples);
	return p;
}

namespace {

void check_run_inputs(const Dataset& ds, int c, const Partition& init) {
	if (c < 2) throw std::invalid_argument("need c >= 2");
	if (ds.n() < c) throw std::invalid_argument("need n >= c");
	if (init.n() != ds.n()) throw std::invalid_argument("initial partition size does not match dataset");
	if (init.c != c) throw std::invalid_argument("initial partition has a different cluster count");
}

} // namespace

KMeansRunResult run_algorithm1(const Dataset& ds, int c, const Partition& init, const RestartParams& params,
                               const CycleObserver& observer) {
	check_run_inputs(ds, c, init);
	using clock = std::chrono::steady_clock;

	KMeansRunResult res;
	res.tau = resolve_bandwidth(ds, params.tau, params.seed);
	const KernelParams kp = params.kernel_params(res.tau);
	const std::optional<Partition> truth = ds.labels ? std::optional(truth_partition(*ds.labels)) : std::nullopt;

	res.partition = init;
	if (const int fixed = repair_empty_clusters(res.partition, ds.samples))
		spdlog::warn("initial partition had {} empty cluster(s); repaired", fixed);

	Matrix previous = Matrix::Identity(ds.n(), c);
	for (int t = 0; t < params.itermax; ++t) {
		const auto start = clock::now();
		KMeansCycle rec;
		rec.cycle = t;

		const auto blocks = build_blocks(ds.samples, res.partition, kp, t, params.seed);
		std::vector<BlockEigpair> pairs;
		pairs.reserve(blocks.size());
		for (const auto& b : blocks) {
			pairs.push_back(block_top_eigpair(b.Delta, b.Qhat));
			rec.block_lambdas.push_back(pairs.back().lambda);
			rec.block_ranks.push_back(b.rank());
		}
		const Matrix m = assemble_embedding(blocks, pairs, ds.n());
		rec.orthogonality_error = orthogonality_error(m);

		const RowMatrix rows = m;
		auto km = kmeans(rows, c, params.kmeans, derive_seed(params.seed, static_cast<std::uint64_t>(t), 0x6b6d));
		rec.kmeans_objective = km.objective;
		auto next = reclassify(res.partition, km.partition, rows);
		rec.empty_clusters_repaired = km.reseeds + next.repaired;
		if (observer) observer(t, m, next.partition);

		if (t > 0) rec.subspace_distance = subspace_distance(previous, m);
		if (truth) rec.metrics = evaluate(next.partition, *truth);
		res.partition = std::move(next.partition);
		rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
		res.history.push_back(std::move(rec));

		if (res.history.back().subspace_distance && *res.history.back().subspace_distance < params.tol) {
			res.converged = true;
			break;
		}
		previous = m;
	}
	return res;
}

nlohmann::json to_json(const KMeansCycle& rec) {
	nlohmann::json j{{"cycle", rec.cycle},
	                 {"subspace_distance", rec.subspace_distance ? nlohmann::json(*rec.subspace_distance) : nlohmann::json()},
	                 {"block_lambdas", rec.block_lambdas},
	                 {"block_ranks", rec.block_ranks},
	                 {"kmeans_objective", rec.kmeans_objective},
	                 {"empty_clusters_repaired", rec.empty_clusters_repaired},
	                 {"orthogonality_error", rec.orthogonality_error},
	                 {"seconds", rec.seconds}};
	if (rec.metrics) j["metrics"] = to_json(*rec.metrics);
	return j;
}

} // namespace rsc
