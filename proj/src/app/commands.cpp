#include "app/commands.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rsc::app {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kTimingNote = "seconds cover the clustering algorithm only; dataset loading is excluded";

std::ofstream open_out(const fs::path& path) {
	std::ofstream out(path);
	if (!out) throw Error("cannot write " + path.string());
	return out;
}

std::string trim(std::string s) {
	const auto b = s.find_first_not_of(" \t\r");
	const auto e = s.find_last_not_of(" \t\r");
	return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

int resolve_clusters(const RunConfig& cfg, const Dataset& ds) {
	if (cfg.clusters > 0) return cfg.clusters;
	if (!ds.labels) throw ConfigError("clusters", "is required for unlabeled data");
	const int c = ds.num_classes();
	if (c < 2) throw ConfigError("clusters", "labels have fewer than two classes; set clusters explicitly");
	return c;
}

Partition read_partition_csv(const fs::path& path, Index n, int c) {
	std::ifstream in(path);
	if (!in) throw DatasetError("cannot open partition file " + path.string());
	std::vector<int> assign(static_cast<std::size_t>(n), -1);
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		line = trim(line);
		if (line.empty() || line[0] == '#') continue;
		if (line.rfind("sample_index", 0) == 0) continue;
		const auto comma = line.find(',');
		if (comma == std::string::npos) throw DatasetError("malformed partition row at line " + std::to_string(lineno), lineno);
		long long idx = 0, k = 0;
		try {
			idx = std::stoll(line.substr(0, comma));
			k = std::stoll(line.substr(comma + 1));
		} catch (const std::exception&) {
			throw DatasetError("malformed partition row at line " + std::to_string(lineno), lineno);
		}
		if (idx < 0 || idx >= n) throw DatasetError("sample index out of range at line " + std::to_string(lineno), lineno);
		if (k < 0 || k >= c) throw DatasetError("cluster id out of range at line " + std::to_string(lineno), lineno);
		assign[static_cast<std::size_t>(idx)] = static_cast<int>(k);
	}
	for (Index i = 0; i < n; ++i)
		if (assign[static_cast<std::size_t>(i)] < 0)
			throw DatasetError("partition file has no entry for sample " + std::to_string(i), 0, i);
	return Partition(std::move(assign), c);
}

void write_partition_csv(const Partition& p, const fs::path& path, const std::string& provenance) {
	auto out = open_out(path);
	out << "# " << provenance << "\n";
	out << "sample_index,cluster\n";
	for (Index i = 0; i < p.n(); ++i) out << i << ',' << p[i] << '\n';
}

Partition initial_partition(const RunConfig& cfg, const Dataset& ds, int c, std::uint64_t seed) {
	if (cfg.init == "file") return read_partition_csv(cfg.init_file, ds.n(), c);
	if (cfg.init == "kmeans") return kmeans(ds.samples, c, cfg.params.kmeans, seed).partition;
	return random_initial_partition(ds, c, seed);
}

RunOutcome execute(const RunConfig& cfg, const Dataset& ds, std::uint64_t seed) {
	const int c = resolve_clusters(cfg, ds);
	RotationParams params = cfg.params;
	params.seed = seed;

	const auto wall0 = std::chrono::steady_clock::now();
	const std::clock_t cpu0 = std::clock();
	RunOutcome out;
	if (cfg.algorithm == "kmeans") {
		out.partition = kmeans(ds.samples, c, params.kmeans, seed).partition;
		out.converged = true;
	} else {
		const Partition init = initial_partition(cfg, ds, c, derive_seed(seed, 0x696e6974));
		if (cfg.algorithm == "alg1") {
			auto res = run_algorithm1(ds, c, init, params);
			for (const auto& rec : res.history) out.history.push_back(to_json(rec));
			out.partition = std::move(res.partition);
			out.tau = res.tau;
			out.converged = res.converged;
			out.cycles = static_cast<int>(res.history.size());
		} else {
			auto res = run_algorithm2(ds, c, init, params);
			for (const auto& rec : res.history) out.history.push_back(to_json(rec));
			out.partition = std::move(res.partition);
			out.tau = res.tau;
			out.converged = res.converged;
			out.cycles = static_cast<int>(res.history.size());
		}
	}
	out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
	out.cpu_seconds = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
	if (ds.labels) out.metrics = evaluate(out.partition, truth_partition(*ds.labels));
	return out;
}

int cmd_cluster(const RunConfig& cfg) {
	const std::string hash = config_hash(cfg);
	const Dataset ds = load_dataset(cfg.dataset);
	const std::uint64_t seed = cfg.params.seed;
	spdlog::info("cluster: {} (config {}, seed {})", display_name(cfg), hash, seed);
	const RunOutcome res = execute(cfg, ds, seed);

	const fs::path dir(cfg.output);
	fs::create_directories(dir);
	write_partition_csv(res.partition, dir / "partition.csv", "config_hash=" + hash + " seed=" + std::to_string(seed));

	json metrics{{"config_hash", hash},
	             {"seed", seed},
	             {"algorithm", cfg.algorithm},
	             {"dataset", ds.name},
	             {"n", ds.n()},
	             {"tau", res.tau},
	             {"cycles", res.cycles},
	             {"converged", res.converged},
	             {"seconds", res.seconds},
	             {"cpu_seconds", res.cpu_seconds},
	             {"timing_note", kTimingNote},
	             {"metrics", res.metrics ? to_json(*res.metrics) : json()}};
	open_out(dir / "metrics.json") << metrics.dump(2) << '\n';

	auto hist = open_out(dir / "history.jsonl");
	for (json rec : res.history) {
		rec["config_hash"] = hash;
		rec["seed"] = seed;
		hist << rec.dump() << '\n';
	}
	json echoed = to_json(cfg);
	echoed["config_hash"] = hash;
	open_out(dir / "config.json") << echoed.dump(2) << '\n';

	std::cout << fmt::format("{}: {} cycle(s){}, {:.3f}s", display_name(cfg), res.cycles,
	                         res.converged ? ", converged" : "", res.seconds);
	if (res.metrics) std::cout << fmt::format(", ACC {:.4f}, NMI {:.4f}, Average {:.4f}", res.metrics->acc, res.metrics->nmi, res.metrics->average);
	std::cout << "\nreports written to " << dir.string() << '\n';
	return kOk;
}

std::vector<BenchRow> run_bench(const std::vector<RunConfig>& configs, int runs) {
	std::vector<BenchRow> rows;
	for (const auto& cfg : configs) {
		BenchRow row;
		row.name = display_name(cfg);
		row.config_hash = config_hash(cfg);
		row.seed = cfg.params.seed;
		std::optional<Dataset> ds;
		try {
			ds = load_dataset(cfg.dataset);
		} catch (const std::exception& e) {
			row.runs_failed = runs;
			row.failures.push_back(e.what());
			spdlog::error("{}: {}", row.name, e.what());
			rows.push_back(std::move(row));
			continue;
		}
		double cpu = 0.0;
		MetricsReport sum;
		for (int k = 0; k < runs; ++k) {
			const std::uint64_t seed = cfg.params.seed + static_cast<std::uint64_t>(k);
			try {
				const RunOutcome res = execute(cfg, *ds, seed);
				spdlog::info("{} run {} (seed {}): {:.3f}s{}", row.name, k, seed, res.seconds,
				             res.metrics ? fmt::format(", Average {:.4f}", res.metrics->average) : std::string());
				++row.runs_ok;
				cpu += res.seconds;
				if (res.metrics) {
					row.has_metrics = true;
					sum.acc += res.metrics->acc;
					sum.nmi += res.metrics->nmi;
					sum.purity += res.metrics->purity;
					sum.ari += res.metrics->ari;
					sum.precision += res.metrics->precision;
					sum.recall += res.metrics->recall;
					sum.f_score += res.metrics->f_score;
					sum.average += res.metrics->average;
				}
			} catch (const std::exception& e) {
				++row.runs_failed;
				row.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
				spdlog::error("{} run {} (seed {}) failed: {}", row.name, k, seed, e.what());
			}
		}
		if (row.runs_ok > 0) {
			const double w = 1.0 / row.runs_ok;
			row.mean = {sum.acc * w, sum.nmi * w, sum.purity * w, sum.ari * w,
			            sum.precision * w, sum.recall * w, sum.f_score * w, sum.average * w};
			row.cpu = cpu * w;
		}
		rows.push_back(std::move(row));
	}
	return rows;
}

int cmd_bench(const std::vector<RunConfig>& configs, int runs, const fs::path& csv_out) {
	if (configs.empty()) throw ConfigError("config", "bench needs at least one config");
	if (runs < 1) throw ConfigError("runs", "must be >= 1");
	const auto rows = run_bench(configs, runs);

	std::ostringstream csv;
	csv << "name,config_hash,seed,runs_ok,runs_failed,ACC,NMI,Purity,ARI,Precision,Recall,F-score,Average,CPU\n";
	for (const auto& r : rows) {
		csv << r.name << ',' << r.config_hash << ',' << r.seed << ',' << r.runs_ok << ',' << r.runs_failed;
		if (r.has_metrics)
			csv << fmt::format(",{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}", r.mean.acc, r.mean.nmi,
			                   r.mean.purity, r.mean.ari, r.mean.precision, r.mean.recall, r.mean.f_score, r.mean.average);
		else
			csv << ",,,,,,,,";
		csv << fmt::format(",{:.6f}\n", r.cpu);
	}
	if (!csv_out.empty()) {
		if (csv_out.has_parent_path()) fs::create_directories(csv_out.parent_path());
		open_out(csv_out) << csv.str();
	}

	std::cout << fmt::format("{:<24} {:>7} {:>7} {:>7} {:>7} {:>9} {:>7} {:>7} {:>7} {:>8}\n", "Method", "ACC", "NMI",
	                         "Purity", "ARI", "Precision", "Recall", "F-score", "Average", "CPU(s)");
	for (const auto& r : rows) {
		if (r.has_metrics)
			std::cout << fmt::format("{:<24} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>9.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>8.4f}",
			                         r.name, r.mean.acc, r.mean.nmi, r.mean.purity, r.mean.ari, r.mean.precision,
			                         r.mean.recall, r.mean.f_score, r.mean.average, r.cpu);
		else
			std::cout << fmt::format("{:<24} {:>7} {:>7} {:>7} {:>7} {:>9} {:>7} {:>7} {:>7} {:>8.4f}", r.name, "-", "-",
			                         "-", "-", "-", "-", "-", "-", r.cpu);
		if (r.runs_failed) std::cout << fmt::format("  ({} of {} runs failed)", r.runs_failed, r.runs_ok + r.runs_failed);
		std::cout << '\n';
	}
	const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.runs_ok > 0; });
	return any_ok ? kOk : kRuntime;
}

int cmd_verify_theory(const TheoryCommand& opts) {
	if (opts.count < 1) throw ConfigError("count", "must be >= 1");
	TheoryInstanceOptions inst;
	inst.exact = opts.exact;
	const std::string hash =
	    fnv1a_hex(json{{"count", opts.count}, {"seed", opts.seed}, {"exact", opts.exact}}.dump());
	const auto reports = run_theory_suite(opts.count, opts.seed, inst);

	json arr = json::array();
	std::vector<int> violated;
	int applicable41 = 0, applicable43 = 0;
	for (const auto& r : reports) {
		json j = to_json(r);
		j["config_hash"] = hash;
		j["suite_seed"] = opts.seed;
		arr.push_back(std::move(j));
		applicable41 += r.theorem41.applicable;
		applicable43 += r.sintheta.applicable;
		if ((r.theorem41.applicable && !r.theorem41.holds) || (r.sintheta.applicable && !r.sintheta.holds))
			violated.push_back(r.instance);
	}
	if (opts.output.empty()) {
		std::cout << arr.dump(2) << '\n';
	} else {
		fs::path p(opts.output);
		if (p.has_parent_path()) fs::create_directories(p.parent_path());
		open_out(p) << arr.dump(2) << '\n';
	}
	std::cerr << fmt::format("verify-theory: {} instance(s); degree-perturbation bound applicable on {}, "
	                         "sin-theta bound applicable on {}; {}\n",
	                         reports.size(), applicable41, applicable43,
	                         violated.empty() ? "all applicable checks hold" : "VIOLATIONS");
	if (violated.empty()) return kOk;
	std::cerr << "violated instances:";
	for (int v : violated) std::cerr << ' ' << v;
	std::cerr << '\n';
	return kTheoryViolation;
}

int cmd_make_blobs(const BlobSpec& spec, const fs::path& out) {
	const Dataset ds = make_blobs(spec.clusters, spec.per_cluster, spec.dim, spec.separation, spec.seed);
	if (out.has_parent_path()) fs::create_directories(out.parent_path());
	write_csv(ds, out);
	std::cout << fmt::format("wrote {} samples ({} clusters, d={}) to {}\n", ds.n(), spec.clusters, spec.dim, out.string());
	return kOk;
}

} // namespace rsc::app
