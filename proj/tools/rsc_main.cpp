// rsc: restarted self-guiding spectral clustering driver.

#include "app/commands.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

using nlohmann::json;
using namespace rsc;
using namespace rsc::app;

namespace {

json read_json_file(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw ConfigError("config", "cannot open " + path);
	try {
		return json::parse(in);
	} catch (const json::parse_error& e) {
		throw ConfigError("config", path + ": " + e.what());
	}
}

struct Overrides {
	std::string dataset, format, algorithm, init, init_file, tau, landmarks, rank, output;
	std::optional<std::size_t> label_column;
	std::optional<int> clusters, itermax;
	std::optional<double> tol, lambda;
	std::optional<std::uint64_t> seed;

	void attach(CLI::App* cmd) {
		cmd->add_option("--dataset", dataset, "Dataset path");
		cmd->add_option("--format", format, "csv or libsvm");
		cmd->add_option("--label-column", label_column, "0-based label column in a CSV");
		cmd->add_option("--algorithm", algorithm, "alg1, alg2 or kmeans");
		cmd->add_option("-c,--clusters", clusters, "Number of clusters (default: label count)");
		cmd->add_option("--init", init, "random, kmeans or file");
		cmd->add_option("--init-file", init_file, "Initial partition CSV (sample_index,cluster)");
		cmd->add_option("--tau", tau, "Kernel bandwidth or 'median'");
		cmd->add_option("--landmarks", landmarks, "auto, abs:<m> or frac:<f>");
		cmd->add_option("--rank", rank, "auto, abs:<r> or frac:<f>");
		cmd->add_option("--itermax", itermax, "Maximum number of cycles");
		cmd->add_option("--tol", tol, "Subspace stopping tolerance");
		cmd->add_option("--lambda", lambda, "Rotation coupling weight (alg2)");
		cmd->add_option("--seed", seed, "Random seed");
		cmd->add_option("-o,--output", output, "Output directory");
	}

	void apply(json& j) const {
		if (!j.contains("dataset")) j["dataset"] = json::object();
		if (!dataset.empty()) j["dataset"]["path"] = dataset;
		if (!format.empty()) j["dataset"]["format"] = format;
		if (label_column) j["dataset"]["label_column"] = *label_column;
		if (!algorithm.empty()) j["algorithm"] = algorithm;
		if (clusters) j["clusters"] = *clusters;
		if (!init.empty()) j["init"] = init;
		if (!init_file.empty()) j["init_file"] = init_file;
		if (!tau.empty() || !landmarks.empty() || !rank.empty()) {
			if (!j.contains("kernel")) j["kernel"] = json::object();
			if (tau == "median") j["kernel"]["tau"] = "median";
			else if (!tau.empty()) {
				try {
					j["kernel"]["tau"] = std::stod(tau);
				} catch (const std::exception&) {
					throw ConfigError("kernel.tau", "cannot parse '" + tau + "'");
				}
			}
			if (!landmarks.empty()) j["kernel"]["landmarks"] = landmarks;
			if (!rank.empty()) j["kernel"]["rank"] = rank;
		}
		if (itermax || tol || lambda) {
			if (!j.contains("loop")) j["loop"] = json::object();
			if (itermax) j["loop"]["itermax"] = *itermax;
			if (tol) j["loop"]["tol"] = *tol;
			if (lambda) j["loop"]["lambda"] = *lambda;
		}
		if (seed) j["seed"] = *seed;
		if (!output.empty()) j["output"] = output;
	}
};

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Restarted self-guiding spectral clustering"};
	app.require_subcommand(1);
	std::string log_level = "warn";
	app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

	auto* cluster = app.add_subcommand("cluster", "Cluster one dataset and write reports");
	std::string cluster_config;
	Overrides cluster_over;
	cluster->add_option("--config", cluster_config, "JSON run configuration");
	cluster_over.attach(cluster);

	auto* bench = app.add_subcommand("bench", "Run configurations repeatedly and tabulate mean metrics");
	std::vector<std::string> bench_configs;
	int runs = 5;
	std::string bench_csv = "bench.csv";
	bench->add_option("--config", bench_configs, "JSON run configuration (repeatable)")->required();
	bench->add_option("--runs", runs, "Runs per configuration (seeds seed+k)");
	bench->add_option("--csv", bench_csv, "CSV output path");

	auto* theory = app.add_subcommand("verify-theory", "Check the perturbation bounds on random instances");
	TheoryCommand theory_opts;
	theory->add_option("--count", theory_opts.count, "Number of instances");
	theory->add_option("--seed", theory_opts.seed, "Suite seed");
	theory->add_flag("--exact", theory_opts.exact, "Full sampling and full rank");
	theory->add_option("-o,--output", theory_opts.output, "JSON output file (default: stdout)");

	auto* blobs = app.add_subcommand("make-blobs", "Write a Gaussian-blob dataset as CSV");
	BlobSpec blob_spec;
	std::string blob_out = "blobs.csv";
	blobs->add_option("-c,--clusters", blob_spec.clusters, "Number of clusters");
	blobs->add_option("--per-cluster", blob_spec.per_cluster, "Samples per cluster");
	blobs->add_option("--dim", blob_spec.dim, "Dimension");
	blobs->add_option("--separation", blob_spec.separation, "Minimum centre separation");
	blobs->add_option("--seed", blob_spec.seed, "Random seed");
	blobs->add_option("-o,--output", blob_out, "Output CSV");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? kOk : kValidation;
	}

	const auto level = spdlog::level::from_str(log_level);
	spdlog::set_level(level);

	try {
		if (*cluster) {
			json j = cluster_config.empty() ? json::object() : read_json_file(cluster_config);
			cluster_over.apply(j);
			return cmd_cluster(config_from_json(j));
		}
		if (*bench) {
			std::vector<RunConfig> configs;
			for (const auto& path : bench_configs) configs.push_back(config_from_json(read_json_file(path)));
			return cmd_bench(configs, runs, bench_csv);
		}
		if (*theory) return cmd_verify_theory(theory_opts);
		if (*blobs) return cmd_make_blobs(blob_spec, blob_out);
	} catch (const ConfigError& e) {
		std::cerr << "config error: " << e.what() << '\n';
		return kValidation;
	} catch (const std::invalid_argument& e) {
		std::cerr << "invalid argument: " << e.what() << '\n';
		return kValidation;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return kRuntime;
	}
	return kOk;
}
