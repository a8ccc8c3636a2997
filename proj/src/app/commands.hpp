#pragma once

#include "app/config.hpp"

#include <rsc/metrics.hpp>
#include <rsc/theory_check.hpp>

#include <filesystem>
#include <vector>

namespace rsc::app {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kTheoryViolation = 3 };

struct RunOutcome {
	Partition partition;
	std::optional<MetricsReport> metrics;
	nlohmann::json history = nlohmann::json::array();
	double tau = 0.0;
	bool converged = false;
	int cycles = 0;
	double seconds = 0.0; ///< algorithm wall time, dataset loading excluded
	double cpu_seconds = 0.0;
};

/// Initial partition as configured (random, K-means on the samples, or a file).
Partition initial_partition(const RunConfig& cfg, const Dataset& ds, int c, std::uint64_t seed);

/// Reads "sample_index,cluster" rows; lines starting with '#' and a header are skipped.
Partition read_partition_csv(const std::filesystem::path& path, Index n, int c);
void write_partition_csv(const Partition& p, const std::filesystem::path& path, const std::string& provenance);

/// One run of the configured algorithm with an explicit seed.
RunOutcome execute(const RunConfig& cfg, const Dataset& ds, std::uint64_t seed);

int resolve_clusters(const RunConfig& cfg, const Dataset& ds);

int cmd_cluster(const RunConfig& cfg);

struct BenchRow {
	std::string name;
	std::string config_hash;
	std::uint64_t seed = 0;
	int runs_ok = 0;
	int runs_failed = 0;
	std::vector<std::string> failures;
	MetricsReport mean;
	double cpu = 0.0;
	bool has_metrics = false;
};

std::vector<BenchRow> run_bench(const std::vector<RunConfig>& configs, int runs);
int cmd_bench(const std::vector<RunConfig>& configs, int runs, const std::filesystem::path& csv_out);

struct TheoryCommand {
	int count = 20;
	std::uint64_t seed = 0;
	bool exact = false;
	std::string output; ///< empty: stdout
};

int cmd_verify_theory(const TheoryCommand& opts);

int cmd_make_blobs(const BlobSpec& spec, const std::filesystem::path& out);

} // namespace rsc::app
