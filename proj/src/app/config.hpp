#pragma once

#include <rsc/block_kernel.hpp>
#include <rsc/dataset.hpp>
#include <rsc/kmeans.hpp>
#include <rsc/restart_kmeans.hpp>
#include <rsc/rotation.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace rsc::app {

/// Invalid or missing configuration value. `field()` is the dotted JSON path.
class ConfigError : public Error {
public:
	ConfigError(const std::string& field, const std::string& what)
	    : Error(field + ": " + what), field_(field) {}
	const std::string& field() const noexcept { return field_; }

private:
	std::string field_;
};

struct BlobSpec {
	int clusters = 3;
	int per_cluster = 100;
	int dim = 2;
	double separation = 10.0;
	std::uint64_t seed = 0;
};

struct DatasetSpec {
	std::string path;
	std::string format = "csv"; ///< csv | libsvm
	std::optional<std::size_t> label_column;
	bool normalize = true;
	bool zscore = false;
	std::optional<BlobSpec> blobs;
};

struct RunConfig {
	std::string name;
	DatasetSpec dataset;
	std::string algorithm = "alg1"; ///< alg1 | alg2 | kmeans
	int clusters = 0;               ///< 0: number of label classes
	std::string init = "random";    ///< random | kmeans | file
	std::string init_file;
	RotationParams params;
	std::string output = "rsc_out";
};

/// "auto", "abs:<count>" or "frac:<fraction>".
SizePolicy parse_size_policy(const std::string& text, const std::string& field);
std::string format_size_policy(const SizePolicy& p);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& text);

/// The label used in benchmark tables.
std::string display_name(const RunConfig& cfg);

Dataset load_dataset(const DatasetSpec& spec);

} // namespace rsc::app
