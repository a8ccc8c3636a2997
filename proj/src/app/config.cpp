#include "app/config.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>

namespace rsc::app {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, const std::string& path, T fallback) {
	if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
	try {
		return obj.at(key).get<T>();
	} catch (const json::exception&) {
		throw ConfigError(path + key, "has the wrong type");
	}
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
	if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path.substr(0, path.size() - 1), "must be an object");
	for (const auto& [key, _] : obj.items()) {
		bool ok = false;
		for (const char* a : allowed) ok = ok || key == a;
		if (!ok) throw ConfigError(path + key, "unknown field");
	}
}

double parse_number_prefix(const std::string& text, std::size_t skip, const std::string& field) {
	try {
		std::size_t used = 0;
		const double v = std::stod(text.substr(skip), &used);
		if (used != text.size() - skip) throw std::invalid_argument("trailing characters");
		return v;
	} catch (const std::exception&) {
		throw ConfigError(field, "cannot parse '" + text + "'");
	}
}

} // namespace

SizePolicy parse_size_policy(const std::string& text, const std::string& field) {
	if (text == "auto") return SizePolicy::automatic();
	if (text.rfind("abs:", 0) == 0) {
		const double v = parse_number_prefix(text, 4, field);
		if (v < 1.0 || v != static_cast<double>(static_cast<long long>(v))) throw ConfigError(field, "abs count must be a positive integer");
		return SizePolicy::absolute(v);
	}
	if (text.rfind("frac:", 0) == 0) {
		const double v = parse_number_prefix(text, 5, field);
		if (!(v > 0.0 && v <= 1.0)) throw ConfigError(field, "fraction must be in (0, 1]");
		return SizePolicy::fraction(v);
	}
	throw ConfigError(field, "expected auto, abs:<count> or frac:<fraction>, got '" + text + "'");
}

std::string format_size_policy(const SizePolicy& p) {
	switch (p.kind) {
	case SizePolicy::Kind::Auto: return "auto";
	case SizePolicy::Kind::Absolute: return "abs:" + std::to_string(static_cast<long long>(p.value));
	case SizePolicy::Kind::Fraction: {
		json v = p.value;
		return "frac:" + v.dump();
	}
	}
	return "auto";
}

RunConfig config_from_json(const json& j) {
	check_keys(j, {"name", "dataset", "algorithm", "clusters", "init", "init_file", "kernel", "loop", "kmeans", "seed", "output"}, "");
	RunConfig cfg;
	cfg.name = get_or<std::string>(j, "name", "", "");

	if (!j.contains("dataset")) throw ConfigError("dataset", "is required");
	const json& d = j.at("dataset");
	check_keys(d, {"path", "format", "label_column", "normalize", "zscore", "blobs"}, "dataset.");
	cfg.dataset.path = get_or<std::string>(d, "path", "dataset.", "");
	cfg.dataset.format = get_or<std::string>(d, "format", "dataset.", "csv");
	if (d.contains("label_column") && !d.at("label_column").is_null())
		cfg.dataset.label_column = get_or<std::size_t>(d, "label_column", "dataset.", 0);
	cfg.dataset.zscore = get_or<bool>(d, "zscore", "dataset.", false);
	if (d.contains("blobs")) {
		const json& b = d.at("blobs");
		check_keys(b, {"clusters", "per_cluster", "dim", "separation", "seed"}, "dataset.blobs.");
		BlobSpec spec;
		spec.clusters = get_or<int>(b, "clusters", "dataset.blobs.", spec.clusters);
		spec.per_cluster = get_or<int>(b, "per_cluster", "dataset.blobs.", spec.per_cluster);
		spec.dim = get_or<int>(b, "dim", "dataset.blobs.", spec.dim);
		spec.separation = get_or<double>(b, "separation", "dataset.blobs.", spec.separation);
		spec.seed = get_or<std::uint64_t>(b, "seed", "dataset.blobs.", spec.seed);
		if (spec.clusters < 1) throw ConfigError("dataset.blobs.clusters", "must be >= 1");
		if (spec.per_cluster < 1) throw ConfigError("dataset.blobs.per_cluster", "must be >= 1");
		if (spec.dim < 1) throw ConfigError("dataset.blobs.dim", "must be >= 1");
		if (!(spec.separation > 0.0)) throw ConfigError("dataset.blobs.separation", "must be > 0");
		cfg.dataset.blobs = spec;
	}
	// Unit rows suit real feature vectors; blobs are clustered in their raw geometry.
	cfg.dataset.normalize = get_or<bool>(d, "normalize", "dataset.", !cfg.dataset.blobs);
	if (!cfg.dataset.blobs && cfg.dataset.path.empty()) throw ConfigError("dataset.path", "is required (or give dataset.blobs)");
	if (cfg.dataset.format != "csv" && cfg.dataset.format != "libsvm")
		throw ConfigError("dataset.format", "must be csv or libsvm");

	cfg.algorithm = get_or<std::string>(j, "algorithm", "", cfg.algorithm);
	if (cfg.algorithm != "alg1" && cfg.algorithm != "alg2" && cfg.algorithm != "kmeans")
		throw ConfigError("algorithm", "must be alg1, alg2 or kmeans");
	cfg.clusters = get_or<int>(j, "clusters", "", 0);
	if (cfg.clusters < 0 || cfg.clusters == 1) throw ConfigError("clusters", "must be >= 2 (or 0 for the label count)");
	cfg.init = get_or<std::string>(j, "init", "", cfg.init);
	if (cfg.init != "random" && cfg.init != "kmeans" && cfg.init != "file")
		throw ConfigError("init", "must be random, kmeans or file");
	cfg.init_file = get_or<std::string>(j, "init_file", "", "");
	if (cfg.init == "file" && cfg.init_file.empty()) throw ConfigError("init_file", "is required when init is file");

	auto& p = cfg.params;
	if (j.contains("kernel")) {
		const json& k = j.at("kernel");
		check_keys(k, {"tau", "landmarks", "rank", "pinv_tol", "deg_clamp"}, "kernel.");
		if (k.contains("tau") && !k.at("tau").is_null()) {
			const json& t = k.at("tau");
			if (t.is_string()) {
				if (t.get<std::string>() != "median") throw ConfigError("kernel.tau", "must be a number or \"median\"");
			} else if (t.is_number()) {
				p.tau = t.get<double>();
				if (!(*p.tau > 0.0)) throw ConfigError("kernel.tau", "must be > 0");
			} else {
				throw ConfigError("kernel.tau", "must be a number or \"median\"");
			}
		}
		p.landmarks = parse_size_policy(get_or<std::string>(k, "landmarks", "kernel.", "auto"), "kernel.landmarks");
		p.rank = parse_size_policy(get_or<std::string>(k, "rank", "kernel.", "auto"), "kernel.rank");
		p.pinv_tol = get_or<double>(k, "pinv_tol", "kernel.", p.pinv_tol);
		p.deg_clamp = get_or<double>(k, "deg_clamp", "kernel.", p.deg_clamp);
		if (!(p.pinv_tol > 0.0 && p.pinv_tol < 1.0)) throw ConfigError("kernel.pinv_tol", "must be in (0, 1)");
		if (!(p.deg_clamp > 0.0)) throw ConfigError("kernel.deg_clamp", "must be > 0");
	}
	if (j.contains("loop")) {
		const json& l = j.at("loop");
		check_keys(l, {"itermax", "tol", "lambda", "gpi_iter", "gpi_tol"}, "loop.");
		p.itermax = get_or<int>(l, "itermax", "loop.", p.itermax);
		p.tol = get_or<double>(l, "tol", "loop.", p.tol);
		p.lambda = get_or<double>(l, "lambda", "loop.", p.lambda);
		p.gpi_iter = get_or<int>(l, "gpi_iter", "loop.", p.gpi_iter);
		p.gpi_tol = get_or<double>(l, "gpi_tol", "loop.", p.gpi_tol);
		if (p.itermax < 0) throw ConfigError("loop.itermax", "must be >= 0");
		if (!(p.tol > 0.0)) throw ConfigError("loop.tol", "must be > 0");
		if (!(p.lambda > 0.0)) throw ConfigError("loop.lambda", "must be > 0");
		if (p.gpi_iter < 1) throw ConfigError("loop.gpi_iter", "must be >= 1");
		if (!(p.gpi_tol > 0.0)) throw ConfigError("loop.gpi_tol", "must be > 0");
	}
	if (j.contains("kmeans")) {
		const json& k = j.at("kmeans");
		check_keys(k, {"restarts", "max_iter", "tol"}, "kmeans.");
		p.kmeans.restarts = get_or<int>(k, "restarts", "kmeans.", p.kmeans.restarts);
		p.kmeans.max_iter = get_or<int>(k, "max_iter", "kmeans.", p.kmeans.max_iter);
		p.kmeans.tol = get_or<double>(k, "tol", "kmeans.", p.kmeans.tol);
		if (p.kmeans.restarts < 1) throw ConfigError("kmeans.restarts", "must be >= 1");
		if (p.kmeans.max_iter < 1) throw ConfigError("kmeans.max_iter", "must be >= 1");
		if (!(p.kmeans.tol >= 0.0)) throw ConfigError("kmeans.tol", "must be >= 0");
	}
	p.seed = get_or<std::uint64_t>(j, "seed", "", 0);
	cfg.output = get_or<std::string>(j, "output", "", cfg.output);
	return cfg;
}

json to_json(const RunConfig& cfg) {
	const auto& p = cfg.params;
	json dataset{{"path", cfg.dataset.path},
	             {"format", cfg.dataset.format},
	             {"label_column", cfg.dataset.label_column ? json(*cfg.dataset.label_column) : json()},
	             {"normalize", cfg.dataset.normalize},
	             {"zscore", cfg.dataset.zscore}};
	if (cfg.dataset.blobs) {
		const auto& b = *cfg.dataset.blobs;
		dataset["blobs"] = json{{"clusters", b.clusters},
		                        {"per_cluster", b.per_cluster},
		                        {"dim", b.dim},
		                        {"separation", b.separation},
		                        {"seed", b.seed}};
	}
	return json{{"name", cfg.name},
	            {"dataset", dataset},
	            {"algorithm", cfg.algorithm},
	            {"clusters", cfg.clusters},
	            {"init", cfg.init},
	            {"init_file", cfg.init_file},
	            {"kernel",
	             {{"tau", p.tau ? json(*p.tau) : json("median")},
	              {"landmarks", format_size_policy(p.landmarks)},
	              {"rank", format_size_policy(p.rank)},
	              {"pinv_tol", p.pinv_tol},
	              {"deg_clamp", p.deg_clamp}}},
	            {"loop",
	             {{"itermax", p.itermax},
	              {"tol", p.tol},
	              {"lambda", p.lambda},
	              {"gpi_iter", p.gpi_iter},
	              {"gpi_tol", p.gpi_tol}}},
	            {"kmeans", {{"restarts", p.kmeans.restarts}, {"max_iter", p.kmeans.max_iter}, {"tol", p.kmeans.tol}}},
	            {"seed", p.seed},
	            {"output", cfg.output}};
}

std::string fnv1a_hex(const std::string& text) {
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char ch : text) {
		h ^= ch;
		h *= 0x100000001b3ULL;
	}
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

std::string config_hash(const RunConfig& cfg) {
	json j = to_json(cfg);
	j.erase("output"); // where results go does not change them
	return fnv1a_hex(j.dump());
}

std::string display_name(const RunConfig& cfg) {
	if (!cfg.name.empty()) return cfg.name;
	return cfg.init + "+" + cfg.algorithm;
}

Dataset load_dataset(const DatasetSpec& spec) {
	Dataset ds;
	if (spec.blobs) {
		const auto& b = *spec.blobs;
		ds = make_blobs(b.clusters, b.per_cluster, b.dim, b.separation, b.seed);
	} else if (!std::filesystem::exists(spec.path)) {
		throw ConfigError("dataset.path", "file not found: " + spec.path);
	} else if (spec.format == "libsvm") {
		auto loaded = load_libsvm(spec.path);
		if (loaded.skipped_lines) spdlog::info("{}: skipped {} blank/comment line(s)", spec.path, loaded.skipped_lines);
		ds = std::move(loaded.dataset);
	} else {
		ds = load_csv(spec.path, spec.label_column);
	}
	if (spec.zscore) ds = standardize_columns(ds);
	if (spec.normalize) ds = normalize_rows(ds);
	spdlog::info("dataset {}: n={} d={}{}", ds.name, ds.n(), ds.d(),
	             ds.labels ? ", classes=" + std::to_string(ds.num_classes()) : std::string());
	return ds;
}

} // namespace rsc::app
