#pragma once

#include <rsc/types.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rsc {

/// n×d samples with optional dense ground-truth labels in [0, num_classes()).
struct Dataset {
	RowMatrix samples;
	std::optional<std::vector<int>> labels;
	std::string name;

	Index n() const noexcept { return samples.rows(); }
	Index d() const noexcept { return samples.cols(); }
	int num_classes() const;
};

struct LibsvmLoad {
	Dataset dataset;
	std::size_t skipped_lines = 0;
};

/// Parses comma-separated numeric rows. A first row with no numeric feature cell is
/// treated as a header. Labels (integers or strings) are re-indexed densely in
/// first-occurrence order.
Dataset load_csv(const std::filesystem::path& path, std::optional<std::size_t> label_column = std::nullopt);

/// Parses "label idx:val ..." lines with 1-based, strictly increasing indices.
/// Blank and comment-only lines are skipped and counted.
LibsvmLoad load_libsvm(const std::filesystem::path& path);

/// Writes features then (if present) the label as the last column, with a header row.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Scales each row to unit Euclidean norm. Throws DatasetError naming the first zero row.
Dataset normalize_rows(const Dataset& ds);

/// Column-wise z-score. Constant columns are centred but left unscaled.
Dataset standardize_columns(const Dataset& ds);

struct Blobs {
	Dataset dataset;
	RowMatrix centers; // c×d generating centres
};

/// Isotropic unit-variance Gaussian clusters whose centres are pairwise at least
/// `separation` apart. Deterministic for a fixed seed.
Blobs generate_blobs(int c, int per_cluster, int d, double separation, std::uint64_t seed);

inline Dataset make_blobs(int c, int per_cluster, int d, double separation, std::uint64_t seed) {
	return generate_blobs(c, per_cluster, d, separation, seed).dataset;
}

/// Maps arbitrary label tokens to dense ids by first occurrence.
std::vector<int> dense_reindex(const std::vector<std::string>& tokens);

} // namespace rsc
