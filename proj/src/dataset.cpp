#include <rsc/dataset.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <unordered_map>

namespace rsc {

namespace {

std::string_view trim(std::string_view s) {
	const auto ws = " \t\r\n";
	const auto b = s.find_first_not_of(ws);
	if (b == std::string_view::npos) return {};
	const auto e = s.find_last_not_of(ws);
	return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
	std::vector<std::string_view> out;
	std::size_t start = 0;
	while (true) {
		const auto pos = line.find(sep, start);
		out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
		if (pos == std::string_view::npos) break;
		start = pos + 1;
	}
	return out;
}

std::optional<double> parse_double(std::string_view s) {
	if (s.empty()) return std::nullopt;
	if (s.front() == '+') s.remove_prefix(1);
	double v = 0.0;
	const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
	if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
	return v;
}

void check_finite(const RowMatrix& x) {
	for (Index i = 0; i < x.rows(); ++i)
		for (Index j = 0; j < x.cols(); ++j)
			if (!std::isfinite(x(i, j)))
				throw DatasetError("non-finite value in row " + std::to_string(i), 0, i);
}

} // namespace

int Dataset::num_classes() const {
	if (!labels || labels->empty()) return 0;
	return *std::max_element(labels->begin(), labels->end()) + 1;
}

std::vector<int> dense_reindex(const std::vector<std::string>& tokens) {
	std::unordered_map<std::string, int> ids;
	std::vector<int> out;
	out.reserve(tokens.size());
	for (const auto& t : tokens) {
		auto [it, inserted] = ids.try_emplace(t, static_cast<int>(ids.size()));
		out.push_back(it->second);
	}
	return out;
}

Dataset load_csv(const std::filesystem::path& path, std::optional<std::size_t> label_column) {
	std::ifstream in(path);
	if (!in) throw DatasetError("cannot open file: " + path.string());

	std::vector<std::vector<double>> rows;
	std::vector<std::string> label_tokens;
	std::size_t arity = 0;
	std::size_t line_no = 0;
	bool first_content = true;
	std::string line;

	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty()) continue;
		const auto cells = split(line, ',');

		if (first_content) {
			arity = cells.size();
			if (label_column && *label_column >= arity)
				throw DatasetError("label column " + std::to_string(*label_column) + " out of range at line " +
				                       std::to_string(line_no),
				                   line_no);
			bool any_numeric = false;
			for (std::size_t k = 0; k < cells.size(); ++k)
				if (k != label_column && parse_double(cells[k])) any_numeric = true;
			first_content = false;
			if (!any_numeric) continue; // header
		}

		if (cells.size() != arity)
			throw DatasetError("malformed row at line " + std::to_string(line_no) + ": expected " +
			                       std::to_string(arity) + " fields, got " + std::to_string(cells.size()),
			                   line_no);

		std::vector<double> features;
		features.reserve(arity);
		for (std::size_t k = 0; k < cells.size(); ++k) {
			if (label_column && k == *label_column) {
				label_tokens.emplace_back(cells[k]);
				continue;
			}
			const auto v = parse_double(cells[k]);
			if (!v)
				throw DatasetError("non-numeric value '" + std::string(cells[k]) + "' at line " +
				                       std::to_string(line_no) + ", column " + std::to_string(k),
				                   line_no);
			features.push_back(*v);
		}
		rows.push_back(std::move(features));
	}

	if (rows.empty()) throw DatasetError("empty file: " + path.string());
	const std::size_t d = rows.front().size();
	if (d == 0) throw DatasetError("no feature columns in " + path.string());

	Dataset ds;
	ds.name = path.stem().string();
	ds.samples.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
	for (std::size_t i = 0; i < rows.size(); ++i)
		for (std::size_t j = 0; j < d; ++j) ds.samples(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
	if (label_column) ds.labels = dense_reindex(label_tokens);
	check_finite(ds.samples);
	return ds;
}

LibsvmLoad load_libsvm(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) throw DatasetError("cannot open file: " + path.string());

	struct SparseRow {
		std::vector<std::pair<std::size_t, double>> entries;
	};
	std::vector<SparseRow> rows;
	std::vector<std::string> label_tokens;
	std::size_t skipped = 0;
	std::size_t max_index = 0;
	std::size_t line_no = 0;
	std::string line;

	while (std::getline(in, line)) {
		++line_no;
		std::string_view body = line;
		if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
		body = trim(body);
		if (body.empty()) {
			++skipped;
			continue;
		}

		std::istringstream tokens{std::string(body)};
		std::string tok;
		tokens >> tok;
		if (tok.find(':') != std::string::npos)
			throw DatasetError("missing label token at line " + std::to_string(line_no), line_no);
		label_tokens.push_back(tok);

		SparseRow row;
		std::size_t last = 0;
		while (tokens >> tok) {
			const auto colon = tok.find(':');
			if (colon == std::string::npos)
				throw DatasetError("malformed feature '" + tok + "' at line " + std::to_string(line_no), line_no);
			std::size_t idx = 0;
			const auto idx_sv = std::string_view(tok).substr(0, colon);
			const auto [p, ec] = std::from_chars(idx_sv.data(), idx_sv.data() + idx_sv.size(), idx);
			if (ec != std::errc() || p != idx_sv.data() + idx_sv.size() || idx == 0)
				throw DatasetError("bad feature index '" + std::string(idx_sv) + "' at line " + std::to_string(line_no),
				                   line_no);
			if (idx <= last)
				throw DatasetError("non-increasing feature index " + std::to_string(idx) + " at line " +
				                       std::to_string(line_no),
				                   line_no);
			const auto v = parse_double(std::string_view(tok).substr(colon + 1));
			if (!v)
				throw DatasetError("non-numeric value in '" + tok + "' at line " + std::to_string(line_no), line_no);
			row.entries.emplace_back(idx, *v);
			last = idx;
			max_index = std::max(max_index, idx);
		}
		rows.push_back(std::move(row));
	}

	if (rows.empty()) throw DatasetError("empty file: " + path.string());
	if (max_index == 0) throw DatasetError("no features in " + path.string());
	if (skipped > 0) spdlog::info("{}: skipped {} blank line(s)", path.string(), skipped);

	LibsvmLoad out;
	out.skipped_lines = skipped;
	out.dataset.name = path.stem().string();
	out.dataset.samples = RowMatrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(max_index));
	for (std::size_t i = 0; i < rows.size(); ++i)
		for (const auto& [idx, v] : rows[i].entries)
			out.dataset.samples(static_cast<Index>(i), static_cast<Index>(idx - 1)) = v;
	out.dataset.labels = dense_reindex(label_tokens);
	check_finite(out.dataset.samples);
	return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
	std::ofstream out(path);
	if (!out) throw DatasetError("cannot write file: " + path.string());
	for (Index j = 0; j < ds.d(); ++j) out << (j ? "," : "") << 'f' << j;
	if (ds.labels) out << ",label";
	out << '\n';
	out << std::setprecision(17);
	for (Index i = 0; i < ds.n(); ++i) {
		for (Index j = 0; j < ds.d(); ++j) out << (j ? "," : "") << ds.samples(i, j);
		if (ds.labels) out << ',' << (*ds.labels)[static_cast<std::size_t>(i)];
		out << '\n';
	}
}

Dataset normalize_rows(const Dataset& ds) {
	Dataset out = ds;
	for (Index i = 0; i < out.n(); ++i) {
		const double norm = out.samples.row(i).norm();
		if (norm == 0.0) throw DatasetError("zero row " + std::to_string(i) + " cannot be normalized", 0, i);
		out.samples.row(i) /= norm;
	}
	return out;
}

Dataset standardize_columns(const Dataset& ds) {
	Dataset out = ds;
	const double n = static_cast<double>(ds.n());
	for (Index j = 0; j < out.d(); ++j) {
		auto col = out.samples.col(j);
		const double mean = col.mean();
		col.array() -= mean;
		const double sd = std::sqrt(col.squaredNorm() / n);
		if (sd > 0.0) col /= sd;
	}
	return out;
}

Blobs generate_blobs(int c, int per_cluster, int d, double separation, std::uint64_t seed) {
	if (c < 2) throw std::invalid_argument("make_blobs: c must be >= 2");
	if (per_cluster < 1) throw std::invalid_argument("make_blobs: per_cluster must be >= 1");
	if (d < 1) throw std::invalid_argument("make_blobs: d must be >= 1");
	if (!(separation > 0.0)) throw std::invalid_argument("make_blobs: separation must be > 0");

	std::mt19937_64 rng(seed);
	// Rejection-sample centres in a box that grows if placement keeps failing.
	double side = separation * c;
	RowMatrix centers(c, d);
	int placed = 0;
	int failures = 0;
	while (placed < c) {
		std::uniform_real_distribution<double> box(0.0, side);
		for (int j = 0; j < d; ++j) centers(placed, j) = box(rng);
		bool ok = true;
		for (int k = 0; k < placed && ok; ++k)
			ok = (centers.row(k) - centers.row(placed)).norm() >= separation;
		if (ok) {
			++placed;
			failures = 0;
		} else if (++failures > 1000) {
			side *= 1.5;
			failures = 0;
		}
	}

	Dataset ds;
	ds.name = "blobs";
	ds.samples.resize(static_cast<Index>(c) * per_cluster, d);
	ds.labels = std::vector<int>(static_cast<std::size_t>(c) * per_cluster);
	std::normal_distribution<double> gauss(0.0, 1.0);
	Index row = 0;
	for (int k = 0; k < c; ++k)
		for (int p = 0; p < per_cluster; ++p, ++row) {
			for (int j = 0; j < d; ++j) ds.samples(row, j) = centers(k, j) + gauss(rng);
			(*ds.labels)[static_cast<std::size_t>(row)] = k;
		}
	return Blobs{std::move(ds), std::move(centers)};
}

} // namespace rsc
