#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Sample matrices are stored row-major so that a sample is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<Index>;

class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Dataset parsing / validation failure. `line()` is 1-based, 0 when not tied to a line.
class DatasetError : public Error {
public:
	DatasetError(const std::string& what, std::size_t line = 0, std::optional<Index> row = std::nullopt)
	    : Error(what), line_(line), row_(row) {}

	std::size_t line() const noexcept { return line_; }
	std::optional<Index> row() const noexcept { return row_; }

private:
	std::size_t line_;
	std::optional<Index> row_;
};

/// Failure inside a block's kernel pipeline. The engines attach the cycle index when propagating.
class KernelError : public Error {
public:
	KernelError(const std::string& what, Index block, std::optional<int> cycle = std::nullopt)
	    : Error(compose(what, block, cycle)), detail_(what), block_(block), cycle_(cycle) {}

	Index block() const noexcept { return block_; }
	std::optional<int> cycle() const noexcept { return cycle_; }
	KernelError at_cycle(int cycle) const { return KernelError(detail_, block_, cycle); }

private:
	static std::string compose(const std::string& what, Index block, std::optional<int> cycle) {
		std::string s = "block " + std::to_string(block) + ": " + what;
		if (cycle) s = "cycle " + std::to_string(*cycle) + ", " + s;
		return s;
	}

	std::string detail_;
	Index block_;
	std::optional<int> cycle_;
};

/// Size guard or shape mismatch in the dense verification oracles.
class OracleError : public Error {
public:
	using Error::Error;
};

/// Derives an independent 64-bit stream seed from a base seed and a tuple of stream ids.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
	auto mix = [](std::uint64_t z) {
		z += 0x9e3779b97f4a7c15ULL;
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
		return z ^ (z >> 31);
	};
	return mix(mix(mix(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

} // namespace rsc
