#include <rsc/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsc {

namespace {

void check_sizes(const Partition& pred, const Partition& truth) {
	if (pred.n() != truth.n())
		throw std::invalid_argument("metrics: size mismatch (" + std::to_string(pred.n()) + " vs " +
		                            std::to_string(truth.n()) + ")");
	if (pred.n() == 0) throw std::invalid_argument("metrics: empty partitions");
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

double round4(double v) { return std::round(v * 1e4) / 1e4; }

} // namespace

Matrix contingency(const Partition& pred, const Partition& truth) {
	check_sizes(pred, truth);
	Matrix t = Matrix::Zero(pred.c, truth.c);
	for (Index i = 0; i < pred.n(); ++i) t(pred[i], truth[i]) += 1.0;
	return t;
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
	const Index rows = weights.rows();
	const Index size = std::max(rows, weights.cols());
	// Hungarian method with potentials on the square cost matrix -weights (1-based internals).
	Matrix cost = Matrix::Zero(size, size);
	cost.topLeftCorner(rows, weights.cols()) = -weights;

	const double inf = std::numeric_limits<double>::infinity();
	std::vector<double> u(static_cast<std::size_t>(size + 1), 0.0), v(static_cast<std::size_t>(size + 1), 0.0);
	std::vector<Index> p(static_cast<std::size_t>(size + 1), 0), way(static_cast<std::size_t>(size + 1), 0);
	for (Index i = 1; i <= size; ++i) {
		p[0] = i;
		Index j0 = 0;
		std::vector<double> minv(static_cast<std::size_t>(size + 1), inf);
		std::vector<char> used(static_cast<std::size_t>(size + 1), 0);
		do {
			used[static_cast<std::size_t>(j0)] = 1;
			const Index i0 = p[static_cast<std::size_t>(j0)];
			double delta = inf;
			Index j1 = 0;
			for (Index j = 1; j <= size; ++j) {
				if (used[static_cast<std::size_t>(j)]) continue;
				const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
				if (cur < minv[static_cast<std::size_t>(j)]) {
					minv[static_cast<std::size_t>(j)] = cur;
					way[static_cast<std::size_t>(j)] = j0;
				}
				if (minv[static_cast<std::size_t>(j)] < delta) {
					delta = minv[static_cast<std::size_t>(j)];
					j1 = j;
				}
			}
			for (Index j = 0; j <= size; ++j) {
				if (used[static_cast<std::size_t>(j)]) {
					u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
					v[static_cast<std::size_t>(j)] -= delta;
				} else {
					minv[static_cast<std::size_t>(j)] -= delta;
				}
			}
			j0 = j1;
		} while (p[static_cast<std::size_t>(j0)] != 0);
		do {
			const Index j1 = way[static_cast<std::size_t>(j0)];
			p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
			j0 = j1;
		} while (j0 != 0);
	}

	std::vector<int> match(static_cast<std::size_t>(rows), -1);
	for (Index j = 1; j <= size; ++j) {
		const Index i = p[static_cast<std::size_t>(j)];
		if (i >= 1 && i <= rows && j <= weights.cols()) match[static_cast<std::size_t>(i - 1)] = static_cast<int>(j - 1);
	}
	return match;
}

double accuracy(const Partition& pred, const Partition& truth) {
	const Matrix t = contingency(pred, truth);
	const auto match = max_weight_assignment(t);
	double hit = 0.0;
	for (Index k = 0; k < t.rows(); ++k)
		if (match[static_cast<std::size_t>(k)] >= 0) hit += t(k, match[static_cast<std::size_t>(k)]);
	return hit / static_cast<double>(pred.n());
}

double nmi(const Partition& pred, const Partition& truth, NmiNorm norm) {
	const Matrix t = contingency(pred, truth);
	const double n = static_cast<double>(pred.n());
	const Vector a = t.rowwise().sum();
	const Vector b = t.colwise().sum().transpose();

	auto entropy = [n](const Vector& counts) {
		double h = 0.0;
		for (Index i = 0; i < counts.size(); ++i)
			if (counts(i) > 0.0) h -= counts(i) / n * std::log(counts(i) / n);
		return h;
	};
	double mi = 0.0;
	for (Index i = 0; i < t.rows(); ++i)
		for (Index j = 0; j < t.cols(); ++j)
			if (t(i, j) > 0.0) mi += t(i, j) / n * std::log(n * t(i, j) / (a(i) * b(j)));

	const double ha = entropy(a), hb = entropy(b);
	if (ha == 0.0 && hb == 0.0) return 1.0; // both trivial: identical up to relabeling
	double denom = 0.0;
	switch (norm) {
	case NmiNorm::Sqrt: denom = std::sqrt(ha * hb); break;
	case NmiNorm::Min: denom = std::min(ha, hb); break;
	case NmiNorm::Max: denom = std::max(ha, hb); break;
	case NmiNorm::Mean: denom = 0.5 * (ha + hb); break;
	}
	if (denom == 0.0) return 0.0;
	return std::clamp(mi / denom, 0.0, 1.0);
}

double purity(const Partition& pred, const Partition& truth) {
	const Matrix t = contingency(pred, truth);
	return t.rowwise().maxCoeff().sum() / static_cast<double>(pred.n());
}

PairCounts pair_counts(const Partition& pred, const Partition& truth) {
	const Matrix t = contingency(pred, truth);
	const double n = static_cast<double>(pred.n());
	double same_both = 0.0;
	for (Index i = 0; i < t.rows(); ++i)
		for (Index j = 0; j < t.cols(); ++j) same_both += choose2(t(i, j));
	double same_pred = 0.0, same_truth = 0.0;
	for (Index i = 0; i < t.rows(); ++i) same_pred += choose2(t.row(i).sum());
	for (Index j = 0; j < t.cols(); ++j) same_truth += choose2(t.col(j).sum());

	PairCounts pc;
	pc.tp = static_cast<std::uint64_t>(std::llround(same_both));
	pc.fp = static_cast<std::uint64_t>(std::llround(same_pred - same_both));
	pc.fn = static_cast<std::uint64_t>(std::llround(same_truth - same_both));
	pc.tn = static_cast<std::uint64_t>(std::llround(choose2(n))) - pc.tp - pc.fp - pc.fn;
	return pc;
}

double ari(const Partition& pred, const Partition& truth) {
	const Matrix t = contingency(pred, truth);
	const double n = static_cast<double>(pred.n());
	double index = 0.0, sum_a = 0.0, sum_b = 0.0;
	for (Index i = 0; i < t.rows(); ++i)
		for (Index j = 0; j < t.cols(); ++j) index += choose2(t(i, j));
	for (Index i = 0; i < t.rows(); ++i) sum_a += choose2(t.row(i).sum());
	for (Index j = 0; j < t.cols(); ++j) sum_b += choose2(t.col(j).sum());

	const double total = choose2(n);
	const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
	const double max_index = 0.5 * (sum_a + sum_b);
	const double denom = max_index - expected;
	if (denom == 0.0) return (index == sum_a && index == sum_b) ? 1.0 : 0.0;
	return (index - expected) / denom;
}

double precision(const Partition& pred, const Partition& truth) {
	const auto pc = pair_counts(pred, truth);
	return pc.tp + pc.fp == 0 ? 0.0 : static_cast<double>(pc.tp) / static_cast<double>(pc.tp + pc.fp);
}

double recall(const Partition& pred, const Partition& truth) {
	const auto pc = pair_counts(pred, truth);
	return pc.tp + pc.fn == 0 ? 0.0 : static_cast<double>(pc.tp) / static_cast<double>(pc.tp + pc.fn);
}

double f_score(const Partition& pred, const Partition& truth) {
	const double p = precision(pred, truth), r = recall(pred, truth);
	return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MetricsReport evaluate(const Partition& pred, const Partition& truth) {
	MetricsReport m;
	m.acc = accuracy(pred, truth);
	m.nmi = nmi(pred, truth);
	m.purity = purity(pred, truth);
	m.ari = ari(pred, truth);
	m.precision = precision(pred, truth);
	m.recall = recall(pred, truth);
	m.f_score = f_score(pred, truth);
	m.average = (m.acc + m.nmi + m.purity + m.ari + m.precision + m.recall + m.f_score) / 7.0;
	return m;
}

Partition truth_partition(const std::vector<int>& labels) {
	const int c = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
	return Partition(labels, c);
}

nlohmann::json to_json(const MetricsReport& m) {
	return nlohmann::json{{"acc", round4(m.acc)},         {"nmi", round4(m.nmi)},
	                      {"purity", round4(m.purity)},   {"ari", round4(m.ari)},
	                      {"precision", round4(m.precision)}, {"recall", round4(m.recall)},
	                      {"f_score", round4(m.f_score)}, {"average", round4(m.average)}};
}

} // namespace rsc
