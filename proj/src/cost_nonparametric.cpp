#include "cpd/costs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

} // namespace

// ---------------------------------------------------------------- rank

RankCost::RankCost(const Signal& signal) : CostModel(signal.n_samples(), 1) {
    const auto& y = signal.data();
    const Eigen::Index rows = y.rows();
    const Eigen::Index d = y.cols();
    const double center = (static_cast<double>(rows) + 1.0) / 2.0;

    ranks_.resize(rows, d);
    std::vector<double> sorted(static_cast<std::size_t>(rows));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index t = 0; t < rows; ++t) {
            sorted[static_cast<std::size_t>(t)] = y(t, j);
        }
        std::sort(sorted.begin(), sorted.end());
        for (Eigen::Index t = 0; t < rows; ++t) {
            // number of samples <= y(t, j)
            const auto count = std::upper_bound(sorted.begin(), sorted.end(), y(t, j)) - sorted.begin();
            ranks_(t, j) = static_cast<double>(count) - center;
        }
    }

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index t = 0; t < rows; ++t) {
        const Eigen::VectorXd shifted = ranks_.row(t).transpose().array() + 0.5;
        cov.noalias() += shifted * shifted.transpose();
    }
    cov /= static_cast<double>(rows);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double cutoff = std::max(values.cwiseAbs().maxCoeff(), 1e-300) * static_cast<double>(d) * 1e-12;
    Eigen::VectorXd inv(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        inv(i) = values(i) > cutoff ? 1.0 / values(i) : 0.0;
    }
    precision_ = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();

    prefix_ = Eigen::MatrixXd::Zero(rows + 1, d);
    for (Eigen::Index t = 0; t < rows; ++t) {
        prefix_.row(t + 1) = prefix_.row(t) + ranks_.row(t);
    }
}

double RankCost::compute(Index a, Index b) const {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const Eigen::VectorXd s = (prefix_.row(ib) - prefix_.row(ia)).transpose();
    const double len = static_cast<double>(b - a);
    const Eigen::VectorXd mean = s / len;
    return -len * mean.dot(precision_ * mean);
}

// ---------------------------------------------------------------- ecdf

EcdfCost::EcdfCost(const Signal& signal) : CostModel(signal.n_samples(), 1) {
    if (signal.n_dims() != 1) {
        throw std::invalid_argument("ecdf cost requires a univariate signal");
    }
    values_.assign(signal.data().col(0).begin(), signal.data().col(0).end());
    pooled_ = values_;
    std::sort(pooled_.begin(), pooled_.end());
}

double EcdfCost::compute(Index a, Index b) const {
    std::vector<double> seg(values_.begin() + static_cast<std::ptrdiff_t>(a),
                            values_.begin() + static_cast<std::ptrdiff_t>(b));
    std::sort(seg.begin(), seg.end());
    const double len = static_cast<double>(seg.size());
    const double total = static_cast<double>(pooled_.size());

    std::size_t below = 0; // first element >= u
    std::size_t upto = 0;  // first element > u
    double acc = 0.0;
    for (std::size_t i = 0; i < pooled_.size(); ++i) {
        const double u = pooled_[i];
        while (below < seg.size() && seg[below] < u) {
            ++below;
        }
        upto = std::max(upto, below);
        while (upto < seg.size() && seg[upto] <= u) {
            ++upto;
        }
        const double cdf = (static_cast<double>(below) + 0.5 * static_cast<double>(upto - below)) / len;
        const double rank = static_cast<double>(i + 1);
        acc += (xlogx(cdf) + xlogx(1.0 - cdf)) / ((rank - 0.5) * (total - rank + 0.5));
    }
    return -len * acc;
}

} // namespace cpd
