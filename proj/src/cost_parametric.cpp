#include "cpd/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

constexpr double kRegularization = 1e-6;
constexpr double kSingularRatio = 1e-10;

} // namespace

// ---------------------------------------------------------------- L2

L2Cost::L2Cost(const Signal& signal) : CostModel(signal.n_samples(), 1), moments_(signal, false) {}

double L2Cost::compute(Index a, Index b) const {
    const Index n = b - a;
    if (n == 1) {
        return 0.0;
    }
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double len = static_cast<double>(n);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(moments_.n_dims); ++j) {
        const double s = moments_.sums(ib, j) - moments_.sums(ia, j);
        const double q = moments_.products(ib, j) - moments_.products(ia, j);
        acc += q - s * s / len;
    }
    return std::max(acc, 0.0);
}

// ---------------------------------------------------------------- normal

NormalCost::NormalCost(const Signal& signal, bool regularize)
    : CostModel(signal.n_samples(), signal.n_dims() + 1),
      moments_(signal, true),
      regularize_(regularize) {
    const auto t = static_cast<Eigen::Index>(signal.n_samples());
    const auto d = static_cast<double>(signal.n_dims());
    double trace = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(signal.n_dims()); ++j) {
        trace += (signal.data().col(j).array() - signal.data().col(j).mean()).square().sum();
    }
    trace /= static_cast<double>(t);
    fallback_scale_ = trace > 0.0 ? trace / d : 1.0;
}

Eigen::MatrixXd NormalCost::covariance(Index a, Index b) const {
    const auto d = static_cast<Eigen::Index>(moments_.n_dims);
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double len = static_cast<double>(b - a);
    const Eigen::RowVectorXd s = moments_.sums.row(ib) - moments_.sums.row(ia);
    Eigen::MatrixXd cov(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double q = moments_.products(ib, i * d + j) - moments_.products(ia, i * d + j);
            cov(i, j) = (q - s(i) * s(j) / len) / len;
        }
    }
    return cov;
}

double NormalCost::compute(Index a, Index b) const {
    const auto d = static_cast<Eigen::Index>(moments_.n_dims);
    const double len = static_cast<double>(b - a);
    const Eigen::MatrixXd cov = covariance(a, b);

    Eigen::VectorXd eig;
    if (d == 1) {
        eig = cov.diagonal();
    } else {
        eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly).eigenvalues();
    }
    double scale = cov.trace() / static_cast<double>(d);
    if (!(scale > 1e-12 * fallback_scale_)) {
        scale = fallback_scale_;
    }
    if (eig.minCoeff() >= kSingularRatio * scale) {
        return len * (eig.array().log().sum() + static_cast<double>(d));
    }
    if (!regularize_) {
        throw std::runtime_error("singular covariance on segment (" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]");
    }
    // Sigma + delta*I shares eigenvectors with Sigma, so both the log-det and
    // the quadratic term tr((Sigma + delta I)^-1 Sigma) follow from eig.
    const double delta = kRegularization * scale;
    double log_det = 0.0;
    double quad = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double lambda = std::max(eig(i), 0.0);
        log_det += std::log(lambda + delta);
        quad += lambda / (lambda + delta);
    }
    return len * (log_det + quad);
}

// ---------------------------------------------------------------- Poisson

PoissonCost::PoissonCost(const Signal& signal) : CostModel(signal.n_samples(), 1) {
    const auto& y = signal.data();
    if ((y.array() < 0.0).any()) {
        throw std::invalid_argument("poisson cost requires nonnegative data");
    }
    sums_ = Eigen::MatrixXd::Zero(y.rows() + 1, y.cols());
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
        sums_.row(t + 1) = sums_.row(t) + y.row(t);
    }
}

double PoissonCost::compute(Index a, Index b) const {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double len = static_cast<double>(b - a);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < sums_.cols(); ++j) {
        const double mean = (sums_(ib, j) - sums_(ia, j)) / len;
        if (mean > 0.0) {
            acc -= len * mean * std::log(mean);
        }
    }
    return acc;
}

// ---------------------------------------------------------------- Mahalanobis

MahalanobisCost::MahalanobisCost(const Signal& signal, Eigen::MatrixXd metric)
    : CostModel(signal.n_samples(), 1), moments_(signal, true), metric_(std::move(metric)) {
    const auto d = static_cast<Eigen::Index>(signal.n_dims());
    if (metric_.rows() != d || metric_.cols() != d) {
        throw std::invalid_argument("metric matrix must be d x d");
    }
    if (!metric_.allFinite()) {
        throw std::invalid_argument("metric matrix has non-finite entries");
    }
    if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("metric matrix is not symmetric");
    }
    const Eigen::MatrixXd sym = 0.5 * (metric_ + metric_.transpose());
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (min_eig < -1e-8) {
        throw std::invalid_argument("metric matrix is not positive semi-definite");
    }
}

double MahalanobisCost::compute(Index a, Index b) const {
    const Index n = b - a;
    if (n == 1) {
        return 0.0;
    }
    const auto d = static_cast<Eigen::Index>(moments_.n_dims);
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double len = static_cast<double>(n);
    // Same accumulation order as L2Cost, so M = I reproduces it bit for bit.
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double si = moments_.sums(ib, i) - moments_.sums(ia, i);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double sj = moments_.sums(ib, j) - moments_.sums(ia, j);
            const double q = moments_.products(ib, i * d + j) - moments_.products(ia, i * d + j);
            acc += metric_(i, j) * (q - si * sj / len);
        }
    }
    return std::max(acc, 0.0);
}

} // namespace cpd
