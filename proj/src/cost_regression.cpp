#include "cpd/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

Eigen::VectorXd univariate_response(const Signal& signal, const char* cost) {
    if (signal.n_dims() != 1) {
        throw std::invalid_argument(std::string(cost) + " cost requires a univariate signal");
    }
    return signal.data().col(0);
}

Eigen::MatrixXd stack_covariates(const Covariates& cov) {
    if (!cov.x.allFinite() || !cov.z.allFinite()) {
        throw std::invalid_argument("covariates contain non-finite values");
    }
    if (cov.x.cols() + cov.z.cols() == 0) {
        throw std::invalid_argument("covariates have no columns");
    }
    Eigen::MatrixXd design(cov.x.rows(), cov.x.cols() + cov.z.cols());
    design << cov.x, cov.z;
    return design;
}

/// Minimum-norm solution of the symmetric PSD system gram * coef = rhs.
Eigen::VectorXd pseudo_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double cutoff = std::max(values.cwiseAbs().maxCoeff(), 1e-300) *
                          static_cast<double>(gram.rows()) * 1e-12;
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * rhs;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        proj(i) = values(i) > cutoff ? proj(i) / values(i) : 0.0;
    }
    return eig.eigenvectors() * proj;
}

/// Minimum-norm weighted least squares.
Eigen::VectorXd solve_weighted(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                               const Eigen::VectorXd& weights) {
    const Eigen::VectorXd root = weights.cwiseSqrt();
    const Eigen::MatrixXd wx = root.asDiagonal() * design;
    const Eigen::VectorXd wy = root.cwiseProduct(response);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(wx);
    return cod.solve(wy);
}

} // namespace

// ---------------------------------------------------------------- regression base

RegressionCost::RegressionCost(Eigen::VectorXd response, Eigen::MatrixXd design, Index min_size)
    : CostModel(static_cast<Index>(response.size()), min_size),
      response_(std::move(response)),
      design_(std::move(design)) {
    const Eigen::Index rows = design_.rows();
    const Eigen::Index p = design_.cols();
    gram_prefix_ = Eigen::MatrixXd::Zero(rows + 1, p * p);
    cross_prefix_ = Eigen::MatrixXd::Zero(rows + 1, p);
    square_prefix_ = Eigen::VectorXd::Zero(rows + 1);
    for (Eigen::Index t = 0; t < rows; ++t) {
        const double y = response_(t);
        for (Eigen::Index i = 0; i < p; ++i) {
            const double xi = design_(t, i);
            for (Eigen::Index j = 0; j < p; ++j) {
                gram_prefix_(t + 1, i * p + j) = gram_prefix_(t, i * p + j) + xi * design_(t, j);
            }
            cross_prefix_(t + 1, i) = cross_prefix_(t, i) + xi * y;
        }
        square_prefix_(t + 1) = square_prefix_(t) + y * y;
    }
}

double RegressionCost::rss(Index first, Index b) const {
    const Eigen::Index p = design_.cols();
    const auto ia = static_cast<Eigen::Index>(first);
    const auto ib = static_cast<Eigen::Index>(b);
    Eigen::MatrixXd gram(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            gram(i, j) = gram_prefix_(ib, i * p + j) - gram_prefix_(ia, i * p + j);
        }
    }
    const Eigen::VectorXd cross = (cross_prefix_.row(ib) - cross_prefix_.row(ia)).transpose();
    const double squares = square_prefix_(ib) - square_prefix_(ia);
    const Eigen::VectorXd coef = pseudo_solve(gram, cross);
    return std::max(squares - cross.dot(coef), 0.0);
}

// ---------------------------------------------------------------- linear

LinearCost::LinearCost(const Signal& signal, const Covariates& covariates)
    : RegressionCost(univariate_response(signal, "linear"), stack_covariates(covariates),
                     static_cast<Index>(covariates.x.cols() + covariates.z.cols())) {}

// ---------------------------------------------------------------- AR

namespace {

Eigen::MatrixXd lag_design(const Signal& signal, int order) {
    if (order < 1) {
        throw std::invalid_argument("AR order must be >= 1");
    }
    if (static_cast<Index>(order) >= signal.n_samples()) {
        throw std::invalid_argument("AR order must be smaller than the signal length");
    }
    const auto& y = signal.data();
    const Eigen::Index rows = y.rows();
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, order + 1);
    for (Eigen::Index t = 0; t < rows; ++t) {
        for (int lag = 1; lag <= order; ++lag) {
            if (t - lag >= 0) {
                design(t, lag - 1) = y(t - lag, 0);
            }
        }
        design(t, order) = 1.0;
    }
    return design;
}

} // namespace

ArCost::ArCost(const Signal& signal, int order)
    : RegressionCost(univariate_response(signal, "ar"), lag_design(signal, order),
                     static_cast<Index>(order) + 1),
      order_(order) {}

bool ArCost::admissible(Index a, Index b) const {
    const auto p = static_cast<Index>(order_);
    if (!CostModel::admissible(a, b)) {
        return false;
    }
    if (a == 0) {
        return b > p;
    }
    return a >= p;
}

double ArCost::compute(Index a, Index b) const {
    const auto p = static_cast<Index>(order_);
    return rss(std::max(a, p), b);
}

// ---------------------------------------------------------------- LAD

LadFit fit_lad(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    constexpr int kMaxIter = 50;
    constexpr double kWeightFloor = 1e-8;
    constexpr double kRelTol = 1e-10;

    LadFit out;
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(response.size());
    out.coef = solve_weighted(design, response, weights);
    out.objective = (response - design * out.coef).cwiseAbs().sum();
    out.trace.push_back(out.objective);
    for (int iter = 0; iter < kMaxIter && out.objective > 0.0; ++iter) {
        const Eigen::VectorXd resid = response - design * out.coef;
        weights = resid.cwiseAbs().cwiseMax(kWeightFloor).cwiseInverse();
        Eigen::VectorXd next = solve_weighted(design, response, weights);
        const double objective = (response - design * next).cwiseAbs().sum();
        if (!(objective <= out.objective)) {
            break;
        }
        const double previous = out.objective;
        out.coef = std::move(next);
        out.objective = objective;
        out.trace.push_back(objective);
        if (previous - objective < kRelTol * previous) {
            break;
        }
    }
    return out;
}

LinearL1Cost::LinearL1Cost(const Signal& signal, const Covariates& covariates)
    : CostModel(signal.n_samples(), static_cast<Index>(covariates.x.cols() + covariates.z.cols())),
      response_(univariate_response(signal, "linear_l1")),
      design_(stack_covariates(covariates)) {}

double LinearL1Cost::compute(Index a, Index b) const {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto n = static_cast<Eigen::Index>(b - a);
    return fit_lad(design_.middleRows(ia, n), response_.segment(ia, n)).objective;
}

} // namespace cpd
