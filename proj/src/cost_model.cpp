#include "cpd/costs.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace cpd {

namespace {

constexpr std::array<std::pair<CostKind, std::string_view>, 13> kCostNames{{
    {CostKind::l2, "l2"},
    {CostKind::normal, "normal"},
    {CostKind::poisson, "poisson"},
    {CostKind::linear, "linear"},
    {CostKind::linear_l1, "linear_l1"},
    {CostKind::ar, "ar"},
    {CostKind::mahalanobis, "mahalanobis"},
    {CostKind::rank, "rank"},
    {CostKind::ecdf, "ecdf"},
    {CostKind::kernel_linear, "kernel_linear"},
    {CostKind::kernel_rbf, "kernel_rbf"},
    {CostKind::kernel_poly, "kernel_poly"},
    {CostKind::kernel_chi2, "kernel_chi2"},
}};

const Covariates& require_covariates(const CostOptions& options, const Signal& signal) {
    if (!options.covariates) {
        throw std::invalid_argument("linear costs require covariates");
    }
    const auto& cov = *options.covariates;
    const auto rows = static_cast<Eigen::Index>(signal.n_samples());
    if (cov.x.rows() != rows || (cov.z.size() > 0 && cov.z.rows() != rows)) {
        throw std::invalid_argument("covariates must have the same number of rows as the signal");
    }
    return cov;
}

} // namespace

std::string_view to_string(CostKind kind) {
    for (const auto& [k, name] : kCostNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

CostKind parse_cost_kind(std::string_view name) {
    for (const auto& [k, n] : kCostNames) {
        if (n == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown cost '" + std::string(name) + "'");
}

double CostModel::eval(Index a, Index b) const {
    if (!admissible(a, b)) {
        throw std::out_of_range("interval (" + std::to_string(a) + ", " + std::to_string(b) +
                                "] is not admissible for cost " + std::string(to_string(kind())) +
                                " (T=" + std::to_string(n_samples_) +
                                ", min_size=" + std::to_string(min_size_) + ")");
    }
    return compute(a, b);
}

std::unique_ptr<CostModel> fit(CostKind kind, const Signal& signal, const CostOptions& options) {
    switch (kind) {
    case CostKind::l2:
        return std::make_unique<L2Cost>(signal);
    case CostKind::normal:
        return std::make_unique<NormalCost>(signal, options.regularize);
    case CostKind::poisson:
        return std::make_unique<PoissonCost>(signal);
    case CostKind::linear:
        return std::make_unique<LinearCost>(signal, require_covariates(options, signal));
    case CostKind::linear_l1:
        return std::make_unique<LinearL1Cost>(signal, require_covariates(options, signal));
    case CostKind::ar:
        return std::make_unique<ArCost>(signal, options.ar_order);
    case CostKind::mahalanobis:
        if (!options.metric) {
            throw std::invalid_argument("mahalanobis cost requires a metric matrix");
        }
        return std::make_unique<MahalanobisCost>(signal, *options.metric);
    case CostKind::rank:
        return std::make_unique<RankCost>(signal);
    case CostKind::ecdf:
        return std::make_unique<EcdfCost>(signal);
    case CostKind::kernel_linear:
        return std::make_unique<KernelCost>(signal, KernelSpec{KernelSpec::Kind::linear}, options);
    case CostKind::kernel_rbf:
        return std::make_unique<KernelCost>(
            signal, KernelSpec{KernelSpec::Kind::rbf, options.gamma}, options);
    case CostKind::kernel_poly:
        return std::make_unique<KernelCost>(
            signal,
            KernelSpec{KernelSpec::Kind::polynomial, options.gamma, options.poly_constant,
                       options.poly_degree},
            options);
    case CostKind::kernel_chi2:
        return std::make_unique<KernelCost>(
            signal, KernelSpec{KernelSpec::Kind::chi2, options.gamma}, options);
    }
    throw std::invalid_argument("unknown cost kind");
}

double sum_of_costs(const CostModel& cost, const Segmentation& seg) {
    if (seg.n_samples() != cost.n_samples()) {
        throw std::invalid_argument("segmentation and cost refer to signals of different length");
    }
    double total = 0.0;
    for (const auto& [a, b] : seg.segments()) {
        total += cost.eval(a, b);
    }
    return total;
}

CenteredMoments::CenteredMoments(const Signal& signal, bool cross_products)
    : n_dims(signal.n_dims()), cross(cross_products) {
    const auto& y = signal.data();
    const Eigen::Index rows = y.rows();
    const Eigen::Index d = y.cols();
    const Eigen::RowVectorXd mean = y.colwise().mean();
    sums = Eigen::MatrixXd::Zero(rows + 1, d);
    products = Eigen::MatrixXd::Zero(rows + 1, cross ? d * d : d);
    Eigen::RowVectorXd c(d);
    for (Eigen::Index t = 0; t < rows; ++t) {
        c = y.row(t) - mean;
        sums.row(t + 1) = sums.row(t) + c;
        if (cross) {
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    products(t + 1, i * d + j) = products(t, i * d + j) + c(i) * c(j);
                }
            }
        } else {
            for (Eigen::Index j = 0; j < d; ++j) {
                products(t + 1, j) = products(t, j) + c(j) * c(j);
            }
        }
    }
}

} // namespace cpd
