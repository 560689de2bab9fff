#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cpd/signal.hpp"

namespace cpd {

enum class CostKind {
    l2,
    normal,
    poisson,
    linear,
    linear_l1,
    ar,
    mahalanobis,
    rank,
    ecdf,
    kernel_linear,
    kernel_rbf,
    kernel_poly,
    kernel_chi2,
};

std::string_view to_string(CostKind kind);
/// Parses the identifiers used on the command line ("l2", "kernel_rbf", ...).
CostKind parse_cost_kind(std::string_view name);

struct KernelSpec {
    enum class Kind { linear, rbf, polynomial, chi2 };
    Kind kind = Kind::rbf;
    double gamma = 1.0;
    double constant = 1.0;
    int degree = 2;
};

/// Regressors for the linear costs: x changes at every breakpoint, z does not
/// (z may have zero columns).
struct Covariates {
    Eigen::MatrixXd x;
    Eigen::MatrixXd z;
};

struct CostOptions {
    std::optional<Covariates> covariates;
    int ar_order = 1;
    std::optional<Eigen::MatrixXd> metric;
    double gamma = 1.0;
    double poly_constant = 1.0;
    int poly_degree = 2;
    /// Regularize near-singular covariances in the "normal" cost instead of
    /// failing.
    bool regularize = true;
    /// Largest T for which the kernel cost keeps the whole Gram summary in
    /// memory; above it rows are computed on demand and cached.
    Index gram_cap = 10000;
    std::size_t gram_row_cache = 4096;
};

/// A cost c(y_{a..b}) fitted to one signal.
///
/// eval(a, b) covers samples a+1 .. b (zero-based rows [a, b)). Fitted state
/// is immutable, so eval may be called concurrently.
class CostModel {
public:
    virtual ~CostModel() = default;

    virtual CostKind kind() const = 0;
    Index n_samples() const { return n_samples_; }
    Index min_size() const { return min_size_; }

    /// Whether eval(a, b) is defined. Searches skip intervals that are not.
    virtual bool admissible(Index a, Index b) const {
        return a < b && b <= n_samples_ && b - a >= min_size_;
    }

    /// Throws std::out_of_range when the interval is not admissible.
    double eval(Index a, Index b) const;

protected:
    CostModel(Index n_samples, Index min_size) : n_samples_(n_samples), min_size_(min_size) {}
    virtual double compute(Index a, Index b) const = 0;

private:
    Index n_samples_;
    Index min_size_;
};

/// Builds the evaluator for `kind`. Throws std::invalid_argument when the
/// options or the data do not fit the cost.
std::unique_ptr<CostModel> fit(CostKind kind, const Signal& signal, const CostOptions& options = {});

/// V(T, y): sum of segment costs.
double sum_of_costs(const CostModel& cost, const Segmentation& seg);

// ---------------------------------------------------------------------------
// Concrete costs. fit() is the usual entry point; the classes are public so
// callers and tests can reach kind-specific state.

/// Prefix sums of the column-centred signal and of its products.
struct CenteredMoments {
    CenteredMoments(const Signal& signal, bool cross_products);

    Index n_dims;
    Eigen::MatrixXd sums;     // (T+1) x d
    Eigen::MatrixXd products; // (T+1) x d*d, or (T+1) x d for squares only
    bool cross;
};

/// Sum of squared deviations from the segment mean.
class L2Cost final : public CostModel {
public:
    explicit L2Cost(const Signal& signal);
    CostKind kind() const override { return CostKind::l2; }

protected:
    double compute(Index a, Index b) const override;

private:
    CenteredMoments moments_;
};

/// Gaussian negative log-likelihood with segment-specific mean and covariance.
class NormalCost final : public CostModel {
public:
    NormalCost(const Signal& signal, bool regularize);
    CostKind kind() const override { return CostKind::normal; }

    /// MLE covariance of rows [a, b).
    Eigen::MatrixXd covariance(Index a, Index b) const;

protected:
    double compute(Index a, Index b) const override;

private:
    CenteredMoments moments_;
    bool regularize_;
    double fallback_scale_;
};

/// Poisson negative log-likelihood, summed over dimensions.
class PoissonCost final : public CostModel {
public:
    explicit PoissonCost(const Signal& signal);
    CostKind kind() const override { return CostKind::poisson; }

protected:
    double compute(Index a, Index b) const override;

private:
    Eigen::MatrixXd sums_;
};

/// Least-squares residual of a univariate response on a design matrix,
/// served from prefix sums of X'X, X'y and y'y.
class RegressionCost : public CostModel {
public:
    const Eigen::MatrixXd& design() const { return design_; }
    const Eigen::VectorXd& response() const { return response_; }

protected:
    RegressionCost(Eigen::VectorXd response, Eigen::MatrixXd design, Index min_size);
    /// Residual sum of squares over rows [first, b).
    double rss(Index first, Index b) const;

private:
    Eigen::VectorXd response_;
    Eigen::MatrixXd design_;
    Eigen::MatrixXd gram_prefix_;  // (T+1) x P*P
    Eigen::MatrixXd cross_prefix_; // (T+1) x P
    Eigen::VectorXd square_prefix_;
};

class LinearCost final : public RegressionCost {
public:
    LinearCost(const Signal& signal, const Covariates& covariates);
    CostKind kind() const override { return CostKind::linear; }

protected:
    double compute(Index a, Index b) const override { return rss(a, b); }
};

/// Autoregressive residual: y_t on [y_{t-1}, .., y_{t-p}, 1]. Lags come from
/// the whole signal; a segment must start at a >= p, except the leading
/// segment (a = 0), whose first p samples only serve as history.
class ArCost final : public RegressionCost {
public:
    ArCost(const Signal& signal, int order);
    CostKind kind() const override { return CostKind::ar; }
    int order() const { return order_; }
    bool admissible(Index a, Index b) const override;

protected:
    double compute(Index a, Index b) const override;

private:
    int order_;
};

struct LadFit {
    double objective = 0.0;
    Eigen::VectorXd coef;
    /// Objective after each accepted iterate, starting with the OLS fit.
    std::vector<double> trace;
};

/// Least absolute deviations by iteratively reweighted least squares.
LadFit fit_lad(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

class LinearL1Cost final : public CostModel {
public:
    LinearL1Cost(const Signal& signal, const Covariates& covariates);
    CostKind kind() const override { return CostKind::linear_l1; }

protected:
    double compute(Index a, Index b) const override;

private:
    Eigen::VectorXd response_;
    Eigen::MatrixXd design_;
};

class MahalanobisCost final : public CostModel {
public:
    MahalanobisCost(const Signal& signal, Eigen::MatrixXd metric);
    CostKind kind() const override { return CostKind::mahalanobis; }
    const Eigen::MatrixXd& metric() const { return metric_; }

protected:
    double compute(Index a, Index b) const override;

private:
    CenteredMoments moments_;
    Eigen::MatrixXd metric_;
};

/// Cost on the centred marginal rank signal.
class RankCost final : public CostModel {
public:
    explicit RankCost(const Signal& signal);
    CostKind kind() const override { return CostKind::rank; }

    const Eigen::MatrixXd& ranks() const { return ranks_; }
    /// (Pseudo-)inverse of the rank covariance.
    const Eigen::MatrixXd& precision() const { return precision_; }

protected:
    double compute(Index a, Index b) const override;

private:
    Eigen::MatrixXd ranks_;
    Eigen::MatrixXd prefix_;
    Eigen::MatrixXd precision_;
};

/// Non-parametric likelihood built on the segment empirical cdf, evaluated at
/// the order statistics of the whole (univariate) signal.
class EcdfCost final : public CostModel {
public:
    explicit EcdfCost(const Signal& signal);
    CostKind kind() const override { return CostKind::ecdf; }

protected:
    double compute(Index a, Index b) const override;

private:
    std::vector<double> values_;
    std::vector<double> pooled_;
};

class KernelCost final : public CostModel {
public:
    KernelCost(const Signal& signal, KernelSpec spec, const CostOptions& options);
    CostKind kind() const override;

    const KernelSpec& spec() const { return spec_; }
    bool full_gram() const { return !row_cumsum_.empty(); }
    double kernel(Index s, Index t) const;

protected:
    double compute(Index a, Index b) const override;

private:
    /// sum_{u < t} k(y_s, y_u) for t = 0..T.
    std::vector<double> cumulative_row(Index s) const;
    double block_row(Index s, Index a, Index b) const;

    Eigen::MatrixXd data_;
    KernelSpec spec_;
    std::vector<double> diag_prefix_;
    std::vector<double> row_cumsum_; // T x (T+1), row-major, when full_gram()

    struct RowCache {
        std::mutex mutex;
        std::list<Index> order;
        std::unordered_map<Index, std::pair<std::vector<double>, std::list<Index>::iterator>> rows;
        std::size_t capacity = 0;
    };
    std::unique_ptr<RowCache> cache_;
};

} // namespace cpd
