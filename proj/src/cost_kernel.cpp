#include "cpd/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

// Upper bound on cached doubles in the on-demand path (~256 MB).
constexpr std::size_t kCacheBudget = std::size_t{32} << 20;

} // namespace

KernelCost::KernelCost(const Signal& signal, KernelSpec spec, const CostOptions& options)
    : CostModel(signal.n_samples(), 1), data_(signal.data()), spec_(spec) {
    using Kind = KernelSpec::Kind;
    if ((spec_.kind == Kind::rbf || spec_.kind == Kind::chi2) && !(spec_.gamma > 0.0)) {
        throw std::invalid_argument("kernel bandwidth gamma must be > 0");
    }
    if (spec_.kind == Kind::polynomial && spec_.degree < 1) {
        throw std::invalid_argument("polynomial kernel degree must be >= 1");
    }
    if (spec_.kind == Kind::chi2) {
        if ((data_.array() < 0.0).any()) {
            throw std::invalid_argument("chi2 kernel requires nonnegative data");
        }
        if ((data_.colwise().sum().array() <= 0.0).any()) {
            throw std::invalid_argument("chi2 kernel requires every pooled bin sum to be positive");
        }
    }

    const Index rows = n_samples();
    diag_prefix_.assign(rows + 1, 0.0);
    for (Index t = 0; t < rows; ++t) {
        diag_prefix_[t + 1] = diag_prefix_[t] + kernel(t, t);
    }

    if (rows <= options.gram_cap) {
        row_cumsum_.resize(rows * (rows + 1));
        for (Index s = 0; s < rows; ++s) {
            auto row = cumulative_row(s);
            std::copy(row.begin(), row.end(), row_cumsum_.begin() + static_cast<std::ptrdiff_t>(s * (rows + 1)));
        }
    } else {
        cache_ = std::make_unique<RowCache>();
        cache_->capacity = std::max<std::size_t>(1, std::min(options.gram_row_cache, kCacheBudget / (rows + 1)));
    }
}

CostKind KernelCost::kind() const {
    switch (spec_.kind) {
    case KernelSpec::Kind::linear:
        return CostKind::kernel_linear;
    case KernelSpec::Kind::rbf:
        return CostKind::kernel_rbf;
    case KernelSpec::Kind::polynomial:
        return CostKind::kernel_poly;
    case KernelSpec::Kind::chi2:
        return CostKind::kernel_chi2;
    }
    return CostKind::kernel_rbf;
}

double KernelCost::kernel(Index s, Index t) const {
    const auto x = data_.row(static_cast<Eigen::Index>(s));
    const auto y = data_.row(static_cast<Eigen::Index>(t));
    switch (spec_.kind) {
    case KernelSpec::Kind::linear:
        return x.dot(y);
    case KernelSpec::Kind::rbf:
        return std::exp(-spec_.gamma * (x - y).squaredNorm());
    case KernelSpec::Kind::polynomial:
        return std::pow(x.dot(y) + spec_.constant, spec_.degree);
    case KernelSpec::Kind::chi2: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double total = x(i) + y(i);
            if (total > 0.0) {
                const double diff = x(i) - y(i);
                acc += diff * diff / total;
            }
        }
        return std::exp(-spec_.gamma * acc);
    }
    }
    return 0.0;
}

std::vector<double> KernelCost::cumulative_row(Index s) const {
    const Index rows = n_samples();
    std::vector<double> row(rows + 1, 0.0);
    for (Index t = 0; t < rows; ++t) {
        row[t + 1] = row[t] + kernel(s, t);
    }
    return row;
}

double KernelCost::block_row(Index s, Index a, Index b) const {
    const Index stride = n_samples() + 1;
    const double* row = row_cumsum_.data() + s * stride;
    return row[b] - row[a];
}

double KernelCost::compute(Index a, Index b) const {
    const Index n = b - a;
    if (n == 1) {
        return 0.0;
    }
    double block = 0.0;
    if (full_gram()) {
        for (Index s = a; s < b; ++s) {
            block += block_row(s, a, b);
        }
    } else {
        std::lock_guard lock(cache_->mutex);
        for (Index s = a; s < b; ++s) {
            auto it = cache_->rows.find(s);
            if (it == cache_->rows.end()) {
                if (cache_->rows.size() >= cache_->capacity) {
                    cache_->rows.erase(cache_->order.back());
                    cache_->order.pop_back();
                }
                cache_->order.push_front(s);
                it = cache_->rows.emplace(s, std::make_pair(cumulative_row(s), cache_->order.begin())).first;
            } else {
                cache_->order.splice(cache_->order.begin(), cache_->order, it->second.second);
            }
            const auto& row = it->second.first;
            block += row[b] - row[a];
        }
    }
    return (diag_prefix_[b] - diag_prefix_[a]) - block / static_cast<double>(n);
}

} // namespace cpd
